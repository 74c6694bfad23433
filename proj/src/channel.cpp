#include "dopsim/channel.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "dopsim/errors.hpp"
#include "dopsim/output.hpp"

namespace dopsim {

namespace {

Vec3 checked_axis(Vec3 axis) {
  const double n = norm(axis);
  if (n == 0.0) throw UndefinedDirection("axis is the zero vector");
  if (std::abs(n - 1.0) > kInputTol) throw InvalidState("axis must be normalized");
  return axis;
}

// Any unit vector orthogonal to `n`.
Vec3 orthogonal_to(Vec3 n) {
  const Vec3 trial = std::abs(n.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  return normalized(cross(n, trial));
}

SourceSpec rotate_lines(const SourceSpec& src, Vec3 axis, auto&& angle_of) {
  std::vector<SpectralLine> lines;
  lines.reserve(src.size());
  for (const auto& line : src.lines()) {
    const auto m = rotate_poincare(line.poincare(), axis, angle_of(line));
    lines.push_back({line.wavelength_nm, line.intensity, density_from_poincare(m)});
  }
  return SourceSpec(std::move(lines));
}

}  // namespace

FiberState::FiberState(Vec3 axis, double retardance_ref, double ref_wavelength_nm)
    : axis_(checked_axis(axis)), retardance_ref_(retardance_ref), ref_wavelength_nm_(ref_wavelength_nm) {
  if (!std::isfinite(retardance_ref)) throw InvalidState("fiber retardance must be finite");
  if (!(ref_wavelength_nm > 0.0)) throw InvalidState("fiber reference wavelength must be positive");
}

void FluctuationProcess::validate() const {
  if (!(correlation_time_s > 0.0)) throw InvalidState("correlation_time_s must be positive");
  if (!(axis_diffusion >= 0.0)) throw InvalidState("axis_diffusion must be non-negative");
  if (!(retardance_sigma >= 0.0)) throw InvalidState("retardance_sigma must be non-negative");
  if (!std::isfinite(retardance_mean)) throw InvalidState("retardance_mean must be finite");
}

void PmdElement::validate() const {
  if (!(dgd_s >= 0.0)) throw InvalidState("dgd_s must be non-negative");
  checked_axis(axis);
}

SourceSpec apply_fiber(const SourceSpec& src, const FiberState& fiber) {
  return rotate_lines(src, fiber.axis(), [&](const SpectralLine& l) { return fiber.retardance_at(l.wavelength_nm); });
}

FiberState evolve(const FiberState& fiber, double dt, const FluctuationProcess& process, Rng& rng) {
  if (!(dt > 0.0)) throw InvalidState("evolve: dt must be positive");
  process.validate();

  Vec3 axis = fiber.axis();
  if (process.axis_diffusion > 0.0) {
    const Vec3 e1 = orthogonal_to(axis);
    const Vec3 e2 = cross(axis, e1);
    const double step = std::sqrt(process.axis_diffusion * dt);
    const double g1 = rng.normal();
    const double g2 = rng.normal();
    axis = normalized(axis + (step * g1) * e1 + (step * g2) * e2);
  }

  double retardance = fiber.retardance_ref();
  if (process.retardance_sigma > 0.0) {
    // Exact OU transition over dt.
    const double decay = std::exp(-dt / process.correlation_time_s);
    const double spread = process.retardance_sigma * std::sqrt(1.0 - decay * decay);
    retardance = process.retardance_mean + (retardance - process.retardance_mean) * decay + spread * rng.normal();
  }
  return FiberState(axis, retardance, fiber.ref_wavelength_nm());
}

SourceSpec apply_pmd(const SourceSpec& src, const PmdElement& el, double carrier_nm) {
  el.validate();
  if (!(carrier_nm > 0.0)) throw InvalidState("carrier wavelength must be positive");
  const double nu_carrier = kSpeedOfLight / (carrier_nm * 1e-9);
  return rotate_lines(src, el.axis, [&](const SpectralLine& l) {
    const double nu = kSpeedOfLight / (l.wavelength_nm * 1e-9);
    return 2.0 * std::numbers::pi * (nu - nu_carrier) * el.dgd_s;
  });
}

double angle_preservation_error(const SourceSpec& src, const FiberState& fiber) {
  if (src.size() != 2) throw InvalidState("angle preservation needs a two-line source");
  const auto out = apply_fiber(src, fiber);
  const double before = poincare_angle(src[0].poincare(), src[1].poincare());
  const double after = poincare_angle(out[0].poincare(), out[1].poincare());
  return std::abs(after - before);
}

std::vector<TrajectorySample> simulate_trajectory(const FiberState& initial, const FluctuationProcess& process,
                                                  double dt, std::size_t steps) {
  Rng rng(process.seed);
  std::vector<TrajectorySample> out;
  out.reserve(steps + 1);
  out.push_back({0.0, initial});
  for (std::size_t i = 1; i <= steps; ++i) {
    out.push_back({static_cast<double>(i) * dt, evolve(out.back().state, dt, process, rng)});
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> samples) {
  out << "time_s,axis1,axis2,axis3,retardance_rad\n";
  for (const auto& s : samples) {
    const Vec3 a = s.state.axis();
    out << format_number(s.time_s) << ',' << format_number(a.x) << ',' << format_number(a.y) << ','
        << format_number(a.z) << ',' << format_number(s.state.retardance_ref()) << '\n';
  }
}

double angular_coverage(std::span<const Vec3> directions) {
  if (directions.empty()) return 0.0;
  Vec3 acc{};
  for (const auto& d : directions) acc = acc + normalized(d);
  return 1.0 - norm(acc) / static_cast<double>(directions.size());
}

}  // namespace dopsim
