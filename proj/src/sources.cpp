#include "dopsim/sources.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dopsim/errors.hpp"

namespace dopsim {

SourceSpec::SourceSpec(std::vector<SpectralLine> lines) : lines_(std::move(lines)) {
  if (lines_.empty()) throw InvalidState("source has no spectral lines");
  double total = 0.0;
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    const auto& line = lines_[i];
    if (!(line.wavelength_nm > 0.0) || !std::isfinite(line.wavelength_nm)) {
      throw InvalidState("line " + std::to_string(i) + ": wavelength must be positive");
    }
    if (!(line.intensity >= 0.0) || !std::isfinite(line.intensity)) {
      throw InvalidState("line " + std::to_string(i) + ": intensity must be non-negative");
    }
    if (i > 0 && !(line.wavelength_nm > lines_[i - 1].wavelength_nm)) {
      throw InvalidState("line wavelengths must be strictly increasing");
    }
    total += line.intensity;
  }
  if (!(total > 0.0)) throw InvalidState("source total intensity must be positive");
}

double SourceSpec::total_intensity() const {
  double total = 0.0;
  for (const auto& line : lines_) total += line.intensity;
  return total;
}

DensityMatrix SourceSpec::mixed_state() const {
  std::vector<DensityMatrix> states;
  std::vector<double> weights;
  states.reserve(lines_.size());
  weights.reserve(lines_.size());
  for (const auto& line : lines_) {
    states.push_back(line.polarization);
    weights.push_back(line.intensity);
  }
  return mix(states, weights);
}

StokesVector SourceSpec::stokes() const {
  double s0 = 0.0;
  Vec3 s{};
  for (const auto& line : lines_) {
    s0 += line.intensity;
    s = s + line.intensity * line.poincare().vec();
  }
  return {s0, s.x, s.y, s.z};
}

SourceSpec two_laser_source(double lambda1_nm, double lambda2_nm, double i1, double i2,
                            const PoincareVector& m1, const PoincareVector& m2) {
  if (lambda1_nm == lambda2_nm) throw InvalidState("two-laser source needs distinct wavelengths");
  if (std::abs(m1.norm() - 1.0) > kInputTol || std::abs(m2.norm() - 1.0) > kInputTol) {
    throw InvalidState("laser lines must be pure states (|M| = 1)");
  }
  if (!(i1 + i2 > 0.0)) throw InvalidState("two-laser source needs positive total intensity");
  SpectralLine a{lambda1_nm, i1, density_from_poincare(m1)};
  SpectralLine b{lambda2_nm, i2, density_from_poincare(m2)};
  if (lambda1_nm > lambda2_nm) std::swap(a, b);
  return SourceSpec({a, b});
}

double source_dop(const SourceSpec& src) { return dop(poincare_from_density(src.mixed_state())); }

double two_line_dop(double i1, double i2, double two_phi) {
  const double total = i1 + i2;
  if (!(total > 0.0)) throw UndefinedDop("two-line DOP needs positive total intensity");
  // Rewritten as (I1-I2)^2 + 4 I1 I2 cos^2(phi), which is identical but has
  // no cancellation near DOP = 0.
  const double c = std::cos(0.5 * two_phi);
  const double diff = i1 - i2;
  return std::sqrt(diff * diff + 4.0 * i1 * i2 * c * c) / total;
}

double two_phi_for_dop(double i1, double i2, double dop) {
  const double total = i1 + i2;
  if (!(total > 0.0)) throw InvalidState("two-line source needs positive total intensity");
  if (!(dop >= 0.0 && dop <= 1.0)) throw InvalidState("DOP must lie in [0, 1]");
  const double diff = i1 - i2;
  if (i1 * i2 == 0.0) {
    if (dop < 1.0 - kInputTol) throw InvalidState("a single effective line is always fully polarized");
    return 0.0;
  }
  const double cos2 = (dop * dop * total * total - diff * diff) / (4.0 * i1 * i2);
  if (cos2 < -kInputTol) throw InvalidState("DOP below |I1 - I2| / (I1 + I2) is unreachable");
  return 2.0 * std::acos(std::sqrt(std::clamp(cos2, 0.0, 1.0)));
}

double sideband_spacing_nm(double carrier_nm, double bitrate_hz) {
  // (carrier in m)^2 * f / c, returned in nm.
  return carrier_nm * carrier_nm * 1e-9 * bitrate_hz / kSpeedOfLight;
}

SourceSpec modulated_carrier_source(double carrier_nm, double bitrate_hz, const PoincareVector& m_minus,
                                    const PoincareVector& m_carrier, const PoincareVector& m_plus,
                                    const CarrierSplit& split) {
  if (!(bitrate_hz > 0.0)) throw InvalidState("modulation bitrate must be positive");
  const double delta = sideband_spacing_nm(carrier_nm, bitrate_hz);
  if (!(delta > 0.0) || !(carrier_nm - delta > 0.0)) {
    throw InvalidState("sideband spacing is zero or exceeds the carrier wavelength");
  }
  return SourceSpec({
      {carrier_nm - delta, split[2], density_from_poincare(m_plus)},
      {carrier_nm, split[1], density_from_poincare(m_carrier)},
      {carrier_nm + delta, split[0], density_from_poincare(m_minus)},
  });
}

PoincareVector great_circle_point(int circle_index, double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  switch (circle_index) {
    case 0: return {c, s, 0.0};
    case 1: return {0.0, c, s};
    case 2: return {s, 0.0, c};
    default: throw InvalidState("great circle index must be 0, 1 or 2");
  }
}

std::vector<PoincareVector> great_circle_states(int circle_index, int count, double step_deg) {
  if (count < 0) throw InvalidState("great circle state count must be non-negative");
  std::vector<PoincareVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    // Reduce before converting so that multiples of 360 degrees map exactly to 0.
    const double deg = std::fmod(k * step_deg, 360.0);
    out.push_back(great_circle_point(circle_index, deg * std::numbers::pi / 180.0));
  }
  return out;
}

nlohmann::json to_json(const SourceSpec& src) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& line : src.lines()) {
    const auto m = line.poincare();
    lines.push_back({{"wavelength_nm", line.wavelength_nm},
                     {"intensity", line.intensity},
                     {"poincare", {m.m1(), m.m2(), m.m3()}}});
  }
  return {{"lines", lines}};
}

SourceSpec source_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("lines") || !doc["lines"].is_array()) {
    throw ConfigError("lines", "source document needs a 'lines' array");
  }
  std::vector<SpectralLine> lines;
  for (std::size_t i = 0; i < doc["lines"].size(); ++i) {
    const auto& item = doc["lines"][i];
    const std::string path = "lines[" + std::to_string(i) + "]";
    try {
      const auto p = item.at("poincare").get<std::vector<double>>();
      if (p.size() != 3) throw ConfigError(path + ".poincare", "expected 3 components");
      lines.push_back({item.at("wavelength_nm").get<double>(), item.at("intensity").get<double>(),
                       density_from_poincare(PoincareVector(p[0], p[1], p[2]))});
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path, e.what());
    } catch (const InvalidState& e) {
      throw ConfigError(path, e.what());
    }
  }
  try {
    return SourceSpec(std::move(lines));
  } catch (const InvalidState& e) {
    throw ConfigError("lines", e.what());
  }
}

}  // namespace dopsim
