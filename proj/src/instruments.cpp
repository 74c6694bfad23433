#include "dopsim/instruments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dopsim/errors.hpp"
#include "dopsim/random.hpp"

namespace dopsim {

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

std::size_t window_samples(double window_s, double dt_s) {
  const double n = std::round(window_s / dt_s);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

// Prefix sums of I and I*M per line, so any window average is O(lines).
class WindowAverager {
 public:
  explicit WindowAverager(const PolarizationTrace& trace) : trace_(trace), lines_(trace[0].size()) {
    intensity_.assign((trace.size() + 1) * lines_, 0.0);
    moment_.assign((trace.size() + 1) * lines_, Vec3{});
    for (std::size_t t = 0; t < trace.size(); ++t) {
      for (std::size_t l = 0; l < lines_; ++l) {
        const auto& line = trace[t][l];
        intensity_[(t + 1) * lines_ + l] = intensity_[t * lines_ + l] + line.intensity;
        moment_[(t + 1) * lines_ + l] = moment_[t * lines_ + l] + line.intensity * line.poincare().vec();
      }
    }
  }

  // Average over samples [first, last].
  SourceSpec average(std::size_t first, std::size_t last) const {
    const double n = static_cast<double>(last - first + 1);
    std::vector<SpectralLine> lines;
    lines.reserve(lines_);
    for (std::size_t l = 0; l < lines_; ++l) {
      const double isum = intensity_[(last + 1) * lines_ + l] - intensity_[first * lines_ + l];
      const Vec3 msum = moment_[(last + 1) * lines_ + l] - moment_[first * lines_ + l];
      Vec3 m = isum > 0.0 ? (1.0 / isum) * msum : Vec3{};
      const double len = norm(m);
      if (len > 1.0) m = (1.0 / len) * m;
      lines.push_back({trace_[first][l].wavelength_nm, isum / n, density_from_poincare(PoincareVector(m))});
    }
    return SourceSpec(std::move(lines));
  }

 private:
  const PolarizationTrace& trace_;
  std::size_t lines_;
  std::vector<double> intensity_;
  std::vector<Vec3> moment_;
};

}  // namespace

void CrystalStack::validate() const {
  if (!(element_length_mm > 0.0)) throw InvalidState("crystal element length must be positive");
  if (elements_per_stage < 1) throw InvalidState("need at least one crystal per stage");
  if (stages != 2) throw InvalidState("the singlet projection uses exactly two stages");
  if (!(reference_acceptance_nm > 0.0) || !(reference_length_mm > 0.0)) {
    throw InvalidState("acceptance reference must be positive");
  }
}

double effective_length(const CrystalStack& stack) {
  stack.validate();
  return stack.element_length_mm * stack.elements_per_stage;
}

double acceptance_bandwidth(const CrystalStack& stack) {
  return stack.reference_acceptance_nm * (stack.reference_length_mm / effective_length(stack));
}

double degenerate_contamination(double lambda1_nm, double lambda2_nm, const CrystalStack& stack) {
  if (lambda1_nm == lambda2_nm) throw InvalidState("contamination needs distinct wavelengths");
  const double s = sinc(std::numbers::pi * std::abs(lambda1_nm - lambda2_nm) / acceptance_bandwidth(stack));
  return s * s;
}

void MeterConfig::validate() const {
  stack.validate();
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw InvalidState("visibility must lie in [0, 1]");
  if (!(gain > 0.0)) throw InvalidState("meter gain must be positive");
  if (!std::isfinite(dark_offset)) throw InvalidState("dark_offset must be finite");
  if (!std::isfinite(stage_phase_rad)) throw InvalidState("stage_phase_rad must be finite");
  if (!(noise_sigma_rel >= 0.0)) throw InvalidState("noise_sigma_rel must be non-negative");
  if (!(response_time_s > 0.0)) throw InvalidState("response_time_s must be positive");
  if (!(min_separation_nm >= 0.0)) throw InvalidState("min_separation_nm must be non-negative");
  if (pair_normalization && !(*pair_normalization > 0.0 && *pair_normalization <= 1.0)) {
    throw InvalidState("pair_normalization must lie in (0, 1]");
  }
}

void PolarimeterConfig::validate() const {
  if (!(integration_time_s > 0.0)) throw InvalidState("integration_time_s must be positive");
  if (!(noise_sigma_rel >= 0.0)) throw InvalidState("polarimeter noise_sigma_rel must be non-negative");
}

PolarizationTrace::PolarizationTrace(double dt_s, std::vector<SourceSpec> snapshots)
    : dt_s_(dt_s), snapshots_(std::move(snapshots)) {
  if (!(dt_s > 0.0)) throw InvalidState("trace spacing must be positive");
  if (snapshots_.empty()) throw InvalidState("trace is empty");
  const auto& first = snapshots_.front();
  for (const auto& snap : snapshots_) {
    if (snap.size() != first.size()) throw InvalidState("trace snapshots differ in line count");
    for (std::size_t l = 0; l < snap.size(); ++l) {
      if (snap[l].wavelength_nm != first[l].wavelength_nm) {
        throw InvalidState("trace snapshots differ in line wavelengths");
      }
    }
  }
}

PolarizationTrace PolarizationTrace::constant(const SourceSpec& src, std::size_t samples, double dt_s) {
  return PolarizationTrace(dt_s, std::vector<SourceSpec>(samples, src));
}

nlohmann::json to_json(const MeterCalibration& cal) {
  return {{"gain", cal.gain},
          {"dark_offset", cal.dark_offset},
          {"visibility", cal.visibility},
          {"pair_normalization", cal.pair_normalization}};
}

MeterCalibration calibration_from_json(const nlohmann::json& doc) {
  MeterCalibration cal;
  try {
    cal.gain = doc.at("gain").get<double>();
    cal.dark_offset = doc.at("dark_offset").get<double>();
    cal.visibility = doc.at("visibility").get<double>();
    cal.pair_normalization = doc.value("pair_normalization", 0.5);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("calibration", e.what());
  }
  if (!(cal.gain > 0.0)) throw ConfigError("calibration.gain", "must be positive");
  if (!(cal.visibility > 0.0 && cal.visibility <= 1.0)) throw ConfigError("calibration.visibility", "must lie in (0, 1]");
  return cal;
}

double pair_normalization(const SourceSpec& layout) {
  const double total = layout.total_intensity();
  double acc = 0.0;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    for (std::size_t j = i + 1; j < layout.size(); ++j) {
      acc += (layout[i].intensity / total) * (layout[j].intensity / total);
    }
  }
  return 2.0 * acc;
}

MeterCalibration calibration_for(const MeterConfig& cfg, const SourceSpec& layout) {
  cfg.validate();
  return {cfg.gain, cfg.dark_offset, cfg.visibility, cfg.pair_normalization.value_or(pair_normalization(layout))};
}

double pair_signal(const SourceSpec& snapshot, const MeterConfig& cfg) {
  if (snapshot.size() < 2) throw InvalidState("singlet meter needs at least two spectral lines");
  const bool phased = cfg.stage_phase_rad != 0.0;
  const std::optional<TwoPhotonOperator> projector =
      phased ? std::optional(phased_pair_projector(cfg.stage_phase_rad)) : std::nullopt;
  double weight_sum = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < snapshot.size(); ++i) {
    for (std::size_t j = i + 1; j < snapshot.size(); ++j) {
      const auto& a = snapshot[i];
      const auto& b = snapshot[j];
      const double w = a.intensity * b.intensity;
      if (w == 0.0) continue;
      double p = phased ? brute_force_trace(a.polarization, b.polarization, *projector)
                        : singlet_probability(a.polarization, b.polarization);
      if (std::abs(b.wavelength_nm - a.wavelength_nm) < cfg.min_separation_nm) {
        // The degenerate channel converts polarization-blind, like a fully mixed pair.
        const double c = degenerate_contamination(a.wavelength_nm, b.wavelength_nm, cfg.stack);
        p = (1.0 - c) * p + 0.25 * c;
      }
      weight_sum += w;
      acc += w * p;
    }
  }
  return weight_sum > 0.0 ? acc / weight_sum : 0.0;
}

double ideal_readout(double pair_probability, const MeterConfig& cfg) {
  return cfg.gain * (0.5 * (1.0 - cfg.visibility) + cfg.visibility * pair_probability) + cfg.dark_offset;
}

std::vector<double> singlet_meter_raw(const PolarizationTrace& trace, const MeterConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (trace[0].size() < 2) throw InvalidState("singlet meter needs at least two spectral lines");
  const std::size_t window = window_samples(cfg.response_time_s, trace.dt_s());
  std::optional<WindowAverager> averager;
  if (window > 1) averager.emplace(trace);
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const std::size_t first = t + 1 >= window ? t + 1 - window : 0;
    const double p = window == 1 ? pair_signal(trace[t], cfg) : pair_signal(averager->average(first, t), cfg);
    const double noise = cfg.noise_sigma_rel > 0.0 ? cfg.noise_sigma_rel * rng.normal() : 0.0;
    out.push_back(cfg.gain * (0.5 * (1.0 - cfg.visibility) + cfg.visibility * p * (1.0 + noise)) +
                  cfg.dark_offset);
  }
  return out;
}

DopEstimate estimate_dop(double readout, const MeterCalibration& cal) {
  if (!(cal.visibility > 0.0) || !(cal.gain > 0.0)) {
    throw NumericalError("meter calibration with zero gain or visibility cannot be inverted");
  }
  if (!std::isfinite(readout)) throw NumericalError("non-finite meter readout");
  const double floor = cal.dark_offset + 0.5 * cal.gain * (1.0 - cal.visibility);
  if (readout < floor - kExactTol * std::max(1.0, std::abs(floor))) return {1.0, true};
  const double p = ((readout - cal.dark_offset) / cal.gain - 0.5 * (1.0 - cal.visibility)) / cal.visibility;
  const double dop2 = 1.0 - 4.0 * cal.pair_normalization * p;
  return {std::clamp(std::sqrt(std::max(0.0, dop2)), 0.0, 1.0), false};
}

std::vector<DopEstimate> singlet_meter_dop(const PolarizationTrace& trace, const MeterConfig& cfg,
                                           std::uint64_t seed) {
  const auto cal = calibration_for(cfg, trace[0]);
  const auto raw = singlet_meter_raw(trace, cfg, seed);
  std::vector<DopEstimate> out;
  out.reserve(raw.size());
  for (double r : raw) out.push_back(estimate_dop(r, cal));
  return out;
}

StokesVector snapshot_stokes(const SourceSpec& snapshot) { return snapshot.stokes(); }

std::vector<double> polarimeter_dop(const PolarizationTrace& trace, const PolarimeterConfig& cfg,
                                    std::uint64_t seed) {
  cfg.validate();
  const std::size_t window = window_samples(cfg.integration_time_s, trace.dt_s());
  if (window > trace.size()) throw InvalidState("trace is shorter than one polarimeter integration window");
  Rng rng(seed);
  std::vector<double> out;
  for (std::size_t start = 0; start + window <= trace.size(); start += window) {
    double s0 = 0.0;
    Vec3 s{};
    for (std::size_t t = start; t < start + window; ++t) {
      const auto st = snapshot_stokes(trace[t]);
      s0 += st.s0();
      s = s + st.polarized_part();
    }
    const double n = static_cast<double>(window);
    s0 /= n;
    s = (1.0 / n) * s;
    if (cfg.noise_sigma_rel > 0.0) {
      const double scale = cfg.noise_sigma_rel * s0;
      s0 += scale * rng.normal();
      s = s + Vec3{scale * rng.normal(), scale * rng.normal(), scale * rng.normal()};
    }
    if (!(s0 > 0.0)) throw NumericalError("polarimeter S0 is not positive after noise");
    out.push_back(std::clamp(norm(s) / s0, 0.0, 1.0));
  }
  return out;
}

}  // namespace dopsim
