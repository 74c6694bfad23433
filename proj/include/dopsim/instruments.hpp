#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "dopsim/sources.hpp"

namespace dopsim {

/// Two walk-off compensated stages of identical type II crystals. The phase
/// matching acceptance scales inversely with the effective length and is
/// anchored at (reference_length_mm, reference_acceptance_nm).
struct CrystalStack {
  double element_length_mm = 3.0;
  int elements_per_stage = 4;
  int stages = 2;
  double reference_acceptance_nm = 4.5;
  double reference_length_mm = 12.0;

  void validate() const;
};

/// Walk-off fully compensated: element length times elements per stage.
double effective_length(const CrystalStack& stack);
double acceptance_bandwidth(const CrystalStack& stack);

/// Relative efficiency sinc^2(pi * dlambda / acceptance) of the undesired
/// degenerate conversion channel. Throws InvalidState when lambda1 == lambda2.
double degenerate_contamination(double lambda1_nm, double lambda2_nm, const CrystalStack& stack);

struct MeterConfig {
  CrystalStack stack{};
  double visibility = 0.96;
  /// Offset from the destructive-interference (singlet) setting.
  double stage_phase_rad = 0.0;
  double gain = 1.0;
  double dark_offset = 0.0;
  /// Relative std of the multiplicative noise on the pair signal V * p.
  double noise_sigma_rel = 0.156;
  double response_time_s = 1e-3;
  /// Pairs closer than this are hit by the degenerate channel.
  double min_separation_nm = 1.5;
  /// Pair-statistics factor k in (1 - DOP^2)/4 = k p. Derived from the line
  /// intensities when unset.
  std::optional<double> pair_normalization{};

  void validate() const;
};

struct PolarimeterConfig {
  double integration_time_s = 10.0;
  /// Relative std (w.r.t. mean S0) of the noise added to each Stokes channel.
  double noise_sigma_rel = 0.01;

  void validate() const;
};

/// Uniformly sampled sequence of beam snapshots. All snapshots share the same
/// spectral layout (line count and wavelengths).
class PolarizationTrace {
 public:
  PolarizationTrace(double dt_s, std::vector<SourceSpec> snapshots);
  /// `samples` copies of one source.
  static PolarizationTrace constant(const SourceSpec& src, std::size_t samples, double dt_s);

  double dt_s() const noexcept { return dt_s_; }
  std::size_t size() const noexcept { return snapshots_.size(); }
  const SourceSpec& operator[](std::size_t i) const { return snapshots_[i]; }
  const std::vector<SourceSpec>& snapshots() const noexcept { return snapshots_; }
  double duration_s() const { return dt_s_ * static_cast<double>(snapshots_.size()); }

 private:
  double dt_s_;
  std::vector<SourceSpec> snapshots_;
};

/// Parameters needed to invert readouts into DOP estimates.
struct MeterCalibration {
  double gain = 1.0;
  double dark_offset = 0.0;
  double visibility = 1.0;
  double pair_normalization = 0.5;

  friend bool operator==(const MeterCalibration&, const MeterCalibration&) = default;
};

nlohmann::json to_json(const MeterCalibration& cal);
MeterCalibration calibration_from_json(const nlohmann::json& doc);

/// k = 2 sum_{i<j} w_i w_j over normalized line intensities.
double pair_normalization(const SourceSpec& layout);

/// Calibration the meter would obtain for sources with this spectral layout.
MeterCalibration calibration_for(const MeterConfig& cfg, const SourceSpec& layout);

/// Noiseless effective pair probability p_eff of one (window-averaged)
/// snapshot: the I_i I_j weighted mean of the pair projection probabilities,
/// with the degenerate channel mixed in for pairs closer than
/// min_separation_nm. Throws InvalidState for a single-line source.
double pair_signal(const SourceSpec& snapshot, const MeterConfig& cfg);

/// gain [(1 - V)/2 + V p] + dark.
double ideal_readout(double pair_probability, const MeterConfig& cfg);

/// Readout per sample; each sample sees the line states averaged over the
/// response window ending at it.
std::vector<double> singlet_meter_raw(const PolarizationTrace& trace, const MeterConfig& cfg, std::uint64_t seed);

struct DopEstimate {
  double dop;
  /// Readout fell below the DOP = 1 floor and was clamped.
  bool below_floor;
};

/// Invert one readout (or the mean of several) into a DOP estimate.
DopEstimate estimate_dop(double readout, const MeterCalibration& cal);

std::vector<DopEstimate> singlet_meter_dop(const PolarizationTrace& trace, const MeterConfig& cfg,
                                           std::uint64_t seed);

/// Stokes vector of one snapshot (sum over lines).
StokesVector snapshot_stokes(const SourceSpec& snapshot);

/// DOP per complete integration window; a trailing partial window is dropped.
/// Throws InvalidState if the trace is shorter than one window.
std::vector<double> polarimeter_dop(const PolarizationTrace& trace, const PolarimeterConfig& cfg,
                                    std::uint64_t seed);

struct PairSamplingResult {
  std::size_t draws;
  double singlet_fraction;
  double standard_error;
  /// (1 - DOP^2)/4 of the mixed beam.
  double expected;
};

/// Draw photon pairs independently from the beam (line chosen with probability
/// proportional to intensity) and score each pair's projection onto the
/// singlet with its quantum probability.
PairSamplingResult sample_pair_singlet_fraction(const SourceSpec& src, std::size_t draws, std::uint64_t seed);

}  // namespace dopsim
