#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dopsim/channel.hpp"
#include "dopsim/config.hpp"

namespace dopsim {

/// Ordinary least-squares line y = slope x + intercept.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double max_abs_residual = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// ---- great-circle scan ---------------------------------------------------

struct ScanRecord {
  int circle;
  int base_index;
  double two_phi_deg;
  double true_dop;
  double one_minus_dop2;
  double readout_mean;
  /// Sample std over this point's readout samples.
  double readout_std;
  double dop_estimate;
  std::vector<double> readouts;
};

/// Statistics over every record sharing one 2phi value.
struct ScanGroup {
  double two_phi_deg;
  double true_dop;
  std::size_t repeats;
  double readout_mean;
  /// Std of the per-record mean readouts.
  double repeat_std;
  /// Std over all readout samples of the group, divided by the group mean.
  double sample_rel_std;
  double dop_estimate_mean;
  double dop_estimate_std;
};

struct ScanResult {
  std::vector<ScanRecord> records;
  /// Antipodal (2phi = 180 deg) measurements on the same circles and base states.
  std::vector<ScanRecord> depolarized_references;
  std::vector<ScanGroup> groups;
  ScanGroup depolarized_group;
  LinearFit fit;
  double predicted_slope;
  double predicted_intercept;
};

ScanResult run_fig2_scan(const ScenarioConfig& cfg);

// ---- fiber shaking -------------------------------------------------------

struct ShakeWindow {
  std::size_t source_index;
  double nominal_dop;
  std::size_t window;
  double t_start_s;
  double t_end_s;
  bool shaken;
  double singlet_dop;
  bool singlet_below_floor;
  double polarimeter_dop;
  /// angular_coverage of the first line's Poincare vector over the window.
  double coverage;
};

struct ShakeSeries {
  double nominal_dop;
  double two_phi_rad;
  std::vector<double> singlet;
  std::vector<double> polarimeter;
  /// Decimated fiber trajectory.
  std::vector<TrajectorySample> trajectory;
};

struct ShakeResult {
  std::vector<ShakeWindow> windows;
  std::vector<ShakeSeries> series;
  double window_s;
};

ShakeResult run_fig3_shake(const ScenarioConfig& cfg);

// ---- PMD sweep -----------------------------------------------------------

struct PmdRow {
  double dgd_ps;
  double source_dop;
  double meter_dop;
};

struct PmdResult {
  std::vector<PmdRow> rows;
  /// PSP axis parallel to the common polarization: rotations leave it fixed.
  bool degenerate_geometry;
  /// DGD at which the sidebands first rotate by pi, 1/(2 bitrate).
  double first_null_dgd_ps;
};

PmdResult run_pmd_sweep(const ScenarioConfig& cfg);

// ---- calibration ---------------------------------------------------------

struct CalibrationReport {
  double dark_readout;
  double polarized_readout;
  double depolarized_readout;
  MeterCalibration calibration;
};

/// Measure dark, DOP = 1 and orthogonal-line references with the configured
/// meter and solve for gain, dark offset and visibility.
CalibrationReport run_calibration(const ScenarioConfig& cfg);

// ---- output --------------------------------------------------------------

std::string scan_csv(const ScanResult& result);
nlohmann::json scan_summary(const ScanResult& result);
std::string shake_csv(const ShakeResult& result);
nlohmann::json shake_summary(const ShakeResult& result);
std::string pmd_csv(const PmdResult& result);
nlohmann::json pmd_summary(const PmdResult& result);

}  // namespace dopsim
