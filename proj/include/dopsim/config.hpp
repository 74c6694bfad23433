#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopsim/channel.hpp"
#include "dopsim/instruments.hpp"
#include "dopsim/sources.hpp"

namespace dopsim {

enum class ScenarioKind { Fig2Scan, Fig3Shake, PmdSweep };

std::string to_string(ScenarioKind kind);

struct TwoLaserParams {
  double lambda1_nm = 1552.0;
  double lambda2_nm = 1554.0;
  double i1 = 1.0;
  double i2 = 1.0;
};

struct CarrierParams {
  double carrier_nm = 1550.0;
  double bitrate_hz = 1e12;
  CarrierSplit split = kDefaultCarrierSplit;
  /// Common initial Poincare vector of all three lines.
  Vec3 polarization{0.0, 0.0, 1.0};
};

struct ChannelParams {
  FluctuationProcess process{};
  Vec3 initial_axis{0.0, 0.0, 1.0};
  double ref_wavelength_nm = 1550.0;
  /// Scales the shaking: axis step std and retardance std are multiplied by it.
  double shake_amplitude = 1.0;
};

struct Fig2Params {
  int states_per_circle = 5;
  double state_step_deg = 40.0;
  int two_phi_count = 10;
  double two_phi_step_deg = 10.0;
  int samples_per_point = 20;
};

struct Fig3Params {
  std::vector<double> dops{1.0, 0.87, 0.5};
  /// Every n-th fiber state is written to the trajectory CSV.
  int trajectory_stride = 10;
};

struct PmdParams {
  std::vector<double> dgd_ps{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
  Vec3 psp_axis{1.0, 0.0, 0.0};
  int samples = 20;
};

/// Everything needed to run one scenario. Scenarios are pure functions of
/// this value.
struct ScenarioConfig {
  std::optional<ScenarioKind> kind{};
  std::uint64_t seed = 1;
  bool seed_given = false;
  double duration_s = 100.0;
  double dt_s = 1e-3;
  TwoLaserParams two_laser{};
  CarrierParams carrier{};
  ChannelParams channel{};
  MeterConfig meter{};
  PolarimeterConfig polarimeter{};
  Fig2Params fig2{};
  Fig3Params fig3{};
  PmdParams pmd{};
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Zero both instruments' noise.
  void disable_noise();
};

/// Parse and validate. Unknown keys are rejected so that typos surface.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace dopsim
