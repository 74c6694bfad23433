#include "dopsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "dopsim/errors.hpp"

namespace dopsim {

namespace {

using nlohmann::json;

// Typed access to one JSON object with path-qualified errors.
class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected a JSON object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return obj_.contains(key); }

  void read(const std::string& key, double& out) const {
    if (!has(key)) return;
    const auto& v = obj_[key];
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(field(key), "must be finite");
  }

  void read(const std::string& key, int& out) const {
    if (!has(key)) return;
    const auto& v = obj_[key];
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    out = v.get<int>();
  }

  void read(const std::string& key, std::uint64_t& out) const {
    if (!has(key)) return;
    const auto& v = obj_[key];
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      throw ConfigError(field(key), "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void read(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    if (!obj_[key].is_string()) throw ConfigError(field(key), "expected a string");
    out = obj_[key].get<std::string>();
  }

  void read(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    const auto& v = obj_[key];
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
  }

  template <std::size_t N>
  void read(const std::string& key, std::array<double, N>& out) const {
    if (!has(key)) return;
    std::vector<double> tmp;
    read(key, tmp);
    if (tmp.size() != N) throw ConfigError(field(key), "expected " + std::to_string(N) + " numbers");
    std::copy(tmp.begin(), tmp.end(), out.begin());
  }

  void read(const std::string& key, Vec3& out) const {
    std::array<double, 3> tmp{out.x, out.y, out.z};
    read(key, tmp);
    out = {tmp[0], tmp[1], tmp[2]};
  }

  std::optional<Reader> child(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return Reader(obj_[key], field(key));
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : obj_.items()) {
      if (!allowed.contains(item.key())) throw ConfigError(field(item.key()), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
};

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void check_unit(Vec3 v, const std::string& field) {
  require(std::abs(norm(v) - 1.0) <= kInputTol, field, "must be a unit vector");
}

template <typename F>
void wrap_invalid(const std::string& field, F&& f) {
  try {
    f();
  } catch (const InvalidState& e) {
    throw ConfigError(field, e.what());
  } catch (const UndefinedDirection& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Fig2Scan: return "fig2_scan";
    case ScenarioKind::Fig3Shake: return "fig3_shake";
    case ScenarioKind::PmdSweep: return "pmd_sweep";
  }
  return "unknown";
}

void ScenarioConfig::validate() const {
  require(dt_s > 0.0, "dt_s", "must be positive");
  require(duration_s >= dt_s, "duration_s", "must be at least dt_s");

  require(two_laser.lambda1_nm > 0.0, "source.lambda1_nm", "must be positive");
  require(two_laser.lambda2_nm > 0.0, "source.lambda2_nm", "must be positive");
  require(two_laser.lambda1_nm != two_laser.lambda2_nm, "source.lambda2_nm", "must differ from lambda1_nm");
  require(two_laser.i1 >= 0.0, "source.i1", "must be non-negative");
  require(two_laser.i2 >= 0.0, "source.i2", "must be non-negative");
  require(two_laser.i1 + two_laser.i2 > 0.0, "source.i2", "total intensity must be positive");

  require(carrier.carrier_nm > 0.0, "carrier.carrier_nm", "must be positive");
  require(carrier.bitrate_hz > 0.0, "carrier.bitrate_hz", "must be positive");
  for (double w : carrier.split) require(w >= 0.0, "carrier.split", "weights must be non-negative");
  require(carrier.split[0] + carrier.split[1] + carrier.split[2] > 0.0, "carrier.split", "needs a positive weight");
  check_unit(carrier.polarization, "carrier.poincare");

  const auto& fp = channel.process;
  require(fp.correlation_time_s > 0.0, "channel.correlation_time_s", "must be positive");
  require(fp.axis_diffusion >= 0.0, "channel.axis_diffusion", "must be non-negative");
  require(fp.retardance_sigma >= 0.0, "channel.retardance_sigma", "must be non-negative");
  wrap_invalid("channel", [&] { fp.validate(); });
  check_unit(channel.initial_axis, "channel.initial_axis");
  require(channel.ref_wavelength_nm > 0.0, "channel.ref_wavelength_nm", "must be positive");
  require(channel.shake_amplitude >= 0.0, "channel.shake_amplitude", "must be non-negative");

  require(meter.visibility >= 0.0 && meter.visibility <= 1.0, "meter.visibility", "must lie in [0, 1]");
  require(meter.gain > 0.0, "meter.gain", "must be positive");
  require(meter.noise_sigma_rel >= 0.0, "meter.noise_sigma_rel", "must be non-negative");
  require(meter.response_time_s > 0.0, "meter.response_time_s", "must be positive");
  require(meter.min_separation_nm >= 0.0, "meter.min_separation_nm", "must be non-negative");
  require(meter.stack.element_length_mm > 0.0, "meter.stack.element_length_mm", "must be positive");
  require(meter.stack.elements_per_stage >= 1, "meter.stack.elements_per_stage", "must be at least 1");
  wrap_invalid("meter", [&] { meter.validate(); });
  require(polarimeter.integration_time_s > 0.0, "polarimeter.integration_time_s", "must be positive");
  require(polarimeter.noise_sigma_rel >= 0.0, "polarimeter.noise_sigma_rel", "must be non-negative");
  wrap_invalid("polarimeter", [&] { polarimeter.validate(); });

  require(fig2.states_per_circle >= 1, "fig2.states_per_circle", "must be at least 1");
  require(fig2.two_phi_count >= 2, "fig2.two_phi_count", "must be at least 2 for a line fit");
  require(fig2.samples_per_point >= 1, "fig2.samples_per_point", "must be at least 1");
  require(std::isfinite(fig2.state_step_deg), "fig2.state_step_deg", "must be finite");
  require(fig2.two_phi_step_deg > 0.0, "fig2.two_phi_step_deg", "must be positive");

  require(!fig3.dops.empty(), "fig3.dops", "needs at least one DOP value");
  for (std::size_t i = 0; i < fig3.dops.size(); ++i) {
    const double d = fig3.dops[i];
    const double floor = std::abs(two_laser.i1 - two_laser.i2) / (two_laser.i1 + two_laser.i2);
    require(d >= floor - kInputTol && d <= 1.0, "fig3.dops[" + std::to_string(i) + "]",
            "not reachable with the configured laser intensities");
  }
  require(fig3.trajectory_stride >= 1, "fig3.trajectory_stride", "must be at least 1");
  const double windows = duration_s / polarimeter.integration_time_s;
  if (kind == ScenarioKind::Fig3Shake) {
    require(windows + 1e-9 >= 3.0, "duration_s", "fig3 needs at least three integration windows");
    require(polarimeter.integration_time_s >= dt_s, "polarimeter.integration_time_s", "must be at least dt_s");
  }

  require(!pmd.dgd_ps.empty(), "pmd.dgd_ps", "needs at least one value");
  for (double d : pmd.dgd_ps) require(d >= 0.0, "pmd.dgd_ps", "values must be non-negative");
  check_unit(pmd.psp_axis, "pmd.psp_axis");
  require(pmd.samples >= 1, "pmd.samples", "must be at least 1");
}

void ScenarioConfig::disable_noise() {
  meter.noise_sigma_rel = 0.0;
  polarimeter.noise_sigma_rel = 0.0;
}

ScenarioConfig parse_config(const json& doc) {
  ScenarioConfig cfg;
  const Reader root(doc, "");
  root.allow_only({"scenario", "seed", "duration_s", "dt_s", "source", "carrier", "channel", "meter",
                   "polarimeter", "fig2", "fig3", "pmd", "output"});

  if (root.has("scenario")) {
    std::string kind;
    root.read("scenario", kind);
    if (kind == "fig2_scan") cfg.kind = ScenarioKind::Fig2Scan;
    else if (kind == "fig3_shake") cfg.kind = ScenarioKind::Fig3Shake;
    else if (kind == "pmd_sweep") cfg.kind = ScenarioKind::PmdSweep;
    else throw ConfigError("scenario", "expected fig2_scan, fig3_shake or pmd_sweep");
  }
  if (root.has("seed")) {
    root.read("seed", cfg.seed);
    cfg.seed_given = true;
  }
  root.read("duration_s", cfg.duration_s);
  root.read("dt_s", cfg.dt_s);

  if (auto r = root.child("source")) {
    r->allow_only({"lambda1_nm", "lambda2_nm", "i1", "i2"});
    r->read("lambda1_nm", cfg.two_laser.lambda1_nm);
    r->read("lambda2_nm", cfg.two_laser.lambda2_nm);
    r->read("i1", cfg.two_laser.i1);
    r->read("i2", cfg.two_laser.i2);
  }
  if (auto r = root.child("carrier")) {
    r->allow_only({"carrier_nm", "bitrate_hz", "split", "poincare"});
    r->read("carrier_nm", cfg.carrier.carrier_nm);
    r->read("bitrate_hz", cfg.carrier.bitrate_hz);
    r->read("split", cfg.carrier.split);
    r->read("poincare", cfg.carrier.polarization);
  }
  if (auto r = root.child("channel")) {
    r->allow_only({"correlation_time_s", "axis_diffusion", "retardance_sigma", "retardance_mean", "initial_axis",
                   "ref_wavelength_nm", "shake_amplitude"});
    auto& p = cfg.channel.process;
    r->read("correlation_time_s", p.correlation_time_s);
    r->read("axis_diffusion", p.axis_diffusion);
    r->read("retardance_sigma", p.retardance_sigma);
    r->read("retardance_mean", p.retardance_mean);
    r->read("initial_axis", cfg.channel.initial_axis);
    r->read("ref_wavelength_nm", cfg.channel.ref_wavelength_nm);
    r->read("shake_amplitude", cfg.channel.shake_amplitude);
  }
  if (auto r = root.child("meter")) {
    r->allow_only({"visibility", "stage_phase_rad", "gain", "dark_offset", "noise_sigma_rel", "response_time_s",
                   "min_separation_nm", "pair_normalization", "stack"});
    auto& m = cfg.meter;
    r->read("visibility", m.visibility);
    r->read("stage_phase_rad", m.stage_phase_rad);
    r->read("gain", m.gain);
    r->read("dark_offset", m.dark_offset);
    r->read("noise_sigma_rel", m.noise_sigma_rel);
    r->read("response_time_s", m.response_time_s);
    r->read("min_separation_nm", m.min_separation_nm);
    if (r->has("pair_normalization")) {
      double k = 0.0;
      r->read("pair_normalization", k);
      m.pair_normalization = k;
    }
    if (auto s = r->child("stack")) {
      s->allow_only({"element_length_mm", "elements_per_stage", "reference_acceptance_nm", "reference_length_mm"});
      s->read("element_length_mm", m.stack.element_length_mm);
      s->read("elements_per_stage", m.stack.elements_per_stage);
      s->read("reference_acceptance_nm", m.stack.reference_acceptance_nm);
      s->read("reference_length_mm", m.stack.reference_length_mm);
    }
  }
  if (auto r = root.child("polarimeter")) {
    r->allow_only({"integration_time_s", "noise_sigma_rel"});
    r->read("integration_time_s", cfg.polarimeter.integration_time_s);
    r->read("noise_sigma_rel", cfg.polarimeter.noise_sigma_rel);
  }
  if (auto r = root.child("fig2")) {
    r->allow_only({"states_per_circle", "state_step_deg", "two_phi_count", "two_phi_step_deg", "samples_per_point"});
    r->read("states_per_circle", cfg.fig2.states_per_circle);
    r->read("state_step_deg", cfg.fig2.state_step_deg);
    r->read("two_phi_count", cfg.fig2.two_phi_count);
    r->read("two_phi_step_deg", cfg.fig2.two_phi_step_deg);
    r->read("samples_per_point", cfg.fig2.samples_per_point);
  }
  if (auto r = root.child("fig3")) {
    r->allow_only({"dops", "trajectory_stride"});
    r->read("dops", cfg.fig3.dops);
    r->read("trajectory_stride", cfg.fig3.trajectory_stride);
  }
  if (auto r = root.child("pmd")) {
    r->allow_only({"dgd_ps", "psp_axis", "samples"});
    r->read("dgd_ps", cfg.pmd.dgd_ps);
    r->read("psp_axis", cfg.pmd.psp_axis);
    r->read("samples", cfg.pmd.samples);
  }
  if (auto r = root.child("output")) {
    r->allow_only({"dir"});
    std::string dir = cfg.output_dir.string();
    r->read("dir", dir);
    cfg.output_dir = dir;
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace dopsim
