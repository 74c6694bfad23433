#include "dopsim/cli.hpp"

#include <cstdlib>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "dopsim/config.hpp"
#include "dopsim/errors.hpp"
#include "dopsim/output.hpp"
#include "dopsim/scenarios.hpp"

namespace dopsim {

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string noise = "on";
  std::uint64_t seed = 0;
  bool seed_given = false;
};

std::uint64_t env_seed() {
  const char* v = std::getenv("DOPSIM_SEED");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (end == nullptr || *end != '\0') throw ConfigError("DOPSIM_SEED", "expected a non-negative integer");
  return s;
}

ScenarioConfig prepare(const Options& opt, std::optional<ScenarioKind> kind) {
  ScenarioConfig cfg = load_config(opt.config);
  if (kind) {
    if (cfg.kind && *cfg.kind != *kind) {
      throw ConfigError("scenario", "config is for " + to_string(*cfg.kind) + ", not " + to_string(*kind));
    }
    cfg.kind = kind;
  }
  if (opt.seed_given) cfg.seed = opt.seed;
  else if (!cfg.seed_given) cfg.seed = env_seed();
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.noise == "off") cfg.disable_noise();
  cfg.validate();
  return cfg;
}

void run_scan(const ScenarioConfig& cfg, std::ostream& out) {
  const auto result = run_fig2_scan(cfg);
  write_text_file(cfg.output_dir / "scan.csv", scan_csv(result));
  const auto summary = scan_summary(result);
  write_json_file(cfg.output_dir / "scan_summary.json", summary);
  out << "scan: " << result.records.size() << " points, R^2 = " << format_number(result.fit.r_squared)
      << ", slope = " << format_number(result.fit.slope) << ", intercept = " << format_number(result.fit.intercept)
      << '\n';
}

void run_shake(const ScenarioConfig& cfg, std::ostream& out) {
  const auto result = run_fig3_shake(cfg);
  write_text_file(cfg.output_dir / "shake.csv", shake_csv(result));
  write_json_file(cfg.output_dir / "shake_summary.json", shake_summary(result));
  for (std::size_t k = 0; k < result.series.size(); ++k) {
    const auto& s = result.series[k];
    const std::string tag = std::to_string(k);
    std::ostringstream singlet, polarimeter, trajectory;
    write_series_csv(singlet, s.singlet, result.window_s);
    write_series_csv(polarimeter, s.polarimeter, result.window_s);
    write_trajectory_csv(trajectory, s.trajectory);
    write_text_file(cfg.output_dir / ("shake_singlet_" + tag + ".csv"), singlet.str());
    write_text_file(cfg.output_dir / ("shake_polarimeter_" + tag + ".csv"), polarimeter.str());
    write_text_file(cfg.output_dir / ("trajectory_" + tag + ".csv"), trajectory.str());
  }
  out << "shake: " << result.series.size() << " sources, " << result.windows.size() << " windows\n";
}

void run_pmd(const ScenarioConfig& cfg, std::ostream& out) {
  const auto result = run_pmd_sweep(cfg);
  write_text_file(cfg.output_dir / "pmd.csv", pmd_csv(result));
  write_json_file(cfg.output_dir / "pmd_summary.json", pmd_summary(result));
  out << "pmd: " << result.rows.size() << " DGD values" << (result.degenerate_geometry ? " (degenerate geometry)" : "")
      << '\n';
}

void run_calibrate(const ScenarioConfig& cfg, std::ostream& out) {
  const auto rep = run_calibration(cfg);
  nlohmann::json doc = to_json(rep.calibration);
  write_json_file(cfg.output_dir / "calibration.json", doc);
  out << doc.dump() << '\n';
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Degree-of-polarization measurement simulator", "dopsim"};
  app.require_subcommand(1);
  Options opt;

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Scenario JSON file")->required();
    sub->add_option("--out", opt.out, "Output directory (overrides output.dir)");
    sub->add_option("--noise", opt.noise, "Instrument noise")->check(CLI::IsMember({"on", "off"}));
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { opt.seed = s; opt.seed_given = true; }, "Root seed");
  };
  auto* scan = app.add_subcommand("scan", "Great-circle scan of the singlet meter response");
  auto* shake = app.add_subcommand("shake", "Shaken-fiber comparison of singlet meter and polarimeter");
  auto* pmd = app.add_subcommand("pmd", "DOP of a modulated carrier versus differential group delay");
  auto* calibrate = app.add_subcommand("calibrate", "Derive a meter calibration from reference measurements");
  for (auto* sub : {scan, shake, pmd, calibrate}) add_run_options(sub);
  auto* validate = app.add_subcommand("validate-config", "Check a scenario config and report the first error");
  std::string validate_path;
  validate->add_option("path", validate_path, "Scenario JSON file");
  validate->add_option("--config", opt.config, "Scenario JSON file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*validate) {
      if (opt.config.empty()) opt.config = validate_path;
      if (opt.config.empty()) throw ConfigError("<file>", "no config file given");
      const auto cfg = load_config(opt.config);
      out << "ok: " << opt.config << (cfg.kind ? " (" + to_string(*cfg.kind) + ")" : "") << '\n';
    } else if (*scan) {
      run_scan(prepare(opt, ScenarioKind::Fig2Scan), out);
    } else if (*shake) {
      run_shake(prepare(opt, ScenarioKind::Fig3Shake), out);
    } else if (*pmd) {
      run_pmd(prepare(opt, ScenarioKind::PmdSweep), out);
    } else if (*calibrate) {
      run_calibrate(prepare(opt, std::nullopt), out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace dopsim
