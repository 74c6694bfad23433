#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dopsim/cli.hpp"

namespace fs = std::filesystem;
using dopsim::cli_main;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "dopsim_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

const std::string kConfigDir = DOPSIM_CONFIG_DIR;

}  // namespace

TEST_CASE("cli scan without noise fits a perfect line") {
  const auto dir = scratch("scan");
  const auto r = run({"scan", "--config", kConfigDir + "/fig2.json", "--noise", "off", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "scan_summary.json"));
  CHECK(summary["fit"]["r_squared"].get<double>() >= 1.0 - 1e-12);
  CHECK(summary["points"] == 150);
  CHECK(fs::exists(dir / "scan.csv"));
}

TEST_CASE("cli shake is reproducible for a fixed seed") {
  const auto dir = scratch("shake");
  const auto cfg = write_config(dir, "short.json", R"({
    "scenario": "fig3_shake", "duration_s": 15, "polarimeter": {"integration_time_s": 5}})");
  const auto a = dir / "a";
  const auto b = dir / "b";
  REQUIRE(run({"shake", "--config", cfg.string(), "--seed", "7", "--out", a.string()}).code == 0);
  REQUIRE(run({"shake", "--config", cfg.string(), "--seed", "7", "--out", b.string()}).code == 0);
  for (const char* f : {"shake.csv", "shake_singlet_0.csv", "shake_polarimeter_2.csv", "trajectory_1.csv"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto c = dir / "c";
  REQUIRE(run({"shake", "--config", cfg.string(), "--seed", "8", "--out", c.string()}).code == 0);
  CHECK(slurp(a / "shake.csv") != slurp(c / "shake.csv"));
}

TEST_CASE("cli seed precedence") {
  const auto dir = scratch("seed");
  const auto seeded = write_config(dir, "seeded.json", R"({"scenario": "fig2_scan", "seed": 5})");
  const auto bare = write_config(dir, "bare.json", R"({"scenario": "fig2_scan"})");
  auto csv = [&](const fs::path& cfg, std::vector<std::string> extra, const std::string& tag) {
    std::vector<std::string> args{"scan", "--config", cfg.string(), "--out", (dir / tag).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(run(args).code == 0);
    return slurp(dir / tag / "scan.csv");
  };
  const auto from_config = csv(seeded, {}, "a");
  CHECK(csv(seeded, {"--seed", "5"}, "b") == from_config);
  CHECK(csv(seeded, {"--seed", "6"}, "c") != from_config);
  CHECK(csv(bare, {"--seed", "5"}, "d") == from_config);
  ::setenv("DOPSIM_SEED", "5", 1);
  CHECK(csv(bare, {}, "e") == from_config);
  CHECK(csv(seeded, {"--seed", "6"}, "f") == csv(bare, {"--seed", "6"}, "g"));
  ::setenv("DOPSIM_SEED", "banana", 1);
  CHECK(run({"scan", "--config", bare.string(), "--out", (dir / "h").string()}).code == 2);
  ::unsetenv("DOPSIM_SEED");
}

TEST_CASE("cli config errors exit with code 2 and name the field") {
  const auto bad = run({"validate-config", kConfigDir + "/bad_visibility.json"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("meter.visibility") != std::string::npos);

  const auto dir = scratch("errors");
  const auto typo = write_config(dir, "typo.json", R"({"meter": {"gian": 2}})");
  const auto r = run({"validate-config", "--config", typo.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("meter.gian") != std::string::npos);

  const auto broken = write_config(dir, "broken.json", "{not json");
  CHECK(run({"validate-config", broken.string()}).code == 2);
  CHECK(run({"scan", "--config", (dir / "missing.json").string()}).code == 2);
  CHECK(run({"shake", "--config", kConfigDir + "/fig2.json"}).code == 2);
  CHECK(run({"scan", "--config", kConfigDir + "/fig2.json", "--noise", "loud"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"scan"}).code == 2);

  const auto ok = run({"validate-config", kConfigDir + "/fig3.json"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("fig3_shake") != std::string::npos);
}

TEST_CASE("cli pmd and calibrate") {
  const auto dir = scratch("pmd");
  REQUIRE(run({"pmd", "--config", kConfigDir + "/pmd.json", "--out", dir.string()}).code == 0);
  const auto pmd = slurp(dir / "pmd.csv");
  CHECK(pmd.rfind("dgd_ps,source_dop,meter_dop\n0,1,1\n", 0) == 0);
  CHECK(nlohmann::json::parse(slurp(dir / "pmd_summary.json"))["degenerate_geometry"] == false);

  const auto cal_dir = scratch("calibrate");
  const auto r = run({"calibrate", "--config", kConfigDir + "/calibrate.json", "--out", cal_dir.string()});
  REQUIRE(r.code == 0);
  const auto cal = nlohmann::json::parse(slurp(cal_dir / "calibration.json"));
  CHECK(cal["visibility"].get<double>() == doctest::Approx(0.93).epsilon(1e-12));
  CHECK(cal["gain"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("cli help") {
  const auto r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("validate-config") != std::string::npos);
}
