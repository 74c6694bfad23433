#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "dopsim/channel.hpp"
#include "dopsim/errors.hpp"
#include "dopsim/instruments.hpp"
#include "dopsim/output.hpp"
#include "dopsim/scenarios.hpp"
#include "oracles.hpp"

using namespace dopsim;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

MeterConfig ideal_meter() {
  MeterConfig cfg;
  cfg.visibility = 1.0;
  cfg.noise_sigma_rel = 0.0;
  cfg.dark_offset = 0.0;
  cfg.gain = 1.0;
  return cfg;
}

SourceSpec pair_at(double two_phi, double i1 = 1, double i2 = 1) {
  return two_laser_source(1552, 1554, i1, i2, great_circle_point(0, 0), great_circle_point(0, two_phi));
}

// Rotate every line by exactly the same angle.
SourceSpec rigid_rotation(const SourceSpec& src, Vec3 axis, double angle) {
  std::vector<SpectralLine> lines;
  for (const auto& l : src.lines()) {
    lines.push_back({l.wavelength_nm, l.intensity, density_from_poincare(rotate_poincare(l.poincare(), axis, angle))});
  }
  return SourceSpec(lines);
}

}  // namespace

TEST_CASE("crystal stack acceptance arithmetic") {
  CrystalStack s;
  CHECK(effective_length(s) == 12.0);
  CHECK(acceptance_bandwidth(s) == 4.5);
  s.elements_per_stage = 1;
  CHECK(effective_length(s) == 3.0);
  CHECK(acceptance_bandwidth(s) == 18.0);
  s.elements_per_stage = 8;
  CHECK(effective_length(s) == 24.0);
  CHECK(acceptance_bandwidth(s) == 2.25);
  s.stages = 3;
  CHECK_THROWS_AS(effective_length(s), InvalidState);
}

TEST_CASE("degenerate contamination follows sinc^2") {
  const CrystalStack s;
  const double two = degenerate_contamination(1552, 1554, s);
  // sinc^2(pi * 2 / 4.5) = 0.497471504...
  CHECK(two == Approx(0.4974715041083516).epsilon(1e-12));
  CHECK(two > 0.0);
  CHECK(two < 0.5);
  CHECK(degenerate_contamination(1540, 1560, s) < 0.01);
  CHECK(degenerate_contamination(1552, 1552 + 1e-9, s) == Approx(1.0).epsilon(1e-12));
  CHECK(degenerate_contamination(1554, 1552, s) == two);
  CHECK_THROWS_AS(degenerate_contamination(1552, 1552, s), InvalidState);
}

TEST_CASE("pair normalization") {
  CHECK(pair_normalization(pair_at(0)) == 0.5);
  CHECK(pair_normalization(pair_at(0, 3, 1)) == Approx(0.375));
  const PoincareVector z(0, 0, 1);
  CHECK(pair_normalization(modulated_carrier_source(1550, 1e12, z, z, z)) == Approx(2 * (0.125 + 0.0625 + 0.125)));
}

TEST_CASE("singlet_meter_raw forward model") {
  SUBCASE("perfect destructive interference for DOP 1") {
    const auto trace = PolarizationTrace::constant(pair_at(0), 10, 1e-3);
    for (double r : singlet_meter_raw(trace, ideal_meter(), 1)) CHECK(std::abs(r) < 1e-15);
  }
  SUBCASE("orthogonal equal lines read 1/2") {
    const auto trace = PolarizationTrace::constant(pair_at(kPi), 10, 1e-3);
    for (double r : singlet_meter_raw(trace, ideal_meter(), 1)) CHECK(r == Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("visibility residual") {
    auto cfg = ideal_meter();
    cfg.visibility = 0.96;
    const auto trace = PolarizationTrace::constant(pair_at(0), 10, 1e-3);
    for (double r : singlet_meter_raw(trace, cfg, 1)) CHECK(r == Approx(0.02).epsilon(1e-12));
  }
  SUBCASE("gain and dark offset") {
    auto cfg = ideal_meter();
    cfg.gain = 3.0;
    cfg.dark_offset = 0.1;
    cfg.visibility = 0.9;
    const auto src = pair_at(kPi / 2);
    // p = (1 - cos 90)/4 = 1/4
    const double expected = 3.0 * (0.05 + 0.9 * 0.25) + 0.1;
    for (double r : singlet_meter_raw(PolarizationTrace::constant(src, 3, 1e-3), cfg, 1)) {
      CHECK(r == Approx(expected).epsilon(1e-14));
    }
  }
  SUBCASE("errors") {
    const SourceSpec single({{1552, 1, density_from_poincare({0, 0, 1})}});
    CHECK_THROWS_AS(singlet_meter_raw(PolarizationTrace::constant(single, 2, 1e-3), ideal_meter(), 1), InvalidState);
    CHECK_THROWS_AS(PolarizationTrace(1e-3, {}), InvalidState);
    CHECK_THROWS_AS(PolarizationTrace(0.0, {pair_at(0)}), InvalidState);
    CHECK_THROWS_AS(PolarizationTrace(1e-3, {pair_at(0), two_laser_source(1550, 1554, 1, 1, {0, 0, 1}, {0, 0, 1})}),
                    InvalidState);
  }
}

TEST_CASE("closely spaced lines pick up the degenerate channel") {
  auto cfg = ideal_meter();
  const auto close = two_laser_source(1552, 1553, 1, 1, {0, 0, 1}, {0, 0, 1});
  const double c = degenerate_contamination(1552, 1553, cfg.stack);
  const auto r = singlet_meter_raw(PolarizationTrace::constant(close, 1, 1e-3), cfg, 1);
  CHECK(r[0] == Approx(0.25 * c).epsilon(1e-14));
  cfg.min_separation_nm = 0.5;
  CHECK(std::abs(singlet_meter_raw(PolarizationTrace::constant(close, 1, 1e-3), cfg, 1)[0]) < 1e-15);
}

TEST_CASE("stage phase offset projects away from the singlet") {
  auto cfg = ideal_meter();
  cfg.stage_phase_rad = kPi;
  const auto diag = two_laser_source(1552, 1554, 1, 1, {1, 0, 0}, {1, 0, 0});
  CHECK(pair_signal(diag, cfg) == Approx(0.5));
  const auto hv = two_laser_source(1552, 1554, 1, 1, {0, 0, 1}, {0, 0, -1});
  CHECK(pair_signal(hv, cfg) == Approx(0.5));
  cfg.stage_phase_rad = 0.0;
  CHECK(std::abs(pair_signal(diag, cfg)) < 1e-15);
}

TEST_CASE("response window averages the line states") {
  // Both lines flip H <-> V every sample: instantaneously co-polarized, but
  // mixed over a two-sample window.
  std::vector<SourceSpec> snaps;
  for (int i = 0; i < 8; ++i) {
    const PoincareVector m(0, 0, i % 2 ? -1.0 : 1.0);
    snaps.push_back(two_laser_source(1552, 1554, 1, 1, m, m));
  }
  const PolarizationTrace trace(1e-3, snaps);
  auto cfg = ideal_meter();
  cfg.response_time_s = 1e-3;
  for (double r : singlet_meter_raw(trace, cfg, 1)) CHECK(std::abs(r) < 1e-15);
  cfg.response_time_s = 2e-3;
  const auto r = singlet_meter_raw(trace, cfg, 1);
  CHECK(std::abs(r[0]) < 1e-15);  // window truncated at the start
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] == Approx(0.25).epsilon(1e-14));
}

TEST_CASE("singlet_meter_dop inverts the forward model") {
  const auto src = pair_at(kPi / 2);
  const auto est = singlet_meter_dop(PolarizationTrace::constant(src, 5, 1e-3), ideal_meter(), 1);
  for (const auto& e : est) {
    CHECK(std::abs(e.dop - std::sqrt(0.5)) < 1e-9);
    CHECK_FALSE(e.below_floor);
  }

  Rng rng(81);
  for (int i = 0; i < 300; ++i) {
    MeterConfig cfg;
    cfg.noise_sigma_rel = 0.0;
    cfg.visibility = 0.5 + 0.5 * rng.uniform();
    cfg.gain = 0.1 + 5 * rng.uniform();
    cfg.dark_offset = rng.uniform() - 0.5;
    const bool three = i % 2 == 1;
    std::vector<SpectralLine> lines;
    for (int l = 0; l < (three ? 3 : 2); ++l) {
      lines.push_back({1550.0 + 2.0 * l, 0.1 + rng.uniform(), density_from_poincare(PoincareVector(oracle::random_unit(rng)))});
    }
    const SourceSpec s(lines);
    const auto e = singlet_meter_dop(PolarizationTrace::constant(s, 1, 1e-3), cfg, 1);
    CHECK(std::abs(e[0].dop - source_dop(s)) < 1e-9);
  }
}

TEST_CASE("estimate_dop edge cases") {
  const MeterCalibration cal{1.0, 0.1, 0.96, 0.5};
  const auto at_dark = estimate_dop(0.1, cal);
  CHECK(at_dark.dop == 1.0);
  CHECK(at_dark.below_floor);
  const auto at_floor = estimate_dop(0.1 + 0.02, cal);
  CHECK(at_floor.dop == Approx(1.0));
  CHECK_FALSE(at_floor.below_floor);
  CHECK(estimate_dop(0.1 + 0.5, cal).dop == Approx(0.0).epsilon(1e-7));
  CHECK(estimate_dop(5.0, cal).dop == 0.0);
  const MeterCalibration perfect{1.0, 0.0, 1.0, 0.5};
  CHECK(estimate_dop(0.0, perfect).dop == 1.0);
  CHECK_FALSE(estimate_dop(0.0, perfect).below_floor);
  CHECK_THROWS_AS(estimate_dop(0.3, MeterCalibration{1.0, 0.0, 0.0, 0.5}), NumericalError);
  CHECK_THROWS_AS(estimate_dop(std::nan(""), perfect), NumericalError);
}

TEST_CASE("scrambled trace with a preserved angle gives a constant estimate") {
  Rng rng(83);
  const auto src = pair_at(kPi / 3);
  std::vector<SourceSpec> snaps;
  for (int i = 0; i < 500; ++i) snaps.push_back(rigid_rotation(src, oracle::random_unit(rng), 2 * kPi * rng.uniform()));
  const PolarizationTrace trace(1e-3, snaps);
  const double expected = source_dop(src);
  for (const auto& e : singlet_meter_dop(trace, ideal_meter(), 1)) CHECK(std::abs(e.dop - expected) < 1e-6);
}

TEST_CASE("readout is independent of the absolute polarization") {
  Rng rng(89);
  for (int i = 0; i < 100; ++i) {
    const auto src = two_laser_source(1552, 1554, 0.5 + rng.uniform(), 0.5 + rng.uniform(),
                                      PoincareVector(oracle::random_unit(rng)), PoincareVector(oracle::random_unit(rng)));
    const Vec3 axis = oracle::random_unit(rng);
    const double angle = 2 * kPi * rng.uniform();
    MeterConfig cfg;
    cfg.noise_sigma_rel = 0.0;
    const double a = singlet_meter_raw(PolarizationTrace::constant(src, 1, 1e-3), cfg, 1)[0];
    const double b = singlet_meter_raw(PolarizationTrace::constant(rigid_rotation(src, axis, angle), 1, 1e-3), cfg, 1)[0];
    CHECK(std::abs(a - b) < 1e-12);
  }
}

TEST_CASE("readout is affine in 1 - DOP^2 for a fixed spectral layout") {
  Rng rng(97);
  const double i1 = 0.7;
  const double i2 = 1.3;
  std::vector<double> x, y;
  for (int i = 0; i < 200; ++i) {
    const auto src = two_laser_source(1552, 1554, i1, i2, PoincareVector(oracle::random_unit(rng)),
                                      PoincareVector(oracle::random_unit(rng)));
    const double d = source_dop(src);
    x.push_back(1 - d * d);
    y.push_back(singlet_meter_raw(PolarizationTrace::constant(src, 1, 1e-3), ideal_meter(), 1)[0]);
  }
  const auto fit = fit_line(x, y);
  CHECK(fit.max_abs_residual / fit.slope < 1e-9);
  CHECK(fit.slope == Approx(1.0 / (4 * pair_normalization(pair_at(0, i1, i2)))).epsilon(1e-12));
}

TEST_CASE("noise is reproducible and multiplicative on the pair term") {
  MeterConfig cfg;
  cfg.noise_sigma_rel = 0.2;
  const auto trace = PolarizationTrace::constant(pair_at(kPi), 20000, 1e-3);
  const auto a = singlet_meter_raw(trace, cfg, 7);
  const auto b = singlet_meter_raw(trace, cfg, 7);
  CHECK(a == b);
  CHECK(a != singlet_meter_raw(trace, cfg, 8));
  double m = 0, m2 = 0;
  for (double r : a) {
    m += r;
    m2 += r * r;
  }
  m /= a.size();
  const double sd = std::sqrt(m2 / a.size() - m * m);
  CHECK(m == Approx(0.5).epsilon(0.01));
  CHECK(sd == Approx(0.96 * 0.5 * 0.2).epsilon(0.03));
  // No pair signal, no noise.
  for (double r : singlet_meter_raw(PolarizationTrace::constant(pair_at(0), 100, 1e-3), cfg, 7)) {
    CHECK(r == Approx(0.02).epsilon(1e-12));
  }
}

TEST_CASE("polarimeter_dop") {
  PolarimeterConfig cfg;
  cfg.integration_time_s = 0.01;
  cfg.noise_sigma_rel = 0.0;

  const auto src = pair_at(kPi / 2, 2, 1);
  const auto stat = polarimeter_dop(PolarizationTrace::constant(src, 25, 1e-3), cfg, 1);
  REQUIRE(stat.size() == 2);
  CHECK(stat[0] == Approx(source_dop(src)).epsilon(1e-14));
  CHECK(stat[0] == stat[1]);

  // Pure state sweeping a great circle evenly inside each window.
  std::vector<SourceSpec> snaps;
  for (int i = 0; i < 20; ++i) {
    const auto m = great_circle_point(1, 2 * kPi * i / 10.0);
    snaps.push_back(two_laser_source(1552, 1554, 1, 1, m, m));
  }
  const auto swept = polarimeter_dop(PolarizationTrace(1e-3, snaps), cfg, 1);
  REQUIRE(swept.size() == 2);
  CHECK(swept[0] < 1e-14);

  CHECK_THROWS_AS(polarimeter_dop(PolarizationTrace::constant(src, 5, 1e-3), cfg, 1), InvalidState);

  cfg.noise_sigma_rel = 0.01;
  const auto noisy = polarimeter_dop(PolarizationTrace::constant(src, 10000, 1e-3), cfg, 3);
  CHECK(noisy == polarimeter_dop(PolarizationTrace::constant(src, 10000, 1e-3), cfg, 3));
  for (double d : noisy) CHECK(d == Approx(source_dop(src)).epsilon(0.05));
}

TEST_CASE("time-averaged Stokes never exceed the instantaneous DOP") {
  Rng rng(101);
  PolarimeterConfig pcfg;
  pcfg.integration_time_s = 0.05;
  pcfg.noise_sigma_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto src = pair_at(kPi * rng.uniform(), 0.5 + rng.uniform(), 0.5 + rng.uniform());
    std::vector<SourceSpec> snaps;
    Vec3 axis = oracle::random_unit(rng);
    double angle = 0.0;
    for (int i = 0; i < 200; ++i) {
      angle += 0.3 * rng.normal();
      snaps.push_back(rigid_rotation(src, axis, angle));
    }
    const PolarizationTrace trace(1e-3, snaps);
    const auto pol = polarimeter_dop(trace, pcfg, 1);
    const auto meter = singlet_meter_dop(trace, ideal_meter(), 1);
    for (std::size_t w = 0; w < pol.size(); ++w) {
      for (std::size_t t = w * 50; t < (w + 1) * 50; ++t) CHECK(pol[w] <= meter[t].dop + 1e-9);
    }
  }
}

TEST_CASE("Monte-Carlo pair sampling reproduces (1 - DOP^2)/4") {
  const auto src = pair_at(2 * kPi / 3, 1.0, 2.0);
  const auto res = sample_pair_singlet_fraction(src, 200000, 11);
  const double d = source_dop(src);
  CHECK(res.expected == Approx(0.25 * (1 - d * d)).epsilon(1e-14));
  CHECK(std::abs(res.singlet_fraction - res.expected) < 3 * res.standard_error);
  CHECK(sample_pair_singlet_fraction(src, 1000, 5).singlet_fraction ==
        sample_pair_singlet_fraction(src, 1000, 5).singlet_fraction);
  CHECK(sample_pair_singlet_fraction(pair_at(0), 10000, 5).singlet_fraction == 0.0);
  CHECK_THROWS_AS(sample_pair_singlet_fraction(src, 0, 5), InvalidState);
}

TEST_CASE("calibration record JSON") {
  const MeterCalibration cal{2.5, 0.01, 0.96, 0.375};
  const auto back = calibration_from_json(nlohmann::json::parse(to_json(cal).dump()));
  CHECK(back == cal);
  CHECK_THROWS_AS(calibration_from_json(nlohmann::json::parse(R"({"gain": 1})")), ConfigError);
  CHECK_THROWS_AS(calibration_from_json(nlohmann::json::parse(R"({"gain": -1, "dark_offset": 0, "visibility": 1})")),
                  ConfigError);
}

TEST_CASE("series CSV") {
  std::ostringstream out;
  const std::vector<double> v{0.5, 1.0 / 3.0};
  write_series_csv(out, v, 10.0);
  CHECK(out.str() == "time_s,value\n0,0.5\n10,0.333333333333\n");
}
