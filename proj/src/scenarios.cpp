#include "dopsim/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "dopsim/errors.hpp"
#include "dopsim/output.hpp"
#include "dopsim/random.hpp"

namespace dopsim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
// Stream offset for the depolarized references of the scan.
constexpr std::uint64_t kReferenceStream = 1'000'000;

double mean_of(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

ScanRecord measure_static(const SourceSpec& src, const ScenarioConfig& cfg, int samples, std::uint64_t seed) {
  const auto trace = PolarizationTrace::constant(src, static_cast<std::size_t>(samples), cfg.dt_s);
  auto readouts = singlet_meter_raw(trace, cfg.meter, seed);
  const double d = source_dop(src);
  ScanRecord rec{};
  rec.true_dop = d;
  rec.one_minus_dop2 = 1.0 - d * d;
  rec.readout_mean = mean_of(readouts);
  rec.readout_std = sample_std(readouts);
  rec.dop_estimate = estimate_dop(rec.readout_mean, calibration_for(cfg.meter, src)).dop;
  rec.readouts = std::move(readouts);
  return rec;
}

ScanGroup summarize_group(std::span<const ScanRecord* const> members) {
  ScanGroup g{};
  g.two_phi_deg = members.front()->two_phi_deg;
  g.true_dop = members.front()->true_dop;
  g.repeats = members.size();
  std::vector<double> means, estimates, samples;
  for (const auto* r : members) {
    means.push_back(r->readout_mean);
    estimates.push_back(r->dop_estimate);
    samples.insert(samples.end(), r->readouts.begin(), r->readouts.end());
  }
  g.readout_mean = mean_of(means);
  g.repeat_std = sample_std(means);
  const double sm = mean_of(samples);
  g.sample_rel_std = sm > 0.0 ? sample_std(samples) / sm : 0.0;
  g.dop_estimate_mean = mean_of(estimates);
  g.dop_estimate_std = sample_std(estimates);
  return g;
}

SourceSpec configured_two_laser(const ScenarioConfig& cfg, const PoincareVector& m1, const PoincareVector& m2) {
  const auto& tl = cfg.two_laser;
  return two_laser_source(tl.lambda1_nm, tl.lambda2_nm, tl.i1, tl.i2, m1, m2);
}

nlohmann::json group_json(const ScanGroup& g) {
  return {{"two_phi_deg", g.two_phi_deg},         {"true_dop", g.true_dop},
          {"repeats", g.repeats},                 {"readout_mean", g.readout_mean},
          {"repeat_std", g.repeat_std},           {"sample_rel_std", g.sample_rel_std},
          {"dop_estimate_mean", g.dop_estimate_mean}, {"dop_estimate_std", g.dop_estimate_std}};
}

}  // namespace

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw NumericalError("line fit needs at least two paired points");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericalError("line fit with no spread in x");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

ScanResult run_fig2_scan(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto& p = cfg.fig2;
  ScanResult result;
  std::uint64_t stream = 0;
  for (int circle = 0; circle < 3; ++circle) {
    for (int b = 0; b < p.states_per_circle; ++b) {
      const double base = b * p.state_step_deg;
      const auto m1 = great_circle_point(circle, base * kDeg);
      for (int j = 0; j < p.two_phi_count; ++j) {
        const double two_phi = j * p.two_phi_step_deg;
        const auto src = configured_two_laser(cfg, m1, great_circle_point(circle, (base + two_phi) * kDeg));
        auto rec = measure_static(src, cfg, p.samples_per_point, derive_seed(cfg.seed, stream++));
        rec.circle = circle;
        rec.base_index = b;
        rec.two_phi_deg = two_phi;
        result.records.push_back(std::move(rec));
      }
      const auto src = configured_two_laser(cfg, m1, PoincareVector(-m1.vec()));
      auto ref = measure_static(src, cfg, p.samples_per_point,
                                derive_seed(cfg.seed, kReferenceStream + result.depolarized_references.size()));
      ref.circle = circle;
      ref.base_index = b;
      ref.two_phi_deg = 180.0;
      result.depolarized_references.push_back(std::move(ref));
    }
  }

  for (int j = 0; j < p.two_phi_count; ++j) {
    std::vector<const ScanRecord*> members;
    for (const auto& r : result.records) {
      if (r.two_phi_deg == j * p.two_phi_step_deg) members.push_back(&r);
    }
    result.groups.push_back(summarize_group(members));
  }
  std::vector<const ScanRecord*> refs;
  for (const auto& r : result.depolarized_references) refs.push_back(&r);
  result.depolarized_group = summarize_group(refs);

  std::vector<double> x, y;
  for (const auto& r : result.records) {
    x.push_back(r.one_minus_dop2);
    y.push_back(r.readout_mean);
  }
  result.fit = fit_line(x, y);

  const auto layout = configured_two_laser(cfg, PoincareVector(0, 0, 1), PoincareVector(0, 0, 1));
  const auto cal = calibration_for(cfg.meter, layout);
  result.predicted_slope = cal.gain * cal.visibility / (4.0 * cal.pair_normalization);
  result.predicted_intercept = 0.5 * cal.gain * (1.0 - cal.visibility) + cal.dark_offset;
  return result;
}

ShakeResult run_fig3_shake(const ScenarioConfig& cfg) {
  cfg.validate();
  const double window_s = cfg.polarimeter.integration_time_s;
  const auto per_window = static_cast<std::size_t>(std::llround(window_s / cfg.dt_s));
  const auto n_windows = static_cast<std::size_t>(std::floor(cfg.duration_s / window_s + 1e-9));
  if (n_windows < 3) throw ConfigError("duration_s", "fig3 needs at least three integration windows");
  const double amp = cfg.channel.shake_amplitude;

  ShakeResult result;
  result.window_s = window_s;
  for (std::size_t k = 0; k < cfg.fig3.dops.size(); ++k) {
    const double nominal = cfg.fig3.dops[k];
    const double two_phi = two_phi_for_dop(cfg.two_laser.i1, cfg.two_laser.i2, nominal);
    const auto src = configured_two_laser(cfg, great_circle_point(0, 0.0), great_circle_point(0, two_phi));

    FluctuationProcess process = cfg.channel.process;
    process.axis_diffusion *= amp * amp;
    process.retardance_sigma *= amp;
    process.seed = derive_seed(cfg.seed, 3 * k);
    FiberState fiber(cfg.channel.initial_axis, process.retardance_mean, cfg.channel.ref_wavelength_nm);
    Rng rng(process.seed);

    ShakeSeries series{nominal, two_phi, {}, {}, {}};
    std::vector<SourceSpec> snapshots;
    snapshots.reserve(n_windows * per_window);
    std::size_t step = 0;
    for (std::size_t w = 0; w < n_windows; ++w) {
      const bool shaken = amp > 0.0 && w > 0 && w + 1 < n_windows;
      for (std::size_t s = 0; s < per_window; ++s, ++step) {
        if (shaken) fiber = evolve(fiber, cfg.dt_s, process, rng);
        if (step % static_cast<std::size_t>(cfg.fig3.trajectory_stride) == 0) {
          series.trajectory.push_back({static_cast<double>(step) * cfg.dt_s, fiber});
        }
        snapshots.push_back(apply_fiber(src, fiber));
      }
    }
    const PolarizationTrace trace(cfg.dt_s, std::move(snapshots));
    const auto raw = singlet_meter_raw(trace, cfg.meter, derive_seed(cfg.seed, 3 * k + 1));
    PolarimeterConfig pol = cfg.polarimeter;
    series.polarimeter = polarimeter_dop(trace, pol, derive_seed(cfg.seed, 3 * k + 2));
    const auto cal = calibration_for(cfg.meter, src);

    for (std::size_t w = 0; w < n_windows; ++w) {
      const std::size_t first = w * per_window;
      const auto est = estimate_dop(mean_of(std::span(raw).subspan(first, per_window)), cal);
      std::vector<Vec3> dirs;
      dirs.reserve(per_window);
      for (std::size_t t = first; t < first + per_window; ++t) dirs.push_back(trace[t][0].poincare().vec());
      series.singlet.push_back(est.dop);
      result.windows.push_back({k, nominal, w, static_cast<double>(first) * cfg.dt_s,
                                static_cast<double>(first + per_window) * cfg.dt_s,
                                amp > 0.0 && w > 0 && w + 1 < n_windows, est.dop, est.below_floor,
                                series.polarimeter[w], angular_coverage(dirs)});
    }
    result.series.push_back(std::move(series));
  }
  return result;
}

PmdResult run_pmd_sweep(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto& c = cfg.carrier;
  const PoincareVector pol(c.polarization);
  const auto src = modulated_carrier_source(c.carrier_nm, c.bitrate_hz, pol, pol, pol, c.split);
  PmdResult result;
  result.degenerate_geometry = norm(cross(cfg.pmd.psp_axis, c.polarization)) < kInputTol;
  result.first_null_dgd_ps = 1e12 / (2.0 * c.bitrate_hz);
  const auto cal = calibration_for(cfg.meter, src);
  for (std::size_t i = 0; i < cfg.pmd.dgd_ps.size(); ++i) {
    const double dgd_ps = cfg.pmd.dgd_ps[i];
    const auto out = apply_pmd(src, PmdElement{dgd_ps * 1e-12, cfg.pmd.psp_axis}, c.carrier_nm);
    const auto trace = PolarizationTrace::constant(out, static_cast<std::size_t>(cfg.pmd.samples), cfg.dt_s);
    const auto raw = singlet_meter_raw(trace, cfg.meter, derive_seed(cfg.seed, i));
    result.rows.push_back({dgd_ps, source_dop(out), estimate_dop(mean_of(raw), cal).dop});
  }
  return result;
}

CalibrationReport run_calibration(const ScenarioConfig& cfg) {
  cfg.validate();
  const PoincareVector h(0, 0, 1);
  const PoincareVector v(0, 0, -1);
  const auto polarized = configured_two_laser(cfg, h, h);
  const auto depolarized = configured_two_laser(cfg, h, v);
  const auto n = static_cast<std::size_t>(cfg.fig2.samples_per_point);

  CalibrationReport rep{};
  // No light, no pairs: only the dark offset remains.
  rep.dark_readout = cfg.meter.dark_offset;
  rep.polarized_readout =
      mean_of(singlet_meter_raw(PolarizationTrace::constant(polarized, n, cfg.dt_s), cfg.meter, derive_seed(cfg.seed, 0)));
  rep.depolarized_readout = mean_of(
      singlet_meter_raw(PolarizationTrace::constant(depolarized, n, cfg.dt_s), cfg.meter, derive_seed(cfg.seed, 1)));

  // Orthogonal lines give p = 1/2, so r0 - dark = gain / 2 for any visibility.
  const double gain = 2.0 * (rep.depolarized_readout - rep.dark_readout);
  if (!(gain > 0.0)) throw NumericalError("calibration produced a non-positive gain");
  const double visibility = 1.0 - 2.0 * (rep.polarized_readout - rep.dark_readout) / gain;
  rep.calibration = {gain, rep.dark_readout, std::clamp(visibility, 0.0, 1.0),
                     cfg.meter.pair_normalization.value_or(pair_normalization(polarized))};
  return rep;
}

std::string scan_csv(const ScanResult& result) {
  std::ostringstream out;
  out << "circle,base_idx,two_phi_deg,true_dop,one_minus_dop2,readout_mean,readout_std,dop_estimate\n";
  for (const auto& r : result.records) {
    out << r.circle << ',' << r.base_index << ',' << format_number(r.two_phi_deg) << ','
        << format_number(r.true_dop) << ',' << format_number(r.one_minus_dop2) << ','
        << format_number(r.readout_mean) << ',' << format_number(r.readout_std) << ','
        << format_number(r.dop_estimate) << '\n';
  }
  return out.str();
}

nlohmann::json scan_summary(const ScanResult& result) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : result.groups) groups.push_back(group_json(g));
  return {{"scenario", "fig2_scan"},
          {"points", result.records.size()},
          {"fit",
           {{"slope", result.fit.slope},
            {"intercept", result.fit.intercept},
            {"r_squared", result.fit.r_squared},
            {"max_abs_residual", result.fit.max_abs_residual}}},
          {"predicted", {{"slope", result.predicted_slope}, {"intercept", result.predicted_intercept}}},
          {"groups", groups},
          {"depolarized_reference", group_json(result.depolarized_group)}};
}

std::string shake_csv(const ShakeResult& result) {
  std::ostringstream out;
  out << "source_idx,nominal_dop,window,t_start_s,t_end_s,shaken,singlet_dop,polarimeter_dop,coverage\n";
  for (const auto& w : result.windows) {
    out << w.source_index << ',' << format_number(w.nominal_dop) << ',' << w.window << ','
        << format_number(w.t_start_s) << ',' << format_number(w.t_end_s) << ',' << (w.shaken ? 1 : 0) << ','
        << format_number(w.singlet_dop) << ',' << format_number(w.polarimeter_dop) << ','
        << format_number(w.coverage) << '\n';
  }
  return out.str();
}

nlohmann::json shake_summary(const ShakeResult& result) {
  nlohmann::json sources = nlohmann::json::array();
  for (std::size_t k = 0; k < result.series.size(); ++k) {
    const auto& s = result.series[k];
    double worst_singlet = 0.0;
    double max_polarimeter = 0.0;
    double min_polarimeter = 1.0;
    for (const auto& w : result.windows) {
      if (w.source_index != k || !w.shaken) continue;
      worst_singlet = std::max(worst_singlet, std::abs(w.singlet_dop - s.singlet.front()));
      max_polarimeter = std::max(max_polarimeter, w.polarimeter_dop);
      min_polarimeter = std::min(min_polarimeter, w.polarimeter_dop);
    }
    sources.push_back({{"nominal_dop", s.nominal_dop},
                       {"two_phi_deg", s.two_phi_rad / kDeg},
                       {"singlet_reference", s.singlet.front()},
                       {"polarimeter_reference", s.polarimeter.front()},
                       {"singlet_max_deviation_shaken", worst_singlet},
                       {"polarimeter_shaken_min", min_polarimeter},
                       {"polarimeter_shaken_max", max_polarimeter}});
  }
  return {{"scenario", "fig3_shake"}, {"window_s", result.window_s}, {"sources", sources}};
}

std::string pmd_csv(const PmdResult& result) {
  std::ostringstream out;
  out << "dgd_ps,source_dop,meter_dop\n";
  for (const auto& r : result.rows) {
    out << format_number(r.dgd_ps) << ',' << format_number(r.source_dop) << ',' << format_number(r.meter_dop) << '\n';
  }
  return out.str();
}

nlohmann::json pmd_summary(const PmdResult& result) {
  double min_dop = 1.0;
  for (const auto& r : result.rows) min_dop = std::min(min_dop, r.source_dop);
  return {{"scenario", "pmd_sweep"},
          {"degenerate_geometry", result.degenerate_geometry},
          {"first_null_dgd_ps", result.first_null_dgd_ps},
          {"min_source_dop", min_dop},
          {"rows", result.rows.size()}};
}

}  // namespace dopsim
