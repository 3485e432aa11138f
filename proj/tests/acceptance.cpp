// Acceptance suite: every release criterion checked end to end at its pinned
// tolerance, one verdict line per criterion. Exit status is the number of
// failed criteria.
//
// Heavy statistical criteria use fixed master seeds; rerunning reproduces
// every number exactly (per machine). `--only 4,9` restricts the run.

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "waveqed/ensemble.hpp"
#include "waveqed/io.hpp"

#include "oracles.hpp"

using namespace waveqed;
using Clock = std::chrono::steady_clock;

namespace {

int g_threads = 8;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "  FAILED: " << what << "\n";
    }
  }
  void note(const std::string& what) { detail << "  " << what << "\n"; }
};

std::vector<double> uniform_grid(double tmax, int points) {
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k)
    t[static_cast<std::size_t>(k)] = tmax * k / static_cast<double>(points - 1);
  return t;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---- C1: exact forward spectrum ----
Outcome c1_exact_spectrum() {
  Outcome out;
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int n : {2, 3, 17, 256}) {
    auto ref = hf_spectrum(n).energies;
    std::sort(ref.begin(), ref.end());
    for (int trial = 0; trial < 100; ++trial) {
      const AtomCloud cloud = sample_cloud(
          gaussian_profile(trial % 2 ? 40.0 : 120.0), n,
          child_seed(101, static_cast<std::uint64_t>(n * 1000 + trial)));
      const auto sd = diagonalize(build_hf(cloud));
      for (int j = 0; j < n; ++j)
        worst = std::max(worst,
                         std::abs(sd.eigenvalues(j) -
                                  ref[static_cast<std::size_t>(j)]) / n);
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  out.note("max |E - cot law| / (gamma N) = " + fmt(worst) +
           ", runtime " + fmt(secs) + " s");
  out.require(worst < 1e-9, "spectrum deviation exceeds 1e-9 gamma N");
  out.require(secs < 60.0, "runtime above one minute");
  return out;
}

// ---- C2: eigenstate residuals ----
Outcome c2_eigenstate_residuals() {
  Outcome out;
  const int n = 128;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const AtomCloud cloud = sample_cloud(
        gaussian_profile(90.0), n,
        child_seed(202, static_cast<std::uint64_t>(trial)));
    const auto hf = build_hf(cloud);
    const auto spec = hf_spectrum(n);
    for (std::size_t j = 0; j < spec.alphas.size(); ++j) {
      const auto f = hf_eigenstate(cloud, spec.alphas[j]);
      worst = std::max(worst, (hf.entries * f.amplitudes -
                               spec.energies[j] * f.amplitudes)
                                  .norm());
    }
  }
  out.note("max residual = " + fmt(worst) + " gamma");
  out.require(worst < 1e-10, "eigenstate residual exceeds 1e-10 gamma");
  return out;
}

// ---- C3: exact overlap law and completeness ----
Outcome c3_overlap_law() {
  Outcome out;
  double worst_dev = 0.0, worst_complete = 0.0;
  for (int n : {3, 64, 501}) {
    const AtomCloud cloud = sample_cloud(
        gaussian_profile(75.0), n, child_seed(303, static_cast<std::uint64_t>(n)));
    const auto w = w_state(cloud);
    double total = 0.0;
    for (int alpha : alpha_values(n)) {
      const auto f = hf_eigenstate(cloud, alpha);
      const double overlap = std::abs(f.amplitudes.dot(w.amplitudes));
      worst_dev = std::max(
          worst_dev, std::abs(overlap - w_overlap_exact(alpha, n)));
      total += overlap * overlap;
    }
    worst_complete = std::max(worst_complete, std::abs(total - 1.0));
  }
  out.note("max |overlap - law| = " + fmt(worst_dev) +
           ", max |sum - 1| = " + fmt(worst_complete));
  out.require(worst_dev < 1e-12, "overlap law violated beyond 1e-12");
  out.require(worst_complete < 1e-12, "completeness violated beyond 1e-12");
  return out;
}

// ---- C4: universal-curve agreement ----
Outcome c4_universal_curve() {
  Outcome out;
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.profile = gaussian_profile(100.0);
  cfg.mean_n = 500;
  cfg.realizations = 5000;
  cfg.time.tmax_tau = 6.4 * kPi;
  cfg.time.points = 1006;
  cfg.master_seed = 404;
  cfg.which = Evolution::hs;
  const EnsembleCurve curve =
      run_survival_ensemble(cfg, RunOptions{g_threads, false}).curve;
  double max_dev = 0.0;
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    if (curve.times_tau[k] > 6.0 * kPi) break;
    max_dev = std::max(max_dev, std::abs(curve.mean_p[k] -
                                         p_analytic(curve.times[k], 500.0)));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  out.note("max |P_MC - P_analytic| = " + fmt(max_dev) + " on [0, 6 pi tau], " +
           fmt(secs) + " s with " + std::to_string(g_threads) + " threads");
  out.require(max_dev < 0.05, "curve deviation exceeds 0.05");

  const auto peaks = revival_peaks(curve, saturation());
  for (int m = 1; m <= 3; ++m) {
    const double target = 2.0 * kPi * m;
    double best = 1e300, at = 0.0;
    for (const auto& p : peaks)
      if (std::abs(p.t_over_tau - target) < best) {
        best = std::abs(p.t_over_tau - target);
        at = p.t_over_tau;
      }
    out.note("revival " + std::to_string(m) + ": found at t/tau = " + fmt(at) +
             " (target " + fmt(target) + ")");
    out.require(best / target < 0.05,
                "revival " + std::to_string(m) + " offset exceeds 5%");
  }
  return out;
}

// ---- C5: saturation (1/6 ensemble vs 1/3 single forward realization) ----
Outcome c5_saturation() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.profile = gaussian_profile(100.0);
  cfg.mean_n = 300;
  cfg.realizations = 2000;
  const double sq = std::sqrt(300.0);
  cfg.time.tmax_tau = 20.0 * sq;
  cfg.time.points = 1800;
  cfg.master_seed = 505;
  const EnsembleCurve curve =
      run_survival_ensemble(cfg, RunOptions{g_threads, false}).curve;
  RunningStat sat;
  for (std::size_t k = 0; k < curve.times.size(); ++k)
    if (curve.times_tau[k] >= 10.0 * sq) sat.add(curve.mean_p[k]);
  out.note("ensemble time average on [10, 20] tau_dp = " + fmt(sat.mean));
  out.require(std::abs(sat.mean - 1.0 / 6.0) < 0.02,
              "ensemble saturation outside 1/6 +- 0.02");

  const AtomCloud cloud = sample_cloud(gaussian_profile(100.0), 300, 506);
  const TimeScales ts = TimeScales::for_atoms(300);
  const auto grid = uniform_grid(20.0 * sq * ts.tau, 1800);
  const SurvivalCurve hf = survival_curve(cloud, grid, Evolution::hf);
  RunningStat third;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (hf.times_tau[k] >= 10.0 * sq) third.add(hf.values[k]);
  out.note("single forward realization time average = " + fmt(third.mean));
  out.require(std::abs(third.mean - 1.0 / 3.0) < 0.02,
              "forward-only time average outside 1/3 +- 0.02");
  return out;
}

// ---- C6: overlap statistics ----
Outcome c6_overlap_statistics() {
  Outcome out;
  ExperimentConfig cfg;
  cfg.profile = gaussian_profile(100.0);
  cfg.mean_n = 100;
  cfg.realizations = 10000;
  cfg.master_seed = 606;
  const WSampleSummary s =
      collect_w_samples(cfg, 1, RunOptions{g_threads, false});
  out.note("mean |w_1|^2 = " + fmt(s.mean) + " (target 0.01)");
  out.require(std::abs(s.mean - 0.01) < 0.0005, "mean outside 1/N +- 5%");
  const KsResult ks = ks_exponential(s.samples, 0.01);
  out.note("KS distance = " + fmt(ks.distance) + " (critical " +
           fmt(ks.critical) + ")");
  out.require(ks.accepted, "KS rejects the exponential law at level 0.01");

  std::vector<SweepPoint> pts;
  for (int n : {50, 100, 200, 400}) {
    SweepPoint pt;
    pt.profile = gaussian_profile(100.0);
    pt.n_atoms = n;
    pt.realizations = 4000;
    pt.master_seed = 607;
    pts.push_back(pt);
  }
  const ScalingFit fit =
      scaling_sweep(pts, SweepQuantity::w_std, RunOptions{g_threads, false});
  out.note("std |w_1| log-log slope vs N = " + fmt(fit.slope) + " +- " +
           fmt(fit.slope_stderr));
  out.require(std::abs(fit.slope + 0.5) < 0.05,
              "std |w_1| slope outside -0.5 +- 0.05");
  return out;
}

// ---- C7: emission rates ----
Outcome c7_emission_rates() {
  Outcome out;
  double worst = 0.0;
  RunningStat backward;
  for (int i = 0; i < 10000; ++i) {
    const int n = 100;
    const AtomCloud cloud = sample_cloud(
        gaussian_profile(100.0), n, child_seed(707, static_cast<std::uint64_t>(i)));
    const EmissionRates r = emission_rates(w_state(cloud), cloud);
    worst = std::max(worst, std::abs(r.gamma_forward - n) / n);
    backward.add(r.gamma_backward);
  }
  out.note("max |Gamma_F/N - 1| = " + fmt(worst) +
           ", <Gamma_B> = " + fmt(backward.mean) + " +- " +
           fmt(backward.stderr_mean()));
  out.require(worst < 1e-12, "Gamma_F deviates from N gamma beyond 1e-12");
  out.require(std::abs(backward.mean - 1.0) < 0.05,
              "<Gamma_B> outside gamma +- 5%");
  return out;
}

// ---- C8: cross-coupling scaling ----
Outcome c8_cross_coupling_scaling() {
  Outcome out;
  const RunOptions opts{g_threads, false};
  // box <|h_11|> slope
  {
    std::vector<SweepPoint> pts;
    for (double kw : {10.0, 20.0, 40.0}) {
      SweepPoint pt;
      pt.profile = box_profile(kw);
      pt.n_atoms = 100000;
      pt.realizations = 200;
      pt.master_seed = 808;
      pts.push_back(pt);
    }
    const ScalingFit fit = scaling_sweep(pts, SweepQuantity::h_abs, opts);
    std::vector<double> mean_abs;
    for (const auto& s : fit.samples) mean_abs.push_back(s.mean_abs);
    const LinearFit lf = loglog_fit(fit.x_values, mean_abs);
    out.note("box <|h_11|> slope = " + fmt(lf.slope) + " +- " +
             fmt(lf.slope_stderr) + " (criterion -2 +- 0.3; closed form "
             "sin(kW)/(kW - pi) gives about -1)");
    out.require(std::abs(lf.slope + 2.0) < 0.3,
                "box <|h_11|> slope outside -2 +- 0.3");
  }
  // gaussian delta_1 slope
  {
    std::vector<SweepPoint> pts;
    for (double ks : {25.0, 50.0, 100.0, 200.0}) {
      SweepPoint pt;
      pt.profile = gaussian_profile(ks);
      pt.n_atoms = 10000;
      pt.realizations = 300;
      pt.master_seed = 809;
      pts.push_back(pt);
    }
    const ScalingFit fit = scaling_sweep(pts, SweepQuantity::delta, opts);
    out.note("gaussian delta_1 slope = " + fmt(fit.slope) + " +- " +
             fmt(fit.slope_stderr) + ", c0 = " + fmt(fit.c0) +
             (fit.c1_resolved ? ", c1 = " + fmt(fit.c1) : ", c1 unresolved"));
    out.require(std::abs(fit.slope + 1.0) < 0.3,
                "gaussian delta_1 slope outside -1 +- 0.3");
  }
  // gaussian h_11: deterministic part below measurability at every size
  {
    std::vector<SweepPoint> pts;
    for (double ks : {25.0, 50.0, 100.0}) {
      SweepPoint pt;
      pt.profile = gaussian_profile(ks);
      pt.n_atoms = 100000;
      pt.realizations = 200;
      pt.master_seed = 810;
      pts.push_back(pt);
    }
    const ScalingFit fit = scaling_sweep(pts, SweepQuantity::h_abs, opts);
    bool all_zero = true;
    for (const auto& s : fit.samples) {
      out.note("gaussian |<h_11>| at k sigma = " + fmt(s.x) + ": " +
               fmt(s.estimate) + " (3 sigma = " + fmt(3.0 * s.stderr_est) +
               ", floor <|h|> = " + fmt(s.mean_abs) + ")");
      all_zero = all_zero && s.estimate < 3.0 * s.stderr_est;
    }
    out.require(all_zero,
                "gaussian h_11 deterministic part not consistent with zero "
                "(super-polynomial decay) after floor subtraction");
  }
  return out;
}

// ---- C9: Poisson atom number ----
Outcome c9_poisson_sqrt2() {
  Outcome out;
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.profile = gaussian_profile(100.0);
  cfg.mean_n = 300;
  cfg.realizations = 5000;
  const double sq = std::sqrt(300.0);
  cfg.time.tmax_tau = 15.0 * sq;
  cfg.time.points = 900;
  cfg.master_seed = 909;
  const RunOptions opts{g_threads, false};
  const EnsembleCurve fixed = run_survival_ensemble(cfg, opts).curve;
  cfg.atom_number_mode = AtomNumberMode::poisson;
  cfg.master_seed = 910;
  const EnsembleCurve pois = run_survival_ensemble(cfg, opts).curve;
  const DephasingFit f_fixed = fit_dephasing(fixed);
  const DephasingFit f_pois = fit_dephasing(pois);
  const double ratio = f_pois.tau_dp / f_fixed.tau_dp;
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  out.note("tau_dp fixed = " + fmt(f_fixed.tau_dp / fixed.scales.tau) +
           " tau, poisson = " + fmt(f_pois.tau_dp / pois.scales.tau) +
           " tau, ratio = " + fmt(ratio) + " (target 0.7071 +- 10%), " +
           fmt(secs) + " s");
  out.require(std::abs(ratio - 1.0 / std::sqrt(2.0)) < 0.1 / std::sqrt(2.0),
              "dephasing ratio outside 1/sqrt(2) +- 10%");
  return out;
}

// ---- C10: special functions ----
Outcome c10_special_functions() {
  Outcome out;
  double worst = 0.0;
  for (double x = -10.0; x <= 10.0 + 1e-9; x += 0.05)
    worst = std::max(worst, std::abs(dawson(x) - oracles::dawson_quadrature(x)));
  out.note("max |dawson - quadrature| = " + fmt(worst));
  out.require(worst < 1e-10, "dawson deviates from quadrature beyond 1e-10");

  out.require(std::abs(chi(0.0) - 1.0) < 1e-10, "chi(0) != 1 at 1e-10");
  out.require(std::abs(p_analytic(0.0, 300.0) - 1.0) < 1e-8,
              "P_analytic(0) != 1 at 1e-8");

  const TimeScales ts = TimeScales::for_atoms(300.0);
  const double sat_dev =
      p_analytic(50.0 * ts.tau_dp, 300.0) - saturation();
  out.note("P_analytic(50 tau_dp) - 1/6 = " + fmt(sat_dev) +
           " (exact approach is -(tau_dp/t)^2/pi^2 = -4.05e-5 at this time; "
           "the 1e-8 tolerance is unreachable for the curve itself)");
  out.require(std::abs(sat_dev) < 1e-8,
              "P_analytic(50 tau_dp) differs from 1/6 beyond 1e-8");

  // random-splitting Monte Carlo oracle
  {
    const int n_atoms = 1000, n_real = 4000, n_alpha = 2000;
    std::vector<double> c2(n_alpha);
    double tail = 1.0;
    for (int a = 0; a < n_alpha; ++a) {
      const double alpha = 2.0 * a + 1.0;
      c2[static_cast<std::size_t>(a)] = 4.0 / (kPi * kPi * alpha * alpha);
      tail -= 2.0 * c2[static_cast<std::size_t>(a)];
    }
    const int n_t = 20;
    std::vector<RunningStat> acc(n_t);
    std::vector<double> t_tau(n_t);
    for (int k = 0; k < n_t; ++k) t_tau[static_cast<std::size_t>(k)] = 8.0 * kPi * (k + 1.0) / n_t;
    Rng rng(1010);
    std::vector<double> wp(n_alpha), wm(n_alpha);
    for (int r = 0; r < n_real; ++r) {
      for (int a = 0; a < n_alpha; ++a) {
        wp[static_cast<std::size_t>(a)] = std::sqrt(rng.exponential(1.0 / n_atoms));
        wm[static_cast<std::size_t>(a)] = std::sqrt(rng.exponential(1.0 / n_atoms));
      }
      for (int k = 0; k < n_t; ++k) {
        std::complex<double> amp(tail, 0.0);
        for (int a = 0; a < n_alpha; ++a) {
          const double et = t_tau[static_cast<std::size_t>(k)] / (2.0 * a + 1.0);
          amp += c2[static_cast<std::size_t>(a)] *
                 (std::polar(1.0, -et) * std::cos(et * wp[static_cast<std::size_t>(a)]) +
                  std::polar(1.0, et) * std::cos(et * wm[static_cast<std::size_t>(a)]));
        }
        acc[static_cast<std::size_t>(k)].add(std::norm(amp));
      }
    }
    double worst_sigma = 0.0;
    for (int k = 0; k < n_t; ++k) {
      const auto& s = acc[static_cast<std::size_t>(k)];
      const double ana = p_analytic(
          t_tau[static_cast<std::size_t>(k)] * kPi / n_atoms, 1000.0);
      worst_sigma = std::max(
          worst_sigma, std::abs(s.mean - ana) / (s.stderr_mean() + 1e-4));
    }
    out.note("splitting-model oracle max deviation = " + fmt(worst_sigma) +
             " sigma");
    out.require(worst_sigma < 3.0, "analytic curve beyond 3 MC sigmas");
  }
  return out;
}

// ---- C11: determinism and performance ----
Outcome c11_determinism_performance() {
  Outcome out;
  // byte-identical serialized outputs across thread counts
  {
    ExperimentConfig cfg;
    cfg.profile = gaussian_profile(100.0);
    cfg.mean_n = 120;
    cfg.realizations = 256;
    cfg.time.tmax_tau = 15.0;
    cfg.time.points = 300;
    cfg.master_seed = 1111;
    std::vector<std::string> outputs;
    for (int threads : {1, 3, 8}) {
      const EnsembleCurve c =
          run_survival_ensemble(cfg, RunOptions{threads, false}).curve;
      CsvTable t;
      t.add_column("t");
      t.add_column("p_mean");
      t.add_column("p_stderr");
      for (std::size_t k = 0; k < c.times.size(); ++k) {
        t.push(0, c.times[k]);
        t.push(1, c.mean_p[k]);
        t.push(2, c.stderr_p[k]);
      }
      outputs.push_back(t.to_string());
    }
    out.require(outputs[0] == outputs[1] && outputs[0] == outputs[2],
                "serialized curves differ across thread counts");
    out.note("curves byte-identical for 1, 3, and 8 worker threads");
  }
  // throughput of 1000 realizations at N = 500
  {
    ExperimentConfig cfg;
    cfg.profile = gaussian_profile(100.0);
    cfg.mean_n = 500;
    cfg.realizations = 1000;
    cfg.time.tmax_tau = 10.0;
    cfg.time.points = 200;
    cfg.master_seed = 1112;
    const auto t8 = Clock::now();
    run_survival_ensemble(cfg, RunOptions{8, false});
    const double wall8 = std::chrono::duration<double>(Clock::now() - t8).count();
    const auto t1 = Clock::now();
    run_survival_ensemble(cfg, RunOptions{1, false});
    const double wall1 = std::chrono::duration<double>(Clock::now() - t1).count();
    const unsigned hw = std::thread::hardware_concurrency();
    out.note("1000 x N=500: " + fmt(wall8) + " s on 8 threads, " + fmt(wall1) +
             " s on 1 thread, speedup " + fmt(wall1 / wall8) + " (machine has " +
             std::to_string(hw) + " hardware threads)");
    out.require(wall8 < 300.0, "8-thread run above 5 minutes");
    out.require(wall1 / wall8 >= 4.0, "speedup below 4x over 1 thread");
  }
  return out;
}

// ---- C12: dissipative consistency ----
Outcome c12_dissipative_slope() {
  Outcome out;
  const int n = 100;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const AtomCloud cloud = sample_cloud(
        gaussian_profile(100.0), n,
        child_seed(1212, static_cast<std::uint64_t>(trial)));
    const EmissionRates r = emission_rates(w_state(cloud), cloud);
    const double h = 1e-3 / n;
    const auto curve =
        survival_curve(cloud, uniform_grid(4.0 * h, 5), Evolution::heff);
    const double slope = (-25.0 * curve.values[0] + 48.0 * curve.values[1] -
                          36.0 * curve.values[2] + 16.0 * curve.values[3] -
                          3.0 * curve.values[4]) /
                         (12.0 * h);
    const double expected = -(r.gamma_forward + r.gamma_backward);
    worst = std::max(worst, std::abs(slope - expected) / std::abs(expected));
  }
  out.note("max relative slope mismatch = " + fmt(worst));
  out.require(worst < 1e-6, "initial decay slope differs beyond 1e-6 relative");
  return out;
}

} // namespace

int main(int argc, char** argv) {
  setenv("OPENBLAS_NUM_THREADS", "1", 0);
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.push_back(std::atoi(tok.c_str()));
    } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
      g_threads = std::atoi(argv[++i]);
    }
  }

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "exact-spectrum", c1_exact_spectrum},
      {2, "eigenstate-residuals", c2_eigenstate_residuals},
      {3, "overlap-law", c3_overlap_law},
      {4, "universal-curve", c4_universal_curve},
      {5, "saturation", c5_saturation},
      {6, "overlap-statistics", c6_overlap_statistics},
      {7, "emission-rates", c7_emission_rates},
      {8, "cross-coupling-scaling", c8_cross_coupling_scaling},
      {9, "poisson-sqrt2", c9_poisson_sqrt2},
      {10, "special-functions", c10_special_functions},
      {11, "determinism-performance", c11_determinism_performance},
      {12, "dissipative-slope", c12_dissipative_slope},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.id) == only.end())
      continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "  EXCEPTION: " << e.what() << "\n";
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("C%02d %-26s %s (%.1f s)\n", c.id, c.name,
                out.pass ? "PASS" : "FAIL", secs);
    std::fputs(out.detail.str().c_str(), stdout);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures)
    std::printf("%d criterion(s) failed\n", failures);
  else
    std::printf("all criteria passed\n");
  return failures;
}
