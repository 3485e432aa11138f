// Command-line driver for reproducible waveguide-superatom experiments.
//
// Subcommands: theory | ensemble | stats | rates. Every run emits CSV data
// plus a JSON manifest with the config echo, timings, counters, and a
// digest per output file; rerunning with the same seed and any thread
// count reproduces the CSV bytes exactly.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "waveqed/ensemble.hpp"
#include "waveqed/io.hpp"
#include "waveqed/theory.hpp"

namespace fs = std::filesystem;
using namespace waveqed;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int default_threads() {
  if (const char* env = std::getenv("WAVEQED_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0; // resolve to hardware concurrency
}

struct CommonFlags {
  std::string config_path;
  std::string profile_kind;
  double size_k = -1.0;
  double mean_n = -1.0;
  bool poisson = false;
  int realizations = -1;
  double tmax_tau = -1.0;
  int points = -1;
  long long seed = -1;
  std::string which;
  std::string alphas;
  int threads = 0;
  std::string out_dir = ".";

  void attach(CLI::App* cmd, bool with_grid = true) {
    cmd->add_option("--config", config_path,
                    "flat key=value config file (flags override)");
    cmd->add_option("--profile-kind", profile_kind,
                    "gaussian | uniform_box");
    cmd->add_option("--size-k", size_k, "cloud size in phase units (k*sigma)");
    cmd->add_option("--n", mean_n, "mean atom number");
    cmd->add_flag("--poisson", poisson, "Poisson-distributed atom number");
    cmd->add_option("--realizations,-r", realizations, "disorder realizations");
    if (with_grid) {
      cmd->add_option("--tmax-tau", tmax_tau, "grid end in units of tau");
      cmd->add_option("--points", points, "grid points including t=0");
    }
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--which", which, "Hs | HF | Heff");
    cmd->add_option("--alphas", alphas, "comma-separated odd alphas");
    cmd->add_option("--threads", threads,
                    "worker threads (default: WAVEQED_THREADS or all cores)");
    cmd->add_option("--out-dir", out_dir, "output directory");
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    std::map<std::string, std::string> kv;
    if (!profile_kind.empty()) kv["profile.kind"] = profile_kind;
    if (size_k > 0) kv["profile.size_k"] = format_double(size_k);
    if (mean_n > 0) kv["mean_n"] = format_double(mean_n);
    if (poisson) kv["atom_number_mode"] = "poisson";
    if (realizations > 0) kv["realizations"] = std::to_string(realizations);
    if (tmax_tau > 0) kv["time.tmax_tau"] = format_double(tmax_tau);
    if (points > 0) kv["time.points"] = std::to_string(points);
    if (seed >= 0) kv["master_seed"] = std::to_string(seed);
    if (!which.empty()) kv["which"] = which;
    if (!alphas.empty()) kv["alphas"] = alphas;
    apply_config_keys(cfg, kv);
    cfg.validate();
    return cfg;
  }

  RunOptions run_options() const {
    RunOptions o;
    o.threads = threads > 0 ? threads : default_threads();
    return o;
  }
};

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

// ---- theory ----

int cmd_theory(double n_atoms, double tmax_tau, int points,
               const std::string& out_dir) {
  const auto t0 = Clock::now();
  if (n_atoms < 1 || tmax_tau <= 0 || points < 2)
    throw std::invalid_argument("theory: need --n >= 1, --tmax-tau > 0, --points >= 2");
  const fs::path dir = prepare_out_dir(out_dir);
  const TimeScales scales = TimeScales::for_atoms(n_atoms);

  CsvTable table;
  table.add_column("s");
  table.add_column("chi");
  table.add_column("chi_squared");
  table.add_column("p_analytic");
  for (int k = 0; k < points; ++k) {
    const double s = tmax_tau * k / static_cast<double>(points - 1);
    const double c = chi(s);
    table.push(0, s);
    table.push(1, c);
    table.push(2, c * c);
    table.push(3, p_analytic(s * scales.tau, scales));
  }
  const fs::path csv = dir / "theory.csv";
  write_file_atomic(csv, table.to_string());

  RunManifest man("theory");
  man.set("n_atoms", n_atoms);
  man.set("tmax_tau", tmax_tau);
  man.set("points", points);
  man.set("tau", scales.tau);
  man.set("tau_dp", scales.tau_dp);
  man.set("saturation", saturation());
  man.set("conventions",
          {{"p_analytic_normalization",
            "first series uses coefficient 1/(2n+1)^2 so that P(0)=1; the "
            "2/(2n+1)^2 variant gives P(0)=4 and is not used; the long-time "
            "limit 1/6 is unchanged"}});
  man.add_output(csv, table.rows());
  man.set_wall_time(seconds_since(t0));
  man.write(dir / "theory_manifest.json");
  std::cout << "theory: wrote " << csv.string() << " (" << table.rows()
            << " rows)\n";
  return 0;
}

// ---- ensemble ----

void apply_preset(const std::string& name, CommonFlags& flags) {
  if (name.empty()) return;
  // presets fill only values the user left unset
  if (name == "fig2") {
    if (flags.mean_n <= 0) flags.mean_n = 100;
    if (flags.tmax_tau <= 0) flags.tmax_tau = 8.0 * kPi;
    if (flags.points <= 0) flags.points = 1260;
    if (flags.realizations <= 0) flags.realizations = 2000;
  } else if (name == "fig3") {
    if (flags.mean_n <= 0) flags.mean_n = 500;
    if (flags.tmax_tau <= 0) flags.tmax_tau = 6.4 * kPi;
    if (flags.points <= 0) flags.points = 1000;
    if (flags.realizations <= 0) flags.realizations = 5000;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  if (flags.size_k <= 0) flags.size_k = 100.0;
  if (flags.which.empty()) flags.which = "Hs";
}

int cmd_ensemble(const CommonFlags& flags, const std::string& preset) {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = flags.build();
  const fs::path dir = prepare_out_dir(flags.out_dir);

  const auto tc = Clock::now();
  const EnsembleResult res = run_survival_ensemble(cfg, flags.run_options());
  const double compute_s = seconds_since(tc);
  const EnsembleCurve& curve = res.curve;

  CsvTable table;
  table.add_column("t");
  table.add_column("t_over_tau");
  table.add_column("p_mean");
  table.add_column("p_stderr");
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    table.push(0, curve.times[k]);
    table.push(1, curve.times_tau[k]);
    table.push(2, curve.mean_p[k]);
    table.push(3, curve.stderr_p[k]);
  }
  const fs::path csv = dir / "ensemble_curve.csv";
  write_file_atomic(csv, table.to_string());

  RunManifest man(preset.empty() ? "ensemble" : "ensemble --reproduce " + preset);
  man.set_config(cfg);
  man.set_counter("poisson_clamped", curve.poisson_clamped);
  man.set_timing("compute", compute_s);
  man.set("realizations_done", curve.realizations_done);
  man.set("tau", curve.scales.tau);
  man.set("tau_dp", curve.scales.tau_dp);

  if (cfg.which == Evolution::hs) {
    double max_dev = 0.0;
    for (std::size_t k = 0; k < curve.times.size(); ++k)
      max_dev = std::max(max_dev,
                         std::abs(curve.mean_p[k] -
                                  p_analytic(curve.times[k], curve.scales)));
    man.set("analytic_max_abs_dev", max_dev);
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& p : revival_peaks(curve, saturation()))
      peaks.push_back({{"t_over_tau", p.t_over_tau}, {"value", p.value}});
    man.set("revival_peaks", peaks);
  }

  man.add_output(csv, table.rows());
  man.set_wall_time(seconds_since(t0));
  man.write(dir / "ensemble_manifest.json");
  std::cout << "ensemble: " << curve.realizations_done << " realizations, wrote "
            << csv.string() << "\n";
  return 0;
}

// ---- stats ----

int cmd_stats(const CommonFlags& flags, const std::string& sweep,
              const std::string& sweep_sizes, int sweep_n,
              int sweep_realizations) {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = flags.build();
  const fs::path dir = prepare_out_dir(flags.out_dir);
  const RunOptions opts = flags.run_options();
  RunManifest man("stats");
  man.set_config(cfg);

  // overlap samples for every requested alpha
  CsvTable samples;
  samples.add_column("realization");
  samples.add_column("alpha");
  samples.add_column("w_abs2");
  nlohmann::json ks_json = nlohmann::json::array();
  std::vector<double> first_alpha_samples;
  for (int alpha : cfg.alphas) {
    const WSampleSummary sum = collect_w_samples(cfg, alpha, opts);
    for (std::size_t i = 0; i < sum.samples.size(); ++i) {
      samples.push(0, static_cast<double>(i));
      samples.push(1, static_cast<double>(alpha));
      samples.push(2, sum.samples[i]);
    }
    if (alpha == cfg.alphas.front()) first_alpha_samples = sum.samples;
    nlohmann::json entry;
    entry["alpha"] = alpha;
    entry["n_samples"] = sum.samples.size();
    entry["mean_w_abs2"] = sum.mean;
    entry["variance_w_abs2"] = sum.variance;
    entry["hypothesis_mean"] = 1.0 / cfg.mean_n;
    if (sum.samples.size() >= 100) {
      const KsResult ks = ks_exponential(sum.samples, 1.0 / cfg.mean_n);
      entry["ks_distance"] = ks.distance;
      entry["ks_critical_0p01"] = ks.critical;
      entry["ks_accepted"] = ks.accepted;
    }
    man.set_counter("poisson_clamped", sum.poisson_clamped);
    ks_json.push_back(entry);
  }
  const fs::path samples_csv = dir / "w_samples.csv";
  write_file_atomic(samples_csv, samples.to_string());

  // histogram of the first alpha
  CsvTable hist;
  hist.add_column("bin_lo");
  hist.add_column("bin_hi");
  hist.add_column("count");
  hist.add_column("density");
  if (!first_alpha_samples.empty()) {
    const double hi =
        *std::max_element(first_alpha_samples.begin(), first_alpha_samples.end());
    const int bins = 50;
    std::vector<long long> counts(bins, 0);
    for (double s : first_alpha_samples) {
      int b = static_cast<int>(s / hi * bins);
      if (b >= bins) b = bins - 1;
      ++counts[static_cast<std::size_t>(b)];
    }
    const double width = hi / bins;
    for (int b = 0; b < bins; ++b) {
      hist.push(0, b * width);
      hist.push(1, (b + 1) * width);
      hist.push(2, static_cast<double>(counts[static_cast<std::size_t>(b)]));
      hist.push(3, static_cast<double>(counts[static_cast<std::size_t>(b)]) /
                       (static_cast<double>(first_alpha_samples.size()) * width));
    }
  }
  const fs::path hist_csv = dir / "w_histogram.csv";
  write_file_atomic(hist_csv, hist.to_string());

  const fs::path ks_path = dir / "ks_summary.json";
  write_file_atomic(ks_path, nlohmann::json(ks_json).dump(2) + "\n");

  man.add_output(samples_csv, samples.rows());
  man.add_output(hist_csv, hist.rows());

  // optional scaling sweep
  if (!sweep.empty()) {
    if (sweep_sizes.empty())
      throw std::invalid_argument("stats --sweep needs --sweep-sizes");
    std::vector<double> sizes;
    {
      std::stringstream ss(sweep_sizes);
      std::string tok;
      while (std::getline(ss, tok, ',')) sizes.push_back(std::stod(tok));
    }
    if (sizes.empty())
      throw std::invalid_argument("stats --sweep: empty size list");
    SweepQuantity q;
    DensityProfile prof = cfg.profile;
    if (sweep == "h_box") { q = SweepQuantity::h_abs; prof.kind = ProfileKind::uniform_box; }
    else if (sweep == "h_gauss") { q = SweepQuantity::h_abs; prof.kind = ProfileKind::gaussian; }
    else if (sweep == "delta_gauss") { q = SweepQuantity::delta; prof.kind = ProfileKind::gaussian; }
    else if (sweep == "w_n") q = SweepQuantity::w_std;
    else throw std::invalid_argument("stats --sweep: unknown kind '" + sweep + "'");

    std::vector<SweepPoint> pts;
    for (double s : sizes) {
      SweepPoint pt;
      pt.profile = prof;
      if (q == SweepQuantity::w_std) {
        pt.n_atoms = static_cast<int>(s);
        pt.profile.size_k = cfg.profile.size_k;
      } else {
        pt.profile.size_k = s;
        pt.n_atoms = sweep_n;
      }
      pt.realizations = sweep_realizations;
      pt.master_seed = cfg.master_seed;
      pt.alpha = cfg.alphas.front();
      pts.push_back(pt);
    }
    const ScalingFit fit = scaling_sweep(pts, q, opts);
    CsvTable table;
    table.add_column("x");
    table.add_column("estimate");
    table.add_column("stderr");
    table.add_column("mean_abs");
    table.add_column("floor");
    table.add_column("mean_re");
    table.add_column("mean_im");
    for (const auto& s : fit.samples) {
      table.push(0, s.x);
      table.push(1, s.estimate);
      table.push(2, s.stderr_est);
      table.push(3, s.mean_abs);
      table.push(4, s.floor);
      table.push(5, s.complex_mean.real());
      table.push(6, s.complex_mean.imag());
    }
    const fs::path sweep_csv = dir / "sweep_table.csv";
    write_file_atomic(sweep_csv, table.to_string());
    man.add_output(sweep_csv, table.rows());
    nlohmann::json jf;
    jf["kind"] = sweep;
    jf["slope"] = fit.slope;
    jf["slope_stderr"] = fit.slope_stderr;
    jf["intercept"] = fit.intercept;
    if (q == SweepQuantity::delta) {
      jf["c0"] = fit.c0;
      jf["c1"] = fit.c1;
      jf["c1_resolved"] = fit.c1_resolved;
    }
    man.set("sweep_fit", jf);
  }

  man.set_wall_time(seconds_since(t0));
  man.write(dir / "stats_manifest.json");
  std::cout << "stats: wrote " << samples_csv.string() << "\n";
  return 0;
}

// ---- rates ----

int cmd_rates(const CommonFlags& flags) {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = flags.build();
  const fs::path dir = prepare_out_dir(flags.out_dir);

  const long long r_total = cfg.realizations;
  std::vector<double> gf(static_cast<std::size_t>(r_total)),
      gb(static_cast<std::size_t>(r_total));
  std::vector<int> ns(static_cast<std::size_t>(r_total));
  long long clamped = 0;
  {
    const long long bs = detail::kBlockSize;
    std::vector<long long> block_clamps(
        static_cast<std::size_t>((r_total + bs - 1) / bs), 0);
    detail::parallel_index_blocks(
        r_total, flags.run_options().threads, [&](long long i) {
          const std::uint64_t base =
              child_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
          bool was_clamped = false;
          const int n = draw_atom_count(
              cfg.mean_n, cfg.atom_number_mode,
              child_seed(base, 0, seed_tag::atom_count), &was_clamped);
          const AtomCloud cloud = sample_cloud(
              cfg.profile, n, child_seed(base, 0, seed_tag::positions));
          const EmissionRates r = emission_rates(w_state(cloud), cloud);
          gf[static_cast<std::size_t>(i)] = r.gamma_forward;
          gb[static_cast<std::size_t>(i)] = r.gamma_backward;
          ns[static_cast<std::size_t>(i)] = n;
          if (was_clamped) ++block_clamps[static_cast<std::size_t>(i / bs)];
        });
    for (long long c : block_clamps) clamped += c;
  }

  CsvTable table;
  table.add_column("realization");
  table.add_column("n_atoms");
  table.add_column("gamma_forward");
  table.add_column("gamma_backward");
  RunningStat sf, sb;
  for (long long i = 0; i < r_total; ++i) {
    table.push(0, static_cast<double>(i));
    table.push(1, static_cast<double>(ns[static_cast<std::size_t>(i)]));
    table.push(2, gf[static_cast<std::size_t>(i)]);
    table.push(3, gb[static_cast<std::size_t>(i)]);
    sf.add(gf[static_cast<std::size_t>(i)]);
    sb.add(gb[static_cast<std::size_t>(i)]);
  }
  const fs::path csv = dir / "rates.csv";
  write_file_atomic(csv, table.to_string());

  RunManifest man("rates");
  man.set_config(cfg);
  man.set_counter("poisson_clamped", clamped);
  man.set("gamma_forward_mean", sf.mean);
  man.set("gamma_forward_stderr", sf.stderr_mean());
  man.set("gamma_backward_mean", sb.mean);
  man.set("gamma_backward_stderr", sb.stderr_mean());
  man.add_output(csv, table.rows());
  man.set_wall_time(seconds_since(t0));
  man.write(dir / "rates_manifest.json");
  std::cout << "rates: <Gamma_F> = " << sf.mean << ", <Gamma_B> = " << sb.mean
            << " (" << r_total << " realizations)\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  // our own pool owns the parallelism; keep BLAS single-threaded
  setenv("OPENBLAS_NUM_THREADS", "1", 0);

  CLI::App app{"Collective single-excitation dynamics of an atomic cloud "
               "coupled to a one-dimensional waveguide"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "waveqed 0.1.0");

  // theory
  auto* theory_cmd = app.add_subcommand(
      "theory", "closed-form tables: (s, chi, chi^2, P_analytic)");
  double th_n = 1000.0, th_tmax = 40.0;
  int th_points = 2000;
  std::string th_out = ".";
  theory_cmd->add_option("--n", th_n, "atom number entering tau, tau_dp");
  theory_cmd->add_option("--tmax-tau", th_tmax, "grid end in units of tau");
  theory_cmd->add_option("--points", th_points, "grid points");
  theory_cmd->add_option("--out-dir", th_out, "output directory");

  // ensemble
  auto* ens_cmd = app.add_subcommand(
      "ensemble", "disorder-averaged survival curve of the bright state");
  CommonFlags ens_flags;
  ens_flags.attach(ens_cmd);
  std::string preset;
  ens_cmd->add_option("--reproduce", preset,
                      "preset parameter set: fig2 | fig3");

  // stats
  auto* stats_cmd = app.add_subcommand(
      "stats", "forward/backward overlap statistics and scaling sweeps");
  CommonFlags stats_flags;
  stats_flags.attach(stats_cmd, /*with_grid=*/false);
  std::string sweep, sweep_sizes;
  int sweep_n = 100000, sweep_realizations = 200;
  stats_cmd->add_option("--sweep", sweep,
                        "h_box | h_gauss | delta_gauss | w_n");
  stats_cmd->add_option("--sweep-sizes", sweep_sizes,
                        "comma-separated size_k (or N for w_n)");
  stats_cmd->add_option("--sweep-n", sweep_n, "atoms per sweep realization");
  stats_cmd->add_option("--sweep-realizations", sweep_realizations,
                        "realizations per sweep point");

  // rates
  auto* rates_cmd = app.add_subcommand(
      "rates", "per-realization directed emission rates of the bright state");
  CommonFlags rates_flags;
  rates_flags.attach(rates_cmd, /*with_grid=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (theory_cmd->parsed())
      return cmd_theory(th_n, th_tmax, th_points, th_out);
    if (ens_cmd->parsed()) {
      apply_preset(preset, ens_flags);
      return cmd_ensemble(ens_flags, preset);
    }
    if (stats_cmd->parsed())
      return cmd_stats(stats_flags, sweep, sweep_sizes, sweep_n,
                       sweep_realizations);
    if (rates_cmd->parsed()) return cmd_rates(rates_flags);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
