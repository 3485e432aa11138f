#pragma once

// Disorder-averaging engine. Realizations are independent; each draws its
// seed from (master_seed, index) through a counter-based hash, workers pull
// fixed-size index blocks, and block results merge in index order, so every
// result is bit-identical for any worker count.

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "waveqed/cloud.hpp"
#include "waveqed/dynamics.hpp"
#include "waveqed/stats.hpp"
#include "waveqed/theory.hpp"

namespace waveqed {

struct TimeGridSpec {
  double tmax_tau = 20.0; // end of the grid in units of tau
  int points = 400;       // grid size including t = 0
};

struct ExperimentConfig {
  DensityProfile profile = gaussian_profile(100.0);
  double mean_n = 100.0;
  AtomNumberMode atom_number_mode = AtomNumberMode::fixed;
  int realizations = 1000;
  TimeGridSpec time;
  std::uint64_t master_seed = 1;
  Evolution which = Evolution::hs;
  std::vector<int> alphas = {1};

  void validate() const {
    profile.validate();
    if (!(mean_n >= 1.0))
      throw std::invalid_argument("config: mean_n must be >= 1");
    if (realizations < 1)
      throw std::invalid_argument("config: realizations must be >= 1");
    if (!(time.tmax_tau > 0.0) || time.points < 2)
      throw std::invalid_argument("config: bad time grid");
    for (int a : alphas)
      if (a % 2 == 0)
        throw std::invalid_argument("config: alphas must be odd");
  }

  std::string canonical_string() const {
    std::ostringstream os;
    os << "profile.kind=" << to_string(profile.kind)
       << ";profile.size_k=" << profile.size_k << ";pieces=";
    for (const auto& p : profile.pieces)
      os << "(" << p.lo << "," << p.hi << "," << p.weight << ")";
    os << ";mean_n=" << mean_n
       << ";atom_number_mode=" << to_string(atom_number_mode)
       << ";realizations=" << realizations << ";tmax_tau=" << time.tmax_tau
       << ";points=" << time.points << ";master_seed=" << master_seed
       << ";which=" << static_cast<int>(which) << ";alphas=";
    for (int a : alphas) os << a << ",";
    return os.str();
  }

  std::uint64_t hash() const {
    const std::string s = canonical_string();
    return fnv1a64(s.data(), s.size());
  }
};

struct RunOptions {
  int threads = 0;          // 0 = hardware concurrency
  bool keep_curves = false; // persist per-realization curves (bootstrap)
};

struct EnsembleCurve {
  std::vector<double> times;     // units 1/gamma
  std::vector<double> times_tau; // same grid in units of tau(mean_n)
  std::vector<double> mean_p;
  std::vector<double> stderr_p;  // sample std / sqrt(R)
  long long realizations_done = 0;
  TimeScales scales;
  std::uint64_t config_hash = 0;
  long long poisson_clamped = 0; // zero draws clamped to one atom
};

struct EnsembleResult {
  EnsembleCurve curve;
  // row r = survival curve of realization r; filled when keep_curves is set
  std::vector<std::vector<double>> per_realization;
};

namespace detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

inline constexpr int kBlockSize = 32;

// Runs work(i) for i in [0, n) on a pool; work(i) must only touch state
// indexed by i or by i's block. Blocks are claimed atomically, so thread
// count never changes which indices share a block.
template <typename Work>
void parallel_index_blocks(long long n, int threads, Work&& work) {
  const long long n_blocks = (n + kBlockSize - 1) / kBlockSize;
  const int pool = static_cast<int>(
      std::min<long long>(resolve_threads(threads), n_blocks));
  if (pool <= 1) {
    for (long long i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<long long> next{0};
  std::vector<std::thread> ts;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  ts.reserve(static_cast<std::size_t>(pool));
  for (int t = 0; t < pool; ++t) {
    ts.emplace_back([&] {
      for (;;) {
        const long long b = next.fetch_add(1);
        if (b >= n_blocks) return;
        const long long lo = b * kBlockSize;
        const long long hi = std::min(n, lo + kBlockSize);
        try {
          for (long long i = lo; i < hi; ++i) work(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : ts) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct RealizationDraw {
  AtomCloud cloud;
  bool clamped = false;
};

inline RealizationDraw draw_realization(const ExperimentConfig& cfg,
                                        long long index) {
  const std::uint64_t base = child_seed(cfg.master_seed,
                                        static_cast<std::uint64_t>(index));
  bool clamped = false;
  const int n = draw_atom_count(cfg.mean_n, cfg.atom_number_mode,
                                child_seed(base, 0, seed_tag::atom_count),
                                &clamped);
  AtomCloud cloud = sample_cloud(cfg.profile, n,
                                 child_seed(base, 0, seed_tag::positions));
  return RealizationDraw{std::move(cloud), clamped};
}

inline std::vector<double> make_time_grid(const ExperimentConfig& cfg) {
  const TimeScales scales = TimeScales::for_atoms(cfg.mean_n);
  std::vector<double> times(static_cast<std::size_t>(cfg.time.points));
  const double dt =
      cfg.time.tmax_tau * scales.tau / static_cast<double>(cfg.time.points - 1);
  for (int k = 0; k < cfg.time.points; ++k)
    times[static_cast<std::size_t>(k)] = dt * k;
  return times;
}

} // namespace detail

// Mean and standard error of the single-realization survival curve over
// `realizations` independent clouds. Realization r fails loudly with its
// index attached.
inline EnsembleResult run_survival_ensemble(const ExperimentConfig& cfg,
                                            const RunOptions& opts = {}) {
  cfg.validate();
  const std::vector<double> times = detail::make_time_grid(cfg);
  const long long r_total = cfg.realizations;
  const long long n_blocks =
      (r_total + detail::kBlockSize - 1) / detail::kBlockSize;

  std::vector<RunningCurveStat> block_stats(
      static_cast<std::size_t>(n_blocks), RunningCurveStat(times.size()));
  std::vector<long long> block_clamps(static_cast<std::size_t>(n_blocks), 0);
  EnsembleResult result;
  if (opts.keep_curves)
    result.per_realization.resize(static_cast<std::size_t>(r_total));

  detail::parallel_index_blocks(r_total, opts.threads, [&](long long i) {
    try {
      const auto draw = detail::draw_realization(cfg, i);
      SurvivalCurve sc = survival_curve(draw.cloud, times, cfg.which);
      const auto b = static_cast<std::size_t>(i / detail::kBlockSize);
      block_stats[b].add(sc.values);
      if (draw.clamped) ++block_clamps[b];
      if (opts.keep_curves)
        result.per_realization[static_cast<std::size_t>(i)] =
            std::move(sc.values);
    } catch (const std::exception& e) {
      throw std::runtime_error("realization " + std::to_string(i) +
                               " failed: " + e.what());
    }
  });

  RunningCurveStat total(times.size());
  long long clamped = 0;
  for (long long b = 0; b < n_blocks; ++b) {
    total.merge(block_stats[static_cast<std::size_t>(b)]);
    clamped += block_clamps[static_cast<std::size_t>(b)];
  }

  EnsembleCurve& curve = result.curve;
  curve.times = times;
  curve.scales = TimeScales::for_atoms(cfg.mean_n);
  curve.times_tau.reserve(times.size());
  for (double t : times) curve.times_tau.push_back(t / curve.scales.tau);
  curve.mean_p = total.mean;
  curve.stderr_p.resize(times.size());
  for (std::size_t k = 0; k < times.size(); ++k)
    curve.stderr_p[k] = total.stderr_at(k);
  curve.realizations_done = total.n;
  curve.config_hash = cfg.hash();
  curve.poisson_clamped = clamped;
  return result;
}

struct WSampleSummary {
  std::vector<double> samples; // |w_alpha|^2 per realization, in index order
  double mean = 0.0;
  double variance = 0.0;
  long long poisson_clamped = 0;
};

// |w_alpha|^2 across the ensemble with streaming mean/variance.
inline WSampleSummary collect_w_samples(const ExperimentConfig& cfg, int alpha,
                                        const RunOptions& opts = {}) {
  cfg.validate();
  if (alpha % 2 == 0)
    throw std::invalid_argument("collect_w_samples: alpha must be odd");
  const long long r_total = cfg.realizations;
  const long long n_blocks =
      (r_total + detail::kBlockSize - 1) / detail::kBlockSize;
  WSampleSummary out;
  out.samples.resize(static_cast<std::size_t>(r_total));
  std::vector<RunningStat> block_stats(static_cast<std::size_t>(n_blocks));
  std::vector<long long> block_clamps(static_cast<std::size_t>(n_blocks), 0);

  detail::parallel_index_blocks(r_total, opts.threads, [&](long long i) {
    const auto draw = detail::draw_realization(cfg, i);
    const double w2 = std::norm(w_alpha(draw.cloud, alpha).value);
    const auto b = static_cast<std::size_t>(i / detail::kBlockSize);
    out.samples[static_cast<std::size_t>(i)] = w2;
    block_stats[b].add(w2);
    if (draw.clamped) ++block_clamps[b];
  });

  RunningStat total;
  for (long long b = 0; b < n_blocks; ++b) {
    total.merge(block_stats[static_cast<std::size_t>(b)]);
    out.poisson_clamped += block_clamps[static_cast<std::size_t>(b)];
  }
  out.mean = total.mean;
  out.variance = total.variance();
  return out;
}

struct DephasingFit {
  double tau_dp = 0.0;     // minimizer, units 1/gamma
  double stderr = 0.0;     // bootstrap standard error (0 without curves)
  double sse = 0.0;
  bool converged = false;
  int n_boot = 0;
};

namespace detail {

// Model curve evaluator for the dephasing fit: the analytic survival with
// tau fixed by the curve's scales and tau_dp free. The cos/(2n+1)^2 table
// does not depend on tau_dp, so each candidate costs one pass; f is read
// from a cubic Hermite table (absolute error < 1e-9).
class DephasingModel {
public:
  DephasingModel(const std::vector<double>& times_tau, double tau,
                 double tau_dp_max_arg)
      : s_(times_tau), tau_(tau) {
    m_ = static_cast<std::int64_t>(
        std::ceil(1.5 * (s_.empty() ? 0.0 : s_.back())));
    if (m_ < 64) m_ = 64;
    cos_table_.resize(s_.size() * static_cast<std::size_t>(m_));
    for (std::size_t k = 0; k < s_.size(); ++k)
      for (std::int64_t n = 0; n < m_; ++n) {
        const double u = 2.0 * static_cast<double>(n) + 1.0;
        cos_table_[k * static_cast<std::size_t>(m_) +
                   static_cast<std::size_t>(n)] = std::cos(s_[k] / u) / (u * u);
      }
    cos_tail_ = odd_power_tail(2, m_);
    // f table on [0, xmax]
    xmax_ = std::max(4.0, tau_dp_max_arg);
    const int pts = 8192;
    fx_.resize(pts + 1);
    fd_.resize(pts + 1);
    dx_ = xmax_ / pts;
    for (int i = 0; i <= pts; ++i) {
      const double x = dx_ * i;
      const double d = dawson(x);
      fx_[static_cast<std::size_t>(i)] = x * d;
      fd_[static_cast<std::size_t>(i)] = d + x * (1.0 - 2.0 * x * d);
    }
  }

  double f_interp(double x) const {
    if (x >= xmax_) return f_damp(x);
    const double u = x / dx_;
    const auto i = static_cast<std::size_t>(u);
    const double t = u - static_cast<double>(i);
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    return h00 * fx_[i] + h10 * dx_ * fd_[i] + h01 * fx_[i + 1] +
           h11 * dx_ * fd_[i + 1];
  }

  // Sum of squared deviations between the model at tau_dp and `curve`.
  double sse(double tau_dp, const std::vector<double>& curve) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < s_.size(); ++k) {
      const double t = s_[k] * tau_;
      const double q = t / (2.0 * tau_dp);
      double first = cos_tail_;
      double second = 0.0;
      const double* row = &cos_table_[k * static_cast<std::size_t>(m_)];
      for (std::int64_t n = m_ - 1; n >= 0; --n) {
        const double u = 2.0 * static_cast<double>(n) + 1.0;
        const double br = 1.0 - 2.0 * f_interp(q / u);
        first += row[n] * br;
        second +=
            2.0 / (u * u * u * u) * (br * br - (1.0 - f_interp(2.0 * q / u)));
      }
      const double a = 8.0 / (kPi * kPi) * first;
      const double model = a * a - 16.0 / (kPi * kPi * kPi * kPi) * second;
      const double r = model - curve[k];
      acc += r * r;
    }
    return acc;
  }

private:
  std::vector<double> s_;
  double tau_;
  std::int64_t m_ = 64;
  std::vector<double> cos_table_;
  double cos_tail_ = 0.0;
  std::vector<double> fx_, fd_;
  double dx_ = 1.0, xmax_ = 4.0;
};

inline double golden_minimize(const std::function<double(double)>& f,
                              double lo, double hi, int iters = 70) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && (b - a) > 1e-6 * hi; ++i) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

} // namespace detail

// Least-squares fit of the analytic curve shape with tau_dp as the only
// free parameter (saturation pinned at 1/6 by the model itself). A bootstrap
// standard error is produced when per-realization curves are available.
inline DephasingFit fit_dephasing(
    const EnsembleCurve& curve,
    const std::vector<std::vector<double>>& per_realization = {},
    int n_boot = 50, std::uint64_t boot_seed = 1,
    const RunOptions& opts = {}) {
  if (curve.times_tau.empty() || curve.mean_p.empty())
    throw std::invalid_argument("fit_dephasing: empty curve");
  const double nominal = curve.scales.tau_dp;
  if (curve.times.back() < 10.0 * nominal)
    throw std::invalid_argument(
        "fit_dephasing: curve must span at least 10 nominal tau_dp");
  const double lo = 0.2 * nominal, hi = 3.0 * nominal;
  detail::DephasingModel model(curve.times_tau, curve.scales.tau,
                               curve.times.back() / lo);

  DephasingFit fit;
  fit.tau_dp = detail::golden_minimize(
      [&](double td) { return model.sse(td, curve.mean_p); }, lo, hi);
  fit.sse = model.sse(fit.tau_dp, curve.mean_p);
  fit.converged =
      fit.tau_dp > lo * 1.02 && fit.tau_dp < hi * 0.98; // not at a bound
  if (!fit.converged)
    throw std::runtime_error(
        "fit_dephasing: minimizer at search bound, tau_dp=" +
        std::to_string(fit.tau_dp));

  if (!per_realization.empty() && n_boot > 0) {
    const auto r = static_cast<long long>(per_realization.size());
    std::vector<double> estimates(static_cast<std::size_t>(n_boot), 0.0);
    detail::parallel_index_blocks(n_boot, opts.threads, [&](long long bi) {
      Rng rng(child_seed(boot_seed, static_cast<std::uint64_t>(bi),
                         seed_tag::bootstrap));
      std::vector<double> mean(curve.mean_p.size(), 0.0);
      for (long long s = 0; s < r; ++s) {
        const auto pick = static_cast<std::size_t>(rng.raw() %
                                                   static_cast<std::uint64_t>(r));
        const auto& row = per_realization[pick];
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += row[k];
      }
      for (auto& v : mean) v /= static_cast<double>(r);
      estimates[static_cast<std::size_t>(bi)] = detail::golden_minimize(
          [&](double td) { return model.sse(td, mean); }, lo, hi, 50);
    });
    RunningStat s;
    for (double e : estimates) s.add(e);
    fit.stderr = std::sqrt(s.variance());
    fit.n_boot = n_boot;
  }
  return fit;
}

struct RevivalPeak {
  double t_over_tau = 0.0;
  double value = 0.0;
};

// Local maxima of the mean curve above `threshold`, after a short moving
// average so Monte Carlo noise does not mint spurious peaks. Peaks closer
// than min_sep_tau keep only the higher one. t = 0 is never a peak.
inline std::vector<RevivalPeak> revival_peaks(const EnsembleCurve& curve,
                                              double threshold,
                                              double smooth_tau = 0.3,
                                              double min_sep_tau = 3.0) {
  const std::size_t n = curve.mean_p.size();
  if (n < 3) return {};
  const double dt_tau = curve.times_tau[1] - curve.times_tau[0];
  const int hw = std::max(1, static_cast<int>(smooth_tau / dt_tau));
  std::vector<double> smooth(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k > static_cast<std::size_t>(hw) ? k - hw : 0;
    const std::size_t hi = std::min(n - 1, k + static_cast<std::size_t>(hw));
    double acc = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) acc += curve.mean_p[j];
    smooth[k] = acc / static_cast<double>(hi - lo + 1);
  }
  std::vector<RevivalPeak> peaks;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (smooth[k] <= threshold) continue;
    if (!(smooth[k] >= smooth[k - 1] && smooth[k] > smooth[k + 1])) continue;
    if (curve.times_tau[k] < min_sep_tau) continue; // skip the t=0 shoulder
    if (!peaks.empty() &&
        curve.times_tau[k] - peaks.back().t_over_tau < min_sep_tau) {
      if (smooth[k] > peaks.back().value)
        peaks.back() = RevivalPeak{curve.times_tau[k], smooth[k]};
      continue;
    }
    peaks.push_back(RevivalPeak{curve.times_tau[k], smooth[k]});
  }
  return peaks;
}

// --- scaling studies over cloud size and atom number ---

enum class SweepQuantity { h_abs, delta, w_std };

struct SweepPoint {
  DensityProfile profile;
  int n_atoms = 1000;
  int realizations = 200;
  std::uint64_t master_seed = 1;
  int alpha = 1;
  int beta = 1;
};

struct SweepSample {
  double x = 0.0;            // size_k (h, delta) or n_atoms (w_std)
  double estimate = 0.0;     // |complex mean| (h, delta) or std|w| (w_std)
  double stderr_est = 0.0;
  double mean_abs = 0.0;     // ensemble <|.|>
  double floor = 0.0;        // 1/sqrt(N) fluctuation floor of the estimator
  Complex complex_mean{0.0, 0.0};
};

struct ScalingFit {
  std::vector<double> x_values;
  std::vector<double> y_values;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;
  bool c1_resolved = false;
  std::vector<double> residuals;
  std::vector<SweepSample> samples;
};

namespace detail {

inline Complex sweep_value(const SweepPoint& pt, const AtomCloud& cloud,
                           SweepQuantity q) {
  switch (q) {
    case SweepQuantity::h_abs: return h_element(cloud, pt.alpha, pt.beta);
    case SweepQuantity::delta: return delta_alpha(cloud, pt.alpha);
    case SweepQuantity::w_std:
      return Complex(std::abs(w_alpha(cloud, pt.alpha).value), 0.0);
  }
  throw std::logic_error("sweep_value: bad quantity");
}

inline SweepSample measure_point(const SweepPoint& pt, SweepQuantity q,
                                 const RunOptions& opts) {
  const long long r_total = pt.realizations;
  const long long n_blocks = (r_total + kBlockSize - 1) / kBlockSize;
  std::vector<RunningStat> re(static_cast<std::size_t>(n_blocks)),
      im(static_cast<std::size_t>(n_blocks)),
      mag(static_cast<std::size_t>(n_blocks));
  parallel_index_blocks(r_total, opts.threads, [&](long long i) {
    const AtomCloud cloud =
        sample_cloud(pt.profile, pt.n_atoms,
                     child_seed(pt.master_seed, static_cast<std::uint64_t>(i),
                                seed_tag::positions));
    const Complex v = sweep_value(pt, cloud, q);
    const auto b = static_cast<std::size_t>(i / kBlockSize);
    re[b].add(v.real());
    im[b].add(v.imag());
    mag[b].add(std::abs(v));
  });
  RunningStat tre, tim, tmag;
  for (long long b = 0; b < n_blocks; ++b) {
    tre.merge(re[static_cast<std::size_t>(b)]);
    tim.merge(im[static_cast<std::size_t>(b)]);
    tmag.merge(mag[static_cast<std::size_t>(b)]);
  }
  SweepSample s;
  s.x = q == SweepQuantity::w_std ? static_cast<double>(pt.n_atoms)
                                  : pt.profile.size_k;
  s.complex_mean = Complex(tre.mean, tim.mean);
  s.mean_abs = tmag.mean;
  if (q == SweepQuantity::w_std) {
    s.estimate = std::sqrt(tmag.variance()); // std of |w|
    s.stderr_est = s.estimate / std::sqrt(2.0 * static_cast<double>(tmag.n));
  } else {
    // deterministic-limit part: the complex ensemble mean suppresses the
    // 1/sqrt(N) single-draw fluctuation floor by a further 1/sqrt(R)
    s.estimate = std::abs(s.complex_mean);
    s.stderr_est = std::sqrt((tre.variance() + tim.variance()) /
                             static_cast<double>(tre.n));
  }
  s.floor = std::sqrt(kPi / (4.0 * static_cast<double>(pt.n_atoms))) /
            std::abs(static_cast<double>(pt.beta));
  return s;
}

} // namespace detail

// Measures h / delta / |w| across sweep points and fits the log-log slope
// of the deterministic part. For delta sweeps, c0 comes from the leading
// 2 pi / size_k coefficient and c1 from a multi-alpha fit at the last point.
inline ScalingFit scaling_sweep(const std::vector<SweepPoint>& points,
                                SweepQuantity quantity,
                                const RunOptions& opts = {}) {
  if (points.size() < 3)
    throw std::invalid_argument("scaling_sweep: need at least 3 points");
  ScalingFit fit;
  for (const auto& pt : points) {
    fit.samples.push_back(detail::measure_point(pt, quantity, opts));
    fit.x_values.push_back(fit.samples.back().x);
    fit.y_values.push_back(fit.samples.back().estimate);
  }
  bool positive = true;
  for (double y : fit.y_values) positive = positive && y > 0.0;
  if (positive) {
    const LinearFit lf = loglog_fit(fit.x_values, fit.y_values);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.slope_stderr = lf.slope_stderr;
    fit.residuals = lf.residuals;
  }

  if (quantity == SweepQuantity::delta) {
    // c0: fit Re<delta> = c0 * (2 pi / size_k) through the origin
    double num = 0.0, den = 0.0;
    for (const auto& s : fit.samples) {
      const double lam_over_sigma = 2.0 * kPi / s.x;
      num += s.complex_mean.real() * lam_over_sigma;
      den += lam_over_sigma * lam_over_sigma;
    }
    fit.c0 = den > 0.0 ? num / den : 0.0;
    // c1: slope of Re<delta_alpha> in alpha at the widest cloud
    const SweepPoint& last = points.back();
    std::vector<double> av, dv;
    for (int a : {1, 3, 5, 7}) {
      SweepPoint pt = last;
      pt.alpha = a;
      const SweepSample s = detail::measure_point(pt, quantity, opts);
      av.push_back(static_cast<double>(a));
      dv.push_back(s.complex_mean.real());
    }
    const LinearFit af = linear_fit(av, dv);
    const double lam2 = std::pow(2.0 * kPi / last.profile.size_k, 2);
    fit.c1 = af.slope / lam2;
    fit.c1_resolved =
        af.slope_stderr > 0.0 && std::abs(af.slope) > 3.0 * af.slope_stderr;
  }
  return fit;
}

} // namespace waveqed
