#pragma once

// Streaming statistics, goodness-of-fit, and least-squares helpers used by
// the disorder-averaging engine and its analysis passes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace waveqed {

// Welford running mean/variance; mergeable so blocks can be combined in a
// fixed order independent of scheduling.
struct RunningStat {
  long long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d1 = x - mean;
    mean += d1 / static_cast<double>(n);
    m2 += d1 * (x - mean);
  }

  void merge(const RunningStat& o) {
    if (o.n == 0) return;
    if (n == 0) { *this = o; return; }
    const double d = o.mean - mean;
    const double nt = static_cast<double>(n + o.n);
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nt;
    mean += d * static_cast<double>(o.n) / nt;
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stderr_mean() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

// Per-time-point Welford accumulator for curves.
struct RunningCurveStat {
  long long n = 0;
  std::vector<double> mean;
  std::vector<double> m2;

  explicit RunningCurveStat(std::size_t points = 0)
      : mean(points, 0.0), m2(points, 0.0) {}

  void add(const std::vector<double>& curve) {
    if (mean.empty()) { mean.assign(curve.size(), 0.0); m2.assign(curve.size(), 0.0); }
    ++n;
    for (std::size_t k = 0; k < curve.size(); ++k) {
      const double d1 = curve[k] - mean[k];
      mean[k] += d1 / static_cast<double>(n);
      m2[k] += d1 * (curve[k] - mean[k]);
    }
  }

  void merge(const RunningCurveStat& o) {
    if (o.n == 0) return;
    if (n == 0) { *this = o; return; }
    const double nt = static_cast<double>(n + o.n);
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const double d = o.mean[k] - mean[k];
      m2[k] += o.m2[k] +
               d * d * static_cast<double>(n) * static_cast<double>(o.n) / nt;
      mean[k] += d * static_cast<double>(o.n) / nt;
    }
    n += o.n;
  }

  double stderr_at(std::size_t k) const {
    if (n < 2) return 0.0;
    return std::sqrt(m2[k] / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

// One-sided tail of the Kolmogorov distribution, Q(lambda) =
// 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
inline double kolmogorov_tail(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * (k % 2 ? 1.0 : -1.0) *
                        std::exp(-2.0 * k * k * lambda * lambda);
    q += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

// Critical value of the asymptotic one-sample KS statistic at `level`.
inline double kolmogorov_critical(double level) {
  double lo = 0.1, hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_tail(mid) > level) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct KsResult {
  double distance = 0.0;       // sup |F_n - F|
  double critical = 0.0;       // critical distance at the requested level
  double level = 0.01;
  bool accepted = false;
  std::size_t n_samples = 0;
};

// One-sample KS test against Exp(mean). Uses the asymptotic critical value
// critical = lambda(level)/sqrt(n).
inline KsResult ks_exponential(std::vector<double> samples,
                               double mean_hypothesis, double level = 0.01) {
  if (samples.size() < 100)
    throw std::invalid_argument("ks_exponential: need at least 100 samples");
  if (!(mean_hypothesis > 0.0))
    throw std::invalid_argument("ks_exponential: mean must be positive");
  for (double s : samples)
    if (s < 0.0)
      throw std::invalid_argument("ks_exponential: negative sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = 1.0 - std::exp(-samples[i] / mean_hypothesis);
    d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - f,
                             f - static_cast<double>(i) / n));
  }
  KsResult r;
  r.distance = d;
  r.level = level;
  r.critical = kolmogorov_critical(level) / std::sqrt(n);
  r.accepted = d < r.critical;
  r.n_samples = samples.size();
  return r;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
};

inline LinearFit linear_fit(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= n; my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: degenerate x");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  f.residuals.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    f.residuals.push_back(r);
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_stderr =
      x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return f;
}

// Log-log power-law fit y = C x^slope; inputs must be positive.
inline LinearFit loglog_fit(const std::vector<double>& x,
                            const std::vector<double>& y) {
  std::vector<double> lx, ly;
  lx.reserve(x.size()); ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("loglog_fit: nonpositive input");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly);
}

} // namespace waveqed
