#pragma once

// Closed-form results for the collective single-excitation dynamics: the
// Dawson function, the universal survival amplitude chi(s), the analytic
// disorder-averaged survival probability with its 1/6 saturation, and the
// exact/asymptotic overlaps and energies of the forward-photon eigenstates.
//
// Units: hbar = 1 and the single-direction emission rate gamma = 1 unless a
// rate is passed explicitly. Time enters either as t (units 1/gamma) or as
// the rescaled s = t/tau with tau = pi/(N gamma).

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace waveqed {

inline constexpr double kPi = 3.14159265358979323846;

struct SeriesAccuracy {
  double abs_tol = 1e-10;
  std::int64_t max_terms = 1'000'000;
};

struct series_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// tau = pi/(N gamma) sets the revival period; disorder damps the revivals on
// tau_dp = sqrt(N) tau.
struct TimeScales {
  double tau = 0.0;
  double tau_dp = 0.0;

  static TimeScales for_atoms(double n_atoms, double gamma = 1.0) {
    const double tau = kPi / (n_atoms * gamma);
    return TimeScales{tau, std::sqrt(n_atoms) * tau};
  }
};

namespace detail {

// Maclaurin: D(x) = sum_n (-1)^n 2^n x^(2n+1) / (2n+1)!!
inline double dawson_maclaurin(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int n = 0; n < 200; ++n) {
    term *= -2.0 * x2 / static_cast<double>(2 * n + 3);
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return sum;
}

// Asymptotic: D(x) = 1/(2x) sum_n (2n-1)!!/(2x^2)^n, truncated at the
// smallest term.
inline double dawson_asymptotic(double x) {
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0 / (2.0 * x);
  double sum = term;
  for (int n = 1; n < 60; ++n) {
    const double next = term * static_cast<double>(2 * n - 1) * inv2x2;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return sum;
}

// Mid-range sampling series (Rybicki): D(x) = lim 1/sqrt(pi) *
// sum_{n odd} exp(-(x - n h)^2)/n, discretization error ~ exp(-(pi/2h)^2).
inline double dawson_sampling(double x) {
  constexpr double h = 0.25;
  constexpr double reach = 9.0; // exp(-81) below double precision
  const long lo = static_cast<long>(std::ceil((x - reach) / h));
  const long hi = static_cast<long>(std::floor((x + reach) / h));
  double sum = 0.0;
  for (long n = lo | 1L; n <= hi; n += 2) {
    const double d = x - static_cast<double>(n) * h;
    sum += std::exp(-d * d) / static_cast<double>(n);
  }
  return sum / std::sqrt(kPi);
}

} // namespace detail

// Dawson function D(x) = exp(-x^2) int_0^x exp(t^2) dt, absolute accuracy
// better than 1e-13 on the real line.
inline double dawson(double x) {
  const double ax = std::abs(x);
  if (ax <= 2.5) return detail::dawson_maclaurin(x);
  if (ax >= 6.0) return detail::dawson_asymptotic(x);
  return x < 0 ? -detail::dawson_sampling(ax) : detail::dawson_sampling(ax);
}

// f(x) = x D(x); even, f(0) = 0, f(x -> inf) = 1/2.
inline double f_damp(double x) {
  if (std::isinf(x)) return 0.5;
  return x * dawson(x);
}

namespace detail {

// Tail sums S_p(M) = sum_{n >= M} (2n+1)^(-p) by Euler-Maclaurin; absolute
// error below (2M+1)^(-p-5) for even p >= 2.
inline double odd_power_tail(int p, std::int64_t m) {
  const double u = 2.0 * static_cast<double>(m) + 1.0;
  const double integral = std::pow(u, 1 - p) / (2.0 * (p - 1));
  const double f0 = std::pow(u, -p);
  const double f1 = -2.0 * p * std::pow(u, -p - 1);
  const double f3 = -8.0 * p * (p + 1) * (p + 2) * std::pow(u, -p - 3);
  return integral + 0.5 * f0 - f1 / 12.0 + f3 / 720.0;
}

} // namespace detail

// Universal survival amplitude
//   chi(s) = (8/pi^2) sum_{n>=0} cos(s/(2n+1)) / (2n+1)^2.
// The series is summed directly up to M ~ max(64, |s|) and the remainder is
// accumulated analytically by expanding cos about zero argument, so the
// result meets abs_tol without millions of terms.
inline double chi(double s, const SeriesAccuracy& acc = {}) {
  if (!(acc.abs_tol > 0.0))
    throw std::invalid_argument("chi: abs_tol must be positive");
  const double as = std::abs(s);
  std::int64_t m = static_cast<std::int64_t>(std::ceil(1.5 * as)) + 1;
  if (m < 64) m = 64;
  if (m > acc.max_terms)
    throw series_error("chi: max_terms exhausted before tolerance");

  double sum = 0.0;
  for (std::int64_t n = m - 1; n >= 0; --n) { // small terms first
    const double u = 2.0 * static_cast<double>(n) + 1.0;
    sum += std::cos(s / u) / (u * u);
  }

  // Tail: sum_{n>=M} cos(s/(2n+1))/(2n+1)^2
  //     = sum_j (-1)^j s^(2j)/(2j)! * S_{2j+2}(M), with |s/(2M+1)| <= 1/2.
  double coeff = 1.0;
  double tail = 0.0;
  for (int j = 0; j < 16; ++j) {
    const double term = coeff * detail::odd_power_tail(2 * j + 2, m);
    tail += term;
    if (std::abs(term) < 1e-18 && j > 0) break;
    coeff *= -s * s / ((2.0 * j + 1.0) * (2.0 * j + 2.0));
  }
  sum += tail;

  // Residual error: Euler-Maclaurin remainder plus Taylor truncation; both
  // are far below any sane tolerance once M >= max(64, |s|).
  const double err_bound = 1e-14;
  if (err_bound > acc.abs_tol)
    throw series_error("chi: requested tolerance below method accuracy");
  return 8.0 / (kPi * kPi) * sum;
}

// Survival probability of the phase-matched state under the forward-photon
// part alone, [chi(t/tau)]^2.
inline double p_universal(double t_over_tau, const SeriesAccuracy& acc = {}) {
  const double c = chi(t_over_tau, acc);
  return c * c;
}

// Long-time saturation value sum_n (2/(pi(2n+1)))^4 = 1/6, in closed form.
inline double saturation() { return 1.0 / 6.0; }

namespace detail {

// Taylor coefficients of g(y) = [1 - 2 f(y)]^2 - [1 - f(2y)]
//                             = -4 y^4 + (32/3) y^6 - (4816/315) y^8 + ...
// used for the analytic tail of the incoherent sum.
inline double incoherent_tail(double q, std::int64_t m) {
  const double q2 = q * q;
  return 2.0 * (-4.0 * q2 * q2 * odd_power_tail(8, m) +
                (32.0 / 3.0) * q2 * q2 * q2 * odd_power_tail(10, m) -
                (4816.0 / 315.0) * q2 * q2 * q2 * q2 * odd_power_tail(12, m));
}

// Tail of sum cos(s/u)/u^2 * [1 - 2 f(q/u)] for n >= M via the product of
// the two even Taylor expansions; valid for max(|s|, |q|) <= (2M+1)/2.
inline double coherent_tail(double s, double q, std::int64_t m) {
  // cos coefficients c_j s^(2j); bracket coefficients b_k q^(2k) with
  // b_0 = 1, b_{k+1} = (-1)^(k+1) 2^(k+1)/(2k+1)!!.
  constexpr int kOrder = 14;
  double c[kOrder], b[kOrder];
  c[0] = 1.0;
  b[0] = 1.0;
  double fact = 1.0, pow2 = 1.0, dfact = 1.0; // dfact = (2j-1)!!
  for (int j = 1; j < kOrder; ++j) {
    fact *= (2.0 * j - 1.0) * (2.0 * j);
    c[j] = (j % 2 ? -1.0 : 1.0) * std::pow(s, 2 * j) / fact;
    pow2 *= 2.0;
    if (j >= 2) dfact *= 2.0 * j - 1.0;
    b[j] = (j % 2 ? -1.0 : 1.0) * pow2 / dfact * std::pow(q, 2 * j);
  }
  double tail = 0.0;
  for (int total = 0; total < kOrder; ++total) {
    double coeff = 0.0;
    for (int j = 0; j <= total; ++j) coeff += c[j] * b[total - j];
    const double term = coeff * odd_power_tail(2 * total + 2, m);
    tail += term;
    if (total > 0 && std::abs(term) < 1e-18) break;
  }
  return tail;
}

} // namespace detail

// Disorder-averaged survival probability of the phase-matched state under
// the full exchange interaction:
//
//   P(t) = [ (8/pi^2) sum_n cos((t/tau)/(2n+1))/(2n+1)^2 (1 - 2 f(x_n)) ]^2
//        - (16/pi^4) sum_n 2/(2n+1)^4 [ (1 - 2 f(x_n))^2 - (1 - f(2 x_n)) ]
//
// with x_n = t/(2 tau_dp (2n+1)). The first-sum coefficient is 1/(2n+1)^2 so
// that P(0) = 1 exactly; the variant with coefficient 2/(2n+1)^2 evaluates
// to 4 at t = 0 and is not used. P saturates to 1/6 for t >> tau_dp, with a
// slow (tau_dp/t)^2/pi^2 approach from below.
inline double p_analytic(double t, const TimeScales& scales,
                         const SeriesAccuracy& acc = {}) {
  if (t < 0.0) throw std::invalid_argument("p_analytic: t must be >= 0");
  const double s = t / scales.tau;
  const double q = std::isinf(scales.tau_dp) ? 0.0 : t / (2.0 * scales.tau_dp);

  std::int64_t m =
      static_cast<std::int64_t>(std::ceil(1.5 * std::max(s, 2.0 * q))) + 1;
  if (m < 64) m = 64;
  if (m > acc.max_terms)
    throw series_error("p_analytic: max_terms exhausted before tolerance");

  double first = 0.0, second = 0.0;
  for (std::int64_t n = m - 1; n >= 0; --n) {
    const double u = 2.0 * static_cast<double>(n) + 1.0;
    const double br = 1.0 - 2.0 * f_damp(q / u);
    first += std::cos(s / u) / (u * u) * br;
    second += 2.0 / (u * u * u * u) * (br * br - (1.0 - f_damp(2.0 * q / u)));
  }
  first += detail::coherent_tail(s, q, m);
  second += detail::incoherent_tail(q, m);

  const double a = 8.0 / (kPi * kPi) * first;
  return a * a - 16.0 / (kPi * kPi * kPi * kPi) * second;
}

inline double p_analytic(double t, double n_atoms,
                         const SeriesAccuracy& acc = {}) {
  if (n_atoms < 1) throw std::invalid_argument("p_analytic: n_atoms < 1");
  return p_analytic(t, TimeScales::for_atoms(n_atoms), acc);
}

// --- exact finite-N spectral data of the forward-photon interaction ---

inline bool is_valid_alpha(int alpha, int n_atoms) {
  return (alpha % 2 != 0) && alpha >= -n_atoms && alpha < n_atoms;
}

// The N odd integers in [-N, N) indexing the exactly solvable spectrum.
inline std::vector<int> alpha_values(int n_atoms) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n_atoms));
  const int first = (n_atoms % 2 == 0) ? -n_atoms + 1 : -n_atoms;
  for (int a = first; a < n_atoms; a += 2) out.push_back(a);
  return out;
}

// Exact overlap magnitude |<W|alpha,F>| = 1/(N |sin(pi alpha / 2N)|); tends
// to 2/(pi |alpha|) for |alpha| << N.
inline double w_overlap_exact(int alpha, int n_atoms) {
  if (!is_valid_alpha(alpha, n_atoms))
    throw std::invalid_argument("w_overlap_exact: alpha out of range or even");
  const double n = static_cast<double>(n_atoms);
  return 1.0 / (n * std::abs(std::sin(kPi * alpha / (2.0 * n))));
}

// Large-N energy N gamma / (pi alpha); accurate for |alpha| << N, and in a
// disordered cloud of size k*sigma the eigenstates themselves survive only
// for |alpha| < k*sigma/(2 pi).
inline double energy_asymptotic(int alpha, int n_atoms, double gamma = 1.0) {
  if (alpha == 0 || alpha % 2 == 0)
    throw std::invalid_argument("energy_asymptotic: alpha must be odd");
  return static_cast<double>(n_atoms) * gamma / (kPi * alpha);
}

} // namespace waveqed
