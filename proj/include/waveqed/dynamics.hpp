#pragma once

// Single-realization machinery: dense Hermitian diagonalization, coherent
// and dissipative survival curves of the phase-matched state, eigenstate
// cross-couplings h_{alpha beta} and delta_alpha, forward/backward overlaps
// w_alpha, and the perturbed energy pairs they imply.

#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

#include "waveqed/cloud.hpp"
#include "waveqed/hamiltonian.hpp"
#include "waveqed/theory.hpp"

namespace waveqed {

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXcd eigenvectors; // orthonormal columns
};

struct eigensolver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Evolution { hs, hf, heff };

struct SurvivalCurve {
  std::vector<double> times;       // units 1/gamma
  std::vector<double> times_tau;   // same grid in units of tau
  std::vector<double> values;      // survival probability in [0, 1]
  TimeScales scales;
};

struct WOverlap {
  Complex value; // <alpha,B|alpha,F>

  double magnitude() const { return std::abs(value); }
  double phase() const { return std::arg(value); }
};

struct CrossCoupling {
  Complex h{0.0, 0.0};
  Complex delta{0.0, 0.0};
  int alpha = 0;
  int beta = 0;
};

// Dense Hermitian eigendecomposition (divide and conquer). Near-degenerate
// clusters are re-orthogonalized so downstream overlap sums stay clean.
inline SpectralDecomposition diagonalize(const HermitianOperator& op) {
  const Eigen::Index n = op.entries.rows();
  if (n != op.entries.cols())
    throw std::invalid_argument("diagonalize: matrix is not square");
  const double scale = op.entries.cwiseAbs().maxCoeff();
  if ((op.entries - op.entries.adjoint()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(scale, 1.0))
    throw std::invalid_argument("diagonalize: matrix is not Hermitian");

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = op.entries;
  const lapack_int info = LAPACKE_zheevd(
      LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
      reinterpret_cast<lapack_complex_double*>(out.eigenvectors.data()),
      static_cast<lapack_int>(n), out.eigenvalues.data());
  if (info != 0)
    throw eigensolver_error("diagonalize: zheevd failed, info=" +
                            std::to_string(info));

  // Gram-Schmidt inside clusters with gap < 1e-10 * rate * N.
  const double gap = 1e-10 * op.rate_unit * static_cast<double>(n);
  Eigen::Index lo = 0;
  while (lo < n) {
    Eigen::Index hi = lo + 1;
    while (hi < n && out.eigenvalues(hi) - out.eigenvalues(hi - 1) < gap) ++hi;
    for (Eigen::Index j = lo + 1; j < hi; ++j) {
      auto vj = out.eigenvectors.col(j);
      for (Eigen::Index k = lo; k < j; ++k) {
        const auto vk = out.eigenvectors.col(k);
        vj -= vk.dot(vj) * vk;
      }
      vj.normalize();
    }
    lo = hi;
  }
  return out;
}

namespace detail {

// |sum_j p_j e^{-i E_j t_k}|^2 on a uniform grid via per-mode phase
// recurrences; O(N) per time point.
inline std::vector<double> mode_sum_survival(const Eigen::VectorXd& energies,
                                             const Eigen::VectorXd& weights,
                                             const std::vector<double>& times) {
  const Eigen::Index n = energies.size();
  std::vector<Complex> z(static_cast<std::size_t>(n), Complex(1.0, 0.0));
  std::vector<Complex> step(static_cast<std::size_t>(n));
  const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    step[static_cast<std::size_t>(j)] = std::polar(1.0, -energies(j) * dt);
  std::vector<double> out;
  out.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    Complex amp(0.0, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      amp += weights(j) * z[static_cast<std::size_t>(j)];
      z[static_cast<std::size_t>(j)] *= step[static_cast<std::size_t>(j)];
    }
    out.push_back(std::norm(amp));
  }
  return out;
}

inline void require_uniform_from_zero(const std::vector<double>& times) {
  if (times.empty() || times.front() != 0.0)
    throw std::invalid_argument("survival_curve: grid must start at t = 0");
  if (times.size() < 2) return;
  const double dt = times[1] - times[0];
  if (!(dt > 0.0))
    throw std::invalid_argument("survival_curve: grid must be ascending");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::abs(times[k] - static_cast<double>(k) * dt) > 1e-9 * dt * times.size())
      throw std::invalid_argument("survival_curve: grid must be uniform");
}

// Survival of |W> under the non-Hermitian no-jump operator. Spectral route
// with a reconstruction check, falling back to repeated short-step matrix
// exponentials when the eigenbasis is ill-conditioned.
inline std::vector<double> heff_survival(const EffectiveOperator& op,
                                         const Eigen::VectorXcd& w,
                                         const std::vector<double>& times) {
  const Eigen::Index n = op.entries.rows();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.entries);
  bool spectral_ok = es.info() == Eigen::Success;
  Eigen::MatrixXcd vinv;
  if (spectral_ok) {
    const auto& v = es.eigenvectors();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
    vinv = lu.inverse();
    const double cond = v.cwiseAbs().rowwise().sum().maxCoeff() *
                        vinv.cwiseAbs().rowwise().sum().maxCoeff();
    if (cond > 1e8) {
      spectral_ok = false;
    } else {
      const double scale = op.entries.cwiseAbs().maxCoeff();
      const Eigen::MatrixXcd recon =
          v * es.eigenvalues().asDiagonal() * vinv;
      if ((recon - op.entries).cwiseAbs().maxCoeff() > 1e-8 * scale)
        spectral_ok = false;
    }
  }
  std::vector<double> out;
  out.reserve(times.size());
  if (spectral_ok) {
    const Eigen::VectorXcd row = es.eigenvectors().adjoint() * w; // <v_j|W>
    const Eigen::VectorXcd col = vinv * w;
    const Eigen::VectorXcd lam = es.eigenvalues();
    for (double t : times) {
      Complex amp(0.0, 0.0);
      for (Eigen::Index j = 0; j < n; ++j)
        amp += std::conj(row(j)) * col(j) *
               std::exp(Complex(0.0, -1.0) * lam(j) * t);
      out.push_back(std::norm(amp));
    }
    return out;
  }
  // fallback: psi_{k+1} = exp(-i H dt) psi_k on the uniform grid
  const double dt = times.size() > 1 ? times[1] - times[0] : 0.0;
  const Eigen::MatrixXcd u = (Complex(0.0, -dt) * op.entries).exp();
  Eigen::VectorXcd psi = w;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) psi = u * psi;
    out.push_back(std::norm(w.dot(psi)));
  }
  return out;
}

} // namespace detail

// Survival probability of |W> on a uniform grid starting at 0, under the
// full exchange interaction, its forward part, or the no-jump operator.
inline SurvivalCurve survival_curve(const AtomCloud& cloud,
                                    const std::vector<double>& times,
                                    Evolution which, double gamma = 1.0) {
  detail::require_uniform_from_zero(times);
  const Eigen::VectorXcd w = w_state(cloud).amplitudes;
  SurvivalCurve curve;
  curve.times = times;
  curve.scales = TimeScales::for_atoms(cloud.n_atoms, gamma);
  curve.times_tau.reserve(times.size());
  for (double t : times) curve.times_tau.push_back(t / curve.scales.tau);

  if (which == Evolution::heff) {
    curve.values = detail::heff_survival(build_heff(cloud, gamma), w, times);
    return curve;
  }
  const HermitianOperator op =
      which == Evolution::hs ? build_hs(cloud, gamma) : build_hf(cloud, gamma);
  const SpectralDecomposition sd = diagonalize(op);
  const Eigen::VectorXd weights =
      (sd.eigenvectors.adjoint() * w).cwiseAbs2();
  curve.values = detail::mode_sum_survival(sd.eigenvalues, weights, times);
  return curve;
}

// Overlap w_alpha = <alpha,B|alpha,F> = (1/N) sum_m e^{2i phi_m}
// e^{-2i pi alpha r_m / N}; |w_alpha|^2 is exponentially distributed over
// disorder with mean 1/N.
inline WOverlap w_alpha(const AtomCloud& cloud, int alpha) {
  const int n = cloud.n_atoms;
  if (!is_valid_alpha(alpha, n))
    throw std::invalid_argument("w_alpha: alpha out of range or even");
  Complex sum(0.0, 0.0);
  for (int m = 0; m < n; ++m)
    sum += std::polar(1.0, 2.0 * cloud.positions_k[static_cast<std::size_t>(m)] -
                               2.0 * kPi * alpha * m / n);
  return WOverlap{sum / static_cast<double>(n)};
}

// Cross coupling h_{alpha beta} = <beta,B|alpha,F>/beta =
// (1/(N beta)) sum_m e^{2i phi_m} e^{-i pi (alpha+beta) r_m / N}.
inline Complex h_element(const AtomCloud& cloud, int alpha, int beta) {
  const int n = cloud.n_atoms;
  if (!is_valid_alpha(alpha, n) || !is_valid_alpha(beta, n))
    throw std::invalid_argument("h_element: alpha/beta out of range or even");
  Complex sum(0.0, 0.0);
  for (int m = 0; m < n; ++m)
    sum += std::polar(1.0, 2.0 * cloud.positions_k[static_cast<std::size_t>(m)] -
                               kPi * (alpha + beta) * m / n);
  return sum / (static_cast<double>(n) * static_cast<double>(beta));
}

// Matrix element delta_alpha = <alpha,F|H_B|alpha,F> / (N gamma / pi),
// evaluated in O(N) with prefix sums instead of forming H_B.
inline Complex delta_alpha(const AtomCloud& cloud, int alpha) {
  const int n = cloud.n_atoms;
  if (!is_valid_alpha(alpha, n))
    throw std::invalid_argument("delta_alpha: alpha out of range or even");
  // <a,F|H_B|a,F> = -(gamma/2iN) sum_{m != l} sign(m - l) a_m b_l with
  // a_m = e^{-2i phi_m + i pi alpha m/N}, b_l = conj(a_l).
  Eigen::VectorXcd a(n);
  for (int m = 0; m < n; ++m)
    a(m) = std::polar(1.0, -2.0 * cloud.positions_k[static_cast<std::size_t>(m)] +
                               kPi * alpha * m / n);
  Complex run(0.0, 0.0), total(0.0, 0.0);
  for (int m = 0; m < n; ++m) total += std::conj(a(m));
  Complex sum(0.0, 0.0);
  for (int m = 0; m < n; ++m) {
    const Complex b = std::conj(a(m));
    const Complex before = run;            // sum_{l < m} b_l
    const Complex after = total - run - b; // sum_{l > m} b_l
    sum += a(m) * (before - after);
    run += b;
  }
  const Complex element = sum * Complex(0.0, 0.5) / static_cast<double>(n);
  return element * kPi / static_cast<double>(n); // divide by E_1 = N gamma/pi
}

// Perturbed energy pair E_alpha (1 +- |w_alpha|) about the asymptotic
// E_alpha = N gamma / (pi alpha).
inline std::pair<double, double> perturbed_energies(const AtomCloud& cloud,
                                                    int alpha,
                                                    double gamma = 1.0) {
  const double e = energy_asymptotic(alpha, cloud.n_atoms, gamma);
  const double wmag = w_alpha(cloud, alpha).magnitude();
  return {e * (1.0 + wmag), e * (1.0 - wmag)};
}

} // namespace waveqed
