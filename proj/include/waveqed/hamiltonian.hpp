#pragma once

// Single-excitation operators for a cloud coupled to a one-dimensional
// waveguide: the photon-exchange interaction, its forward/backward split
// with closed-form spectrum and eigenstates, the non-Hermitian no-jump
// operator, the phase-matched (bright) state, its dark complement, and the
// directed collective emission rates.
//
// Basis state |m> = atom m excited, all others in the ground state, with
// atoms indexed by sorted position (rank of atom m is m).

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "waveqed/cloud.hpp"
#include "waveqed/theory.hpp"

namespace waveqed {

using Complex = std::complex<double>;

struct SingleExcitationState {
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
};

struct HermitianOperator {
  Eigen::MatrixXcd entries;
  double rate_unit = 1.0; // gamma carried for dimensionful output
};

struct EffectiveOperator {
  Eigen::MatrixXcd entries; // non-Hermitian; anti-Hermitian part decays only
  double rate_unit = 1.0;
};

struct EmissionRates {
  double gamma_forward = 0.0;
  double gamma_backward = 0.0;
};

struct HfSpectrum {
  std::vector<int> alphas;       // odd, ascending, -N <= alpha < N
  std::vector<double> energies;  // E_alpha = (gamma/2) cot(alpha pi / 2N)
};

namespace detail {

inline Eigen::VectorXcd phase_vector(const AtomCloud& cloud, double sign) {
  const int n = cloud.n_atoms;
  Eigen::VectorXcd u(n);
  for (int m = 0; m < n; ++m)
    u(m) = std::polar(1.0, sign * cloud.positions_k[static_cast<std::size_t>(m)]);
  return u;
}

} // namespace detail

// Phase-matched state |W>, amplitudes e^{i phi_m}/sqrt(N); the only
// single-excitation state coupled to the forward waveguide mode.
inline SingleExcitationState w_state(const AtomCloud& cloud) {
  Eigen::VectorXcd amp = detail::phase_vector(cloud, +1.0);
  amp /= std::sqrt(static_cast<double>(cloud.n_atoms));
  return SingleExcitationState{std::move(amp)};
}

// Exchange interaction H_s(m,n) = gamma sin(|phi_m - phi_n|); zero diagonal.
inline HermitianOperator build_hs(const AtomCloud& cloud, double gamma = 1.0) {
  const int n = cloud.n_atoms;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const double v = gamma * std::sin(cloud.positions_k[static_cast<std::size_t>(i)] -
                                        cloud.positions_k[static_cast<std::size_t>(j)]);
      h(i, j) = v; // positions sorted: phi_i >= phi_j
      h(j, i) = v;
    }
  return HermitianOperator{std::move(h), gamma};
}

// Forward part H_F(m,n) = (gamma/2i) sign(phi_m - phi_n) e^{i(phi_m - phi_n)}.
inline HermitianOperator build_hf(const AtomCloud& cloud, double gamma = 1.0) {
  const int n = cloud.n_atoms;
  const Eigen::VectorXcd u = detail::phase_vector(cloud, +1.0);
  const Complex pref(0.0, -0.5 * gamma); // gamma/(2i)
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const Complex v = pref * u(i) * std::conj(u(j)); // sign(phi_i-phi_j)=+1
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  return HermitianOperator{std::move(h), gamma};
}

// Backward part, fixed by H_F + H_B = H_s:
// H_B(m,n) = -(gamma/2i) sign(phi_m - phi_n) e^{-i(phi_m - phi_n)}.
inline HermitianOperator build_hb(const AtomCloud& cloud, double gamma = 1.0) {
  const int n = cloud.n_atoms;
  const Eigen::VectorXcd u = detail::phase_vector(cloud, +1.0);
  const Complex pref(0.0, 0.5 * gamma);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const Complex v = pref * std::conj(u(i)) * u(j);
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  return HermitianOperator{std::move(h), gamma};
}

// No-jump evolution operator: H_eff = H_s - (i gamma/2)(u u^+ + v v^+) with
// u_m = e^{i phi_m}, v_m = e^{-i phi_m}; entrywise -i gamma e^{i|phi_m-phi_n|}.
inline EffectiveOperator build_heff(const AtomCloud& cloud, double gamma = 1.0) {
  const int n = cloud.n_atoms;
  Eigen::MatrixXcd h(n, n);
  const Complex pref(0.0, -gamma);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      const Complex v =
          pref * std::polar(1.0, cloud.positions_k[static_cast<std::size_t>(i)] -
                                     cloud.positions_k[static_cast<std::size_t>(j)]);
      h(i, j) = v;
      h(j, i) = v; // |phi_i - phi_j| symmetric
    }
    h(i, i) = pref;
  }
  return EffectiveOperator{std::move(h), gamma};
}

// Exact spectrum of the forward (and backward) part: E_alpha =
// (gamma/2) cot(alpha pi / 2N) for the N odd alpha in [-N, N). Positions
// never enter.
inline HfSpectrum hf_spectrum(int n_atoms, double gamma = 1.0) {
  if (n_atoms < 1) throw std::invalid_argument("hf_spectrum: n_atoms < 1");
  HfSpectrum s;
  s.alphas = alpha_values(n_atoms);
  s.energies.reserve(s.alphas.size());
  for (int a : s.alphas) {
    const double th = kPi * a / (2.0 * n_atoms);
    s.energies.push_back(0.5 * gamma * std::cos(th) / std::sin(th));
  }
  return s;
}

// Eigenstate of H_F: amplitudes e^{i phi_m} e^{-i pi alpha r_m/N}/sqrt(N),
// r_m the number of atoms strictly to the left of atom m.
inline SingleExcitationState hf_eigenstate(const AtomCloud& cloud, int alpha) {
  const int n = cloud.n_atoms;
  if (!is_valid_alpha(alpha, n))
    throw std::invalid_argument("hf_eigenstate: alpha out of range or even");
  Eigen::VectorXcd amp(n);
  const double isqrt = 1.0 / std::sqrt(static_cast<double>(n));
  for (int m = 0; m < n; ++m)
    amp(m) = std::polar(isqrt, cloud.positions_k[static_cast<std::size_t>(m)] -
                                   kPi * alpha * m / n);
  return SingleExcitationState{std::move(amp)};
}

// Mirror eigenstate of H_B with the same E_alpha: conjugate plane-wave
// factor and conjugate counting phase.
inline SingleExcitationState hb_eigenstate(const AtomCloud& cloud, int alpha) {
  const int n = cloud.n_atoms;
  if (!is_valid_alpha(alpha, n))
    throw std::invalid_argument("hb_eigenstate: alpha out of range or even");
  Eigen::VectorXcd amp(n);
  const double isqrt = 1.0 / std::sqrt(static_cast<double>(n));
  for (int m = 0; m < n; ++m)
    amp(m) = std::polar(isqrt, -cloud.positions_k[static_cast<std::size_t>(m)] +
                                   kPi * alpha * m / n);
  return SingleExcitationState{std::move(amp)};
}

// Conjugation by diag(e^{-i phi_m}). Strips the plane-wave phases: the
// gauged |W> is the uniform vector and the gauged H_F is the
// position-independent matrix (gamma/2i) sign(m - n).
inline SingleExcitationState gauge_frame(const AtomCloud& cloud,
                                         const SingleExcitationState& s) {
  Eigen::VectorXcd amp = s.amplitudes;
  for (int m = 0; m < cloud.n_atoms; ++m)
    amp(m) *= std::polar(1.0, -cloud.positions_k[static_cast<std::size_t>(m)]);
  return SingleExcitationState{std::move(amp)};
}

inline HermitianOperator gauge_frame(const AtomCloud& cloud,
                                     const HermitianOperator& op) {
  const Eigen::VectorXcd d = detail::phase_vector(cloud, -1.0);
  const Eigen::VectorXcd dinv = detail::phase_vector(cloud, +1.0);
  Eigen::MatrixXcd out = d.asDiagonal() * op.entries * dinv.asDiagonal();
  return HermitianOperator{std::move(out), op.rate_unit};
}

// Orthonormal basis of the complement of |W>, built from the Householder
// reflector that maps |W> onto the first coordinate axis. Deterministic and
// O(N^2).
inline std::vector<SingleExcitationState> dark_basis(const AtomCloud& cloud) {
  const int n = cloud.n_atoms;
  if (n < 2) throw std::invalid_argument("dark_basis: needs N >= 2");
  const Eigen::VectorXcd w = w_state(cloud).amplitudes;
  // v = w + beta e_1 with beta = w_1/|w_1| avoids cancellation.
  const Complex beta = std::polar(1.0, std::arg(w(0)));
  Eigen::VectorXcd v = w;
  v(0) += beta;
  const double vsq = v.squaredNorm();
  std::vector<SingleExcitationState> dark;
  dark.reserve(static_cast<std::size_t>(n - 1));
  for (int j = 1; j < n; ++j) {
    // column j of P = I - 2 v v^+/(v^+ v); orthogonal to P w = -beta e_1
    Eigen::VectorXcd col = Eigen::VectorXcd::Zero(n);
    col(j) = 1.0;
    col -= (2.0 * std::conj(v(j)) / vsq) * v;
    dark.push_back(SingleExcitationState{std::move(col)});
  }
  return dark;
}

// Directed emission rates of a unit-norm state:
//   Gamma_F = gamma |sum_m e^{-i phi_m} psi_m|^2,
//   Gamma_B = gamma |sum_m e^{+i phi_m} psi_m|^2.
// |W> gives exactly N gamma forward.
inline EmissionRates emission_rates(const SingleExcitationState& state,
                                    const AtomCloud& cloud, double gamma = 1.0) {
  if (state.amplitudes.size() != cloud.n_atoms)
    throw std::invalid_argument("emission_rates: state/cloud size mismatch");
  if (std::abs(state.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("emission_rates: state is not normalized");
  Complex fwd(0.0, 0.0), bwd(0.0, 0.0);
  for (int m = 0; m < cloud.n_atoms; ++m) {
    const Complex ph =
        std::polar(1.0, cloud.positions_k[static_cast<std::size_t>(m)]);
    fwd += std::conj(ph) * state.amplitudes(m);
    bwd += ph * state.amplitudes(m);
  }
  return EmissionRates{gamma * std::norm(fwd), gamma * std::norm(bwd)};
}

} // namespace waveqed
