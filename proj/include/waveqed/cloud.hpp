#pragma once

// Random atomic position configurations drawn from a prescribed density
// profile. All positions are dimensionless optical phases phi = k*x, so the
// wave number is fixed to 1 throughout and a length scale sigma appears only
// through the product k*sigma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "waveqed/rng.hpp"

namespace waveqed {

enum class ProfileKind { gaussian, uniform_box, custom_piecewise };

struct ProfilePiece {
  double lo = 0.0;
  double hi = 0.0;
  double weight = 0.0;
};

// Normalized single-atom density. `size_k` is k*sigma for the Gaussian
// n(x) ~ exp(-x^2/sigma^2) and k*width for the centered box.
struct DensityProfile {
  ProfileKind kind = ProfileKind::gaussian;
  double size_k = 1.0;
  std::vector<ProfilePiece> pieces; // custom_piecewise only

  void validate() const {
    if (kind == ProfileKind::custom_piecewise) {
      if (pieces.empty())
        throw std::invalid_argument("profile: custom_piecewise needs pieces");
      double total = 0.0;
      for (const auto& p : pieces) {
        if (!(p.hi > p.lo))
          throw std::invalid_argument("profile: piece interval is empty");
        if (p.weight < 0.0)
          throw std::invalid_argument("profile: negative piece weight");
        total += p.weight;
      }
      if (!(total > 0.0))
        throw std::invalid_argument("profile: total piece weight is zero");
      return;
    }
    if (!(size_k > 0.0))
      throw std::invalid_argument("profile: size_k must be positive");
  }
};

inline DensityProfile gaussian_profile(double size_k) {
  return DensityProfile{ProfileKind::gaussian, size_k, {}};
}

inline DensityProfile box_profile(double size_k) {
  return DensityProfile{ProfileKind::uniform_box, size_k, {}};
}

// One disorder realization: sorted phases plus everything needed to
// re-create it bit-exactly.
struct AtomCloud {
  std::vector<double> positions_k; // sorted ascending; rank of atom m is m
  int n_atoms = 0;
  DensityProfile profile;
  std::uint64_t seed = 0;
};

namespace detail {

inline double sample_one(const DensityProfile& p, Rng& rng) {
  switch (p.kind) {
    case ProfileKind::gaussian:
      // variance of exp(-x^2/sigma^2) is sigma^2/2
      return p.size_k / std::sqrt(2.0) * rng.normal();
    case ProfileKind::uniform_box:
      return p.size_k * (rng.uniform01() - 0.5);
    case ProfileKind::custom_piecewise: {
      double total = 0.0;
      for (const auto& piece : p.pieces) total += piece.weight;
      double target = rng.uniform01() * total;
      for (const auto& piece : p.pieces) {
        if (target < piece.weight || &piece == &p.pieces.back()) {
          const double frac = piece.weight > 0.0 ? target / piece.weight : 0.0;
          return piece.lo + std::min(frac, 1.0) * (piece.hi - piece.lo);
        }
        target -= piece.weight;
      }
      return p.pieces.back().hi; // unreachable
    }
  }
  throw std::logic_error("sample_one: bad profile kind");
}

} // namespace detail

// N independent draws from the profile, sorted. Deterministic in `seed`;
// exact ties (measure zero) keep their draw order via stable_sort.
inline AtomCloud sample_cloud(const DensityProfile& profile, int n_atoms,
                              std::uint64_t seed) {
  profile.validate();
  if (n_atoms < 1)
    throw std::invalid_argument("sample_cloud: n_atoms must be >= 1");
  Rng rng(seed);
  std::vector<double> pos(static_cast<std::size_t>(n_atoms));
  for (auto& x : pos) x = detail::sample_one(profile, rng);
  std::stable_sort(pos.begin(), pos.end());
  return AtomCloud{std::move(pos), n_atoms, profile, seed};
}

// Mean density n(x) in phase units, normalized so that its integral is
// n_atoms.
inline double density_at(const DensityProfile& profile, double x_k,
                         int n_atoms) {
  profile.validate();
  const double n = static_cast<double>(n_atoms);
  switch (profile.kind) {
    case ProfileKind::gaussian: {
      const double s = profile.size_k;
      return n * std::exp(-x_k * x_k / (s * s)) /
             std::sqrt(3.14159265358979323846 * s * s);
    }
    case ProfileKind::uniform_box:
      return std::abs(x_k) <= 0.5 * profile.size_k ? n / profile.size_k : 0.0;
    case ProfileKind::custom_piecewise: {
      double total = 0.0;
      for (const auto& piece : profile.pieces) total += piece.weight;
      double dens = 0.0;
      for (const auto& piece : profile.pieces)
        if (x_k >= piece.lo && x_k <= piece.hi)
          dens += n * piece.weight / total / (piece.hi - piece.lo);
      return dens;
    }
  }
  throw std::logic_error("density_at: bad profile kind");
}

enum class AtomNumberMode { fixed, poisson };

// Number of atoms for one realization. Poisson draws of zero are clamped to
// one (the single-excitation sector needs at least one atom); callers can
// count clamp events through `clamped`.
inline int draw_atom_count(double mean_n, AtomNumberMode mode,
                           std::uint64_t seed, bool* clamped = nullptr) {
  if (!(mean_n >= 1.0))
    throw std::invalid_argument("draw_atom_count: mean_n must be >= 1");
  if (clamped) *clamped = false;
  if (mode == AtomNumberMode::fixed)
    return static_cast<int>(std::lround(mean_n));
  Rng rng(seed);
  const long n = rng.poisson(mean_n);
  if (n < 1) {
    if (clamped) *clamped = true;
    return 1;
  }
  return static_cast<int>(n);
}

inline std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::uniform_box: return "uniform_box";
    case ProfileKind::custom_piecewise: return "custom_piecewise";
  }
  return "?";
}

inline std::string to_string(AtomNumberMode m) {
  return m == AtomNumberMode::fixed ? "fixed" : "poisson";
}

} // namespace waveqed
