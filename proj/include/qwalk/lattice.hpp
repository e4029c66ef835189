#pragma once

// Coined walk on orthogonal lattice sites, the large-spacing limit of the
// Fock-space walk, and the classical binomial walk.

#include <complex>
#include <vector>

#include "qwalk/walker.hpp"

namespace qwalk {

/// Site amplitudes for sites j = -steps..steps, stored at index j + steps.
/// The site sits at coherent amplitude j * alpha_step.
struct LatticeAmplitudes {
  std::vector<cplx> up;
  std::vector<cplx> down;
  int steps = 0;
  double alpha_step = 1.0;

  double total_probability() const;
  std::vector<double> probabilities() const;
  double position(std::size_t index) const {
    return (static_cast<double>(index) - steps) * alpha_step;
  }
};

struct LatticeMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// One site at the origin with coin (|down> + |up>)/sqrt2.
LatticeAmplitudes lattice_initial(double alpha_step);

/// Coin at every site, then up amplitudes move one site toward +x and down
/// amplitudes one site toward -x.
LatticeAmplitudes lattice_step(const LatticeAmplitudes& a, const CoinMatrix& coin);

/// Mean and variance of the site distribution in units of alpha_step.
LatticeMoments lattice_moments(const LatticeAmplitudes& a);

struct SiteDistribution {
  std::vector<double> positions;
  std::vector<double> probabilities;
};

/// Binomial walk: positions (N - 2k) alpha with weights C(N,k)/2^N.
SiteDistribution classical_rw(int steps, double alpha_step);

LatticeMoments distribution_moments(const SiteDistribution& d);

}  // namespace qwalk
