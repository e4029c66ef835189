#include "qwalk/lattice.hpp"

#include <cmath>
#include <numbers>

#include "qwalk/errors.hpp"

namespace qwalk {

double LatticeAmplitudes::total_probability() const {
  double s = 0.0;
  for (std::size_t i = 0; i < up.size(); ++i) s += std::norm(up[i]) + std::norm(down[i]);
  return s;
}

std::vector<double> LatticeAmplitudes::probabilities() const {
  std::vector<double> p(up.size());
  for (std::size_t i = 0; i < up.size(); ++i) p[i] = std::norm(up[i]) + std::norm(down[i]);
  return p;
}

LatticeAmplitudes lattice_initial(double alpha_step) {
  const cplx h = 1.0 / std::numbers::sqrt2;
  return {{h}, {h}, 0, alpha_step};
}

LatticeAmplitudes lattice_step(const LatticeAmplitudes& a, const CoinMatrix& coin) {
  const std::size_t width = a.up.size();
  LatticeAmplitudes out;
  out.steps = a.steps + 1;
  out.alpha_step = a.alpha_step;
  out.up.assign(width + 2, 0.0);
  out.down.assign(width + 2, 0.0);
  // Old index i (site i - steps) maps to new index i + 1 before the shift.
  for (std::size_t i = 0; i < width; ++i) {
    const cplx u = coin(0, 0) * a.up[i] + coin(0, 1) * a.down[i];
    const cplx d = coin(1, 0) * a.up[i] + coin(1, 1) * a.down[i];
    out.up[i + 2] += u;
    out.down[i] += d;
  }
  return out;
}

LatticeMoments lattice_moments(const LatticeAmplitudes& a) {
  const auto p = a.probabilities();
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double x = a.position(i);
    m1 += p[i] * x;
    m2 += p[i] * x * x;
  }
  return {m1, m2 - m1 * m1};
}

SiteDistribution classical_rw(int steps, double alpha_step) {
  if (steps < 0) throw DomainError("classical_rw: negative step count");
  SiteDistribution d;
  const double log_norm = -steps * std::numbers::ln2;
  for (int k = 0; k <= steps; ++k) {
    const double log_binom =
        std::lgamma(steps + 1.0) - std::lgamma(k + 1.0) - std::lgamma(steps - k + 1.0);
    d.positions.push_back((steps - 2 * k) * alpha_step);
    d.probabilities.push_back(std::exp(log_binom + log_norm));
  }
  return d;
}

LatticeMoments distribution_moments(const SiteDistribution& d) {
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < d.positions.size(); ++i) {
    m1 += d.probabilities[i] * d.positions[i];
    m2 += d.probabilities[i] * d.positions[i] * d.positions[i];
  }
  return {m1, m2 - m1 * m1};
}

}  // namespace qwalk
