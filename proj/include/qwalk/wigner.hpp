#pragma once

// Wigner function on a rectangular grid, normalized so that the integral over
// the plane is 1 with x = (a + a^dag)/sqrt2, p = (a - a^dag)/(i sqrt2). The
// vacuum peaks at 1/pi and W >= -1/pi everywhere.

#include <vector>

#include "qwalk/fock.hpp"

namespace qwalk {

struct GridSpec {
  double x_lo = -14.0;
  double x_hi = 14.0;
  double p_lo = -14.0;
  double p_hi = 14.0;
  std::size_t nx = 281;
  std::size_t np = 281;

  void validate() const;
};

struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> p_axis;
  /// values[i * p_axis.size() + j] = W(x_i, p_j).
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * p_axis.size() + j]; }
  double min() const;
  double max() const;
  /// Trapezoid integral of W over the grid.
  double integral() const;
};

/// W(x, p) = (1/pi) sum_n (-1)^n <n| D(b)^dag rho D(b) |n>, b = (x + i p)/sqrt2.
/// Throws CoverageError if |W| exceeds 1e-6 anywhere on the boundary and
/// check_coverage is set. threads = 0 uses the hardware concurrency.
WignerGrid wigner_grid(const FockState& rho, const GridSpec& spec, bool check_coverage = true,
                       unsigned threads = 0);

/// Single-point evaluation.
double wigner_point(const FockState& rho, double x, double p);

struct Marginals {
  std::vector<double> px;  ///< integral over p
  std::vector<double> pp;  ///< integral over x
};
Marginals marginals(const WignerGrid& w);

struct SymmetryMetrics {
  double asym_x = 0.0;  ///< ||W(x,p) - W(-x,p)||_1 / ||W||_1
  double asym_p = 0.0;
};
/// Throws DomainError unless both axes are symmetric about 0.
SymmetryMetrics symmetry_metrics(const WignerGrid& w);

/// Integral of |W| over the rows with band_lo <= |p| <= band_hi.
double sideband_energy(const WignerGrid& w, double band_lo, double band_hi);

}  // namespace qwalk
