#include "qwalk/wigner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "qwalk/errors.hpp"
#include "qwalk/kernels.hpp"

namespace qwalk {

namespace {

// Density matrix cut to the levels that carry population.
RowMajorMatrix trimmed_rho(const FockState& s) {
  const OperatorMatrix rho = s.density_matrix();
  Eigen::Index keep = rho.rows();
  while (keep > 1 && std::abs(rho(keep - 1, keep - 1)) < 1e-20) --keep;
  return rho.topLeftCorner(keep, keep);
}

bool symmetric_axis(const std::vector<double>& v) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(v[i] + v[n - 1 - i]) > 1e-9 * (1.0 + std::abs(v[i]))) return false;
  return true;
}

double row_weight(const std::vector<double>& axis, std::size_t j) {
  const std::size_t n = axis.size();
  if (n < 2) return 1.0;
  const double lo = j > 0 ? axis[j] - axis[j - 1] : 0.0;
  const double hi = j + 1 < n ? axis[j + 1] - axis[j] : 0.0;
  return 0.5 * (lo + hi);
}

}  // namespace

void GridSpec::validate() const {
  if (nx < 2 || np < 2) throw ConfigError("Wigner grid needs at least 2 points per axis");
  if (!(x_hi > x_lo) || !(p_hi > p_lo)) throw ConfigError("Wigner grid ranges must be increasing");
}

double WignerGrid::min() const { return *std::min_element(values.begin(), values.end()); }
double WignerGrid::max() const { return *std::max_element(values.begin(), values.end()); }

double WignerGrid::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < x_axis.size(); ++i) {
    const double wx = row_weight(x_axis, i);
    for (std::size_t j = 0; j < p_axis.size(); ++j) s += wx * row_weight(p_axis, j) * at(i, j);
  }
  return s;
}

WignerGrid wigner_grid(const FockState& rho, const GridSpec& spec, bool check_coverage,
                       unsigned threads) {
  spec.validate();
  const RowMajorMatrix r = trimmed_rho(rho);
  const auto dim = static_cast<std::size_t>(r.rows());
  const kernels::WignerCoefficients coeffs =
      kernels::make_wigner_coefficients({r.data(), dim * dim}, dim);

  WignerGrid w;
  w.x_axis = linspace(spec.x_lo, spec.x_hi, spec.nx);
  w.p_axis = linspace(spec.p_lo, spec.p_hi, spec.np);
  w.values.assign(spec.nx * spec.np, 0.0);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<double> xs(spec.np);
    for (std::size_t i = next.fetch_add(1); i < spec.nx; i = next.fetch_add(1)) {
      std::fill(xs.begin(), xs.end(), w.x_axis[i]);
      kernels::wigner_points(coeffs, xs, w.p_axis, {w.values.data() + i * spec.np, spec.np});
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (check_coverage) {
    double edge = 0.0;
    for (std::size_t i = 0; i < spec.nx; ++i)
      edge = std::max({edge, std::abs(w.at(i, 0)), std::abs(w.at(i, spec.np - 1))});
    for (std::size_t j = 0; j < spec.np; ++j)
      edge = std::max({edge, std::abs(w.at(0, j)), std::abs(w.at(spec.nx - 1, j))});
    if (edge >= 1e-6)
      throw CoverageError("Wigner grid does not cover the state (boundary |W| = " +
                          std::to_string(edge) + ")");
  }
  return w;
}

double wigner_point(const FockState& rho, double x, double p) {
  const RowMajorMatrix r = trimmed_rho(rho);
  const auto dim = static_cast<std::size_t>(r.rows());
  const auto coeffs = kernels::make_wigner_coefficients({r.data(), dim * dim}, dim);
  double out = 0.0;
  kernels::wigner_points(coeffs, {&x, 1}, {&p, 1}, {&out, 1});
  return out;
}

Marginals marginals(const WignerGrid& w) {
  const std::size_t nx = w.x_axis.size();
  const std::size_t np = w.p_axis.size();
  Marginals m{std::vector<double>(nx, 0.0), std::vector<double>(np, 0.0)};
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < np; ++j) {
      m.px[i] += row_weight(w.p_axis, j) * w.at(i, j);
      m.pp[j] += row_weight(w.x_axis, i) * w.at(i, j);
    }
  return m;
}

SymmetryMetrics symmetry_metrics(const WignerGrid& w) {
  if (!symmetric_axis(w.x_axis) || !symmetric_axis(w.p_axis))
    throw DomainError("symmetry_metrics: grid must be symmetric about the origin");
  const std::size_t nx = w.x_axis.size();
  const std::size_t np = w.p_axis.size();
  double total = 0.0, dx = 0.0, dp = 0.0;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < np; ++j) {
      const double v = w.at(i, j);
      total += std::abs(v);
      dx += std::abs(v - w.at(nx - 1 - i, j));
      dp += std::abs(v - w.at(i, np - 1 - j));
    }
  if (total == 0.0) return {};
  return {dx / total, dp / total};
}

double sideband_energy(const WignerGrid& w, double band_lo, double band_hi) {
  if (band_hi < band_lo) throw ConfigError("sideband_energy: empty band");
  double s = 0.0;
  for (std::size_t j = 0; j < w.p_axis.size(); ++j) {
    const double ap = std::abs(w.p_axis[j]);
    if (ap < band_lo || ap > band_hi) continue;
    double row = 0.0;
    for (std::size_t i = 0; i < w.x_axis.size(); ++i) row += row_weight(w.x_axis, i) * std::abs(w.at(i, j));
    s += row_weight(w.p_axis, j) * row;
  }
  return s;
}

}  // namespace qwalk
