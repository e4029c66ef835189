#include "qwalk/fock.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qwalk/errors.hpp"
#include "qwalk/kernels.hpp"

namespace qwalk {

void TruncationConfig::validate() const {
  if (dim < 2) throw ConfigError("Fock dimension must be at least 2, got " + std::to_string(dim));
  if (!(edge_guard > 0.0 && edge_guard < 1.0))
    throw ConfigError("edge_guard must lie in (0, 1)");
}

std::size_t TruncationConfig::guard_levels() const {
  return static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(dim)));
}

// --- FockState -------------------------------------------------------------

FockState FockState::pure(StateVector amplitudes) {
  if (amplitudes.size() < 2) throw ConfigError("state dimension must be at least 2");
  return FockState(std::move(amplitudes));
}

FockState FockState::mixed(OperatorMatrix rho) {
  if (rho.rows() != rho.cols() || rho.rows() < 2)
    throw ConfigError("density matrix must be square with dimension >= 2");
  return FockState(std::move(rho));
}

FockState FockState::vacuum(std::size_t dim) { return number(0, dim); }

FockState FockState::number(std::size_t n, std::size_t dim) {
  if (n >= dim) throw ConfigError("Fock level outside the truncated space");
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(n)) = 1.0;
  return pure(std::move(v));
}

std::size_t FockState::dim() const noexcept {
  return is_pure() ? static_cast<std::size_t>(std::get<StateVector>(data_).size())
                   : static_cast<std::size_t>(std::get<OperatorMatrix>(data_).rows());
}

const StateVector& FockState::amplitudes() const {
  if (!is_pure()) throw ConfigError("amplitudes() on a mixed state");
  return std::get<StateVector>(data_);
}

const OperatorMatrix& FockState::rho() const {
  if (is_pure()) throw ConfigError("rho() on a pure state");
  return std::get<OperatorMatrix>(data_);
}

OperatorMatrix FockState::density_matrix() const {
  if (is_pure()) {
    const auto& v = std::get<StateVector>(data_);
    return v * v.adjoint();
  }
  return std::get<OperatorMatrix>(data_);
}

std::vector<double> FockState::populations() const {
  std::vector<double> p(dim());
  if (is_pure()) {
    const auto& v = std::get<StateVector>(data_);
    for (std::size_t n = 0; n < p.size(); ++n) p[n] = std::norm(v(static_cast<Eigen::Index>(n)));
  } else {
    const auto& r = std::get<OperatorMatrix>(data_);
    for (std::size_t n = 0; n < p.size(); ++n) {
      const auto i = static_cast<Eigen::Index>(n);
      p[n] = r(i, i).real();
    }
  }
  return p;
}

double FockState::trace() const {
  const auto p = populations();
  double t = 0.0;
  for (double v : p) t += v;
  return t;
}

double FockState::purity() const {
  if (is_pure()) {
    const double t = std::get<StateVector>(data_).squaredNorm();
    return t * t;
  }
  const auto& r = std::get<OperatorMatrix>(data_);
  return r.cwiseAbs2().sum();  // Tr(rho^2) for Hermitian rho
}

// --- operators -------------------------------------------------------------

std::pair<OperatorMatrix, OperatorMatrix> ladder_ops(const TruncationConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  OperatorMatrix a = OperatorMatrix::Zero(d, d);
  for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  OperatorMatrix ad = a.adjoint();
  return {std::move(a), std::move(ad)};
}

OperatorMatrix number_op(const TruncationConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  OperatorMatrix n = OperatorMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

OperatorMatrix position_op(const TruncationConfig& cfg) {
  auto [a, ad] = ladder_ops(cfg);
  return (a + ad) / std::numbers::sqrt2;
}

OperatorMatrix momentum_op(const TruncationConfig& cfg) {
  auto [a, ad] = ladder_ops(cfg);
  return (a - ad) / cplx(0.0, std::numbers::sqrt2);
}

namespace {

void check_column0(const OperatorMatrix& u, const TruncationConfig& cfg, const char* what) {
  std::vector<double> pops(cfg.dim);
  for (std::size_t n = 0; n < cfg.dim; ++n) pops[n] = std::norm(u(static_cast<Eigen::Index>(n), 0));
  check_guard(pops, cfg, what);
}

}  // namespace

OperatorMatrix displacement(cplx alpha, const TruncationConfig& cfg) {
  auto [a, ad] = ladder_ops(cfg);
  OperatorMatrix g = alpha * ad - std::conj(alpha) * a;
  OperatorMatrix u = expm_skew_hermitian(g);
  check_column0(u, cfg, "displacement");
  return u;
}

OperatorMatrix squeeze(cplx z, const TruncationConfig& cfg) {
  auto [a, ad] = ladder_ops(cfg);
  OperatorMatrix g = 0.5 * (std::conj(z) * (a * a) - z * (ad * ad));
  OperatorMatrix u = expm_skew_hermitian(g);
  check_column0(u, cfg, "squeeze");
  return u;
}

OperatorMatrix cubic_b(cplx beta, const TruncationConfig& cfg, CubicForm form) {
  auto [a, ad] = ladder_ops(cfg);
  OperatorMatrix k;
  if (form == CubicForm::normal) {
    const auto d = static_cast<Eigen::Index>(cfg.dim);
    OperatorMatrix n1 = OperatorMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) n1(i, i) = static_cast<double>(i) + 1.0;
    k = (beta / 2.0) * (ad * n1);
  } else {
    k = (beta / 6.0) * (ad * ad * a + ad * a * ad + a * ad * ad);
  }
  OperatorMatrix g = k - k.adjoint();
  OperatorMatrix u = expm_skew_hermitian(g);
  check_column0(u, cfg, "cubic_b");
  return u;
}

OperatorMatrix displacement_analytic(cplx alpha, std::size_t dim) {
  if (dim < 2) throw ConfigError("Fock dimension must be at least 2");
  const auto d = static_cast<Eigen::Index>(dim);
  OperatorMatrix u = OperatorMatrix::Zero(d, d);
  const double y = std::norm(alpha);
  const double theta = std::arg(alpha);
  double log_g0 = -0.5 * y;
  for (std::size_t k = 0; k < dim; ++k) {
    if (k > 0) {
      if (y == 0.0) break;
      log_g0 += 0.5 * std::log(y / static_cast<double>(k));
    }
    const cplx up = std::polar(1.0, static_cast<double>(k) * theta);
    const cplx down = (k % 2 == 0 ? 1.0 : -1.0) * std::conj(up);
    const double dk = static_cast<double>(k);
    double g_prev = 0.0;
    double g = std::exp(log_g0);
    for (std::size_t n = 0; n + k < dim; ++n) {
      const auto r = static_cast<Eigen::Index>(n);
      const auto c = static_cast<Eigen::Index>(n + k);
      u(c, r) = up * g;
      if (k > 0) u(r, c) = down * g;
      const double dn = static_cast<double>(n);
      const double g_next = ((2.0 * dn + dk + 1.0 - y) * g - std::sqrt(dn * (dn + dk)) * g_prev) /
                            std::sqrt((dn + 1.0) * (dn + dk + 1.0));
      g_prev = g;
      g = g_next;
    }
  }
  return u;
}

OperatorMatrix expm(const OperatorMatrix& m) {
  if (!m.allFinite()) throw NumericError("expm: non-finite matrix entries");
  return m.exp();
}

OperatorMatrix expm_skew_hermitian(const OperatorMatrix& g) {
  if (!g.allFinite()) throw NumericError("expm: non-finite matrix entries");
  // G = -iH with H = iG Hermitian; exp(G) = V exp(-i diag(lambda)) V^dag.
  OperatorMatrix h = cplx(0.0, 1.0) * g;
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw NumericError("expm: eigendecomposition failed");
  const auto& lambda = eig.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) phases(i) = std::polar(1.0, -lambda(i));
  const auto& v = eig.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

double unitarity_defect(const OperatorMatrix& u, std::size_t guard_levels) {
  const Eigen::Index keep = u.rows() - static_cast<Eigen::Index>(guard_levels);
  if (keep <= 0) return 0.0;
  OperatorMatrix p = u.adjoint() * u;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < keep; ++i)
    for (Eigen::Index j = 0; j < keep; ++j)
      worst = std::max(worst, std::abs(p(i, j) - (i == j ? cplx(1.0) : cplx(0.0))));
  return worst;
}

// --- observables -----------------------------------------------------------

double guard_population(std::span<const double> populations, const TruncationConfig& cfg) {
  const std::size_t dim = populations.size();
  const std::size_t band = std::min(dim, cfg.guard_levels());
  double sum = 0.0;
  for (std::size_t n = dim - band; n < dim; ++n) sum += populations[n];
  return sum;
}

double guard_population(const FockState& s, const TruncationConfig& cfg) {
  const auto p = s.populations();
  return guard_population(p, cfg);
}

void check_guard(std::span<const double> populations, const TruncationConfig& cfg,
                 const char* context) {
  const double g = guard_population(populations, cfg);
  if (g >= cfg.edge_guard) {
    throw TruncationError(std::string(context) + ": guard-band population " + std::to_string(g) +
                              " exceeds edge_guard; increase the Fock dimension",
                          g);
  }
}

MomentSet moments(const FockState& s) {
  TruncationConfig cfg;
  cfg.dim = s.dim();
  return moments(s, cfg);
}

MomentSet moments(const FockState& s, const TruncationConfig& cfg) {
  const std::size_t dim = s.dim();
  const auto pops = s.populations();
  check_guard(pops, cfg, "moments");

  cplx ea = 0.0;
  cplx ea2 = 0.0;
  double en = 0.0;
  double norm = 0.0;
  for (std::size_t n = 0; n < dim; ++n) {
    en += static_cast<double>(n) * pops[n];
    norm += pops[n];
  }
  if (s.is_pure()) {
    const auto& c = s.amplitudes();
    for (std::size_t n = 0; n + 1 < dim; ++n) {
      const auto i = static_cast<Eigen::Index>(n);
      ea += std::conj(c(i)) * c(i + 1) * std::sqrt(static_cast<double>(n + 1));
      if (n + 2 < dim)
        ea2 += std::conj(c(i)) * c(i + 2) * std::sqrt(static_cast<double>((n + 1) * (n + 2)));
    }
  } else {
    const auto& r = s.rho();
    for (std::size_t n = 0; n + 1 < dim; ++n) {
      const auto i = static_cast<Eigen::Index>(n);
      ea += r(i + 1, i) * std::sqrt(static_cast<double>(n + 1));
      if (n + 2 < dim) ea2 += r(i + 2, i) * std::sqrt(static_cast<double>((n + 1) * (n + 2)));
    }
  }
  ea /= norm;
  ea2 /= norm;
  en /= norm;

  MomentSet m;
  m.mean_n = en;
  m.mean_x = std::numbers::sqrt2 * ea.real();
  m.mean_p = std::numbers::sqrt2 * ea.imag();
  const double ex2 = ea2.real() + en + 0.5;
  const double ep2 = -ea2.real() + en + 0.5;
  m.var_x = ex2 - m.mean_x * m.mean_x;
  m.var_p = ep2 - m.mean_p * m.mean_p;
  m.cov_xp = ea2.imag() - m.mean_x * m.mean_p;
  return m;
}

std::vector<double> number_distribution(const FockState& s) {
  auto p = s.populations();
  for (double& v : p) v = std::max(v, 0.0);
  return p;
}

std::vector<double> position_distribution(const FockState& s, std::span<const double> grid) {
  if (grid.size() < 2) throw CoverageError("position grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw CoverageError("position grid must be strictly increasing");

  const std::size_t dim = s.dim();
  const std::size_t count = grid.size();
  std::vector<double> table(dim * count);
  kernels::hermite_functions(grid, dim, table);

  std::vector<double> density(count, 0.0);
  if (s.is_pure()) {
    const auto& c = s.amplitudes();
    for (std::size_t i = 0; i < count; ++i) {
      cplx amp = 0.0;
      for (std::size_t n = 0; n < dim; ++n) amp += c(static_cast<Eigen::Index>(n)) * table[n * count + i];
      density[i] = std::norm(amp);
    }
  } else {
    const Eigen::MatrixXd re = s.rho().real();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> psi(
        table.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
    const Eigen::MatrixXd tmp = re * psi;
    for (std::size_t i = 0; i < count; ++i)
      density[i] = std::max(0.0, psi.col(static_cast<Eigen::Index>(i)).dot(tmp.col(static_cast<Eigen::Index>(i))));
  }
  if (density.front() > 1e-6 || density.back() > 1e-6)
    throw CoverageError("position grid does not cover the state (edge density above 1e-6)");
  return density;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) v[i] = lo + step * static_cast<double>(i);
  v.back() = hi;
  return v;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

}  // namespace qwalk
