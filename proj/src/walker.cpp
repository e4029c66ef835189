#include "qwalk/walker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qwalk/errors.hpp"
#include "qwalk/kernels.hpp"

namespace qwalk {

namespace {

constexpr cplx kI{0.0, 1.0};

struct RawMoments {
  cplx a = 0.0;
  cplx a2 = 0.0;
  double n = 0.0;
  double norm = 0.0;
};

void accumulate(const StateVector& c, RawMoments& m) {
  const Eigen::Index d = c.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double p = std::norm(c(i));
    m.norm += p;
    m.n += static_cast<double>(i) * p;
    if (i + 1 < d) m.a += std::conj(c(i)) * c(i + 1) * std::sqrt(static_cast<double>(i + 1));
    if (i + 2 < d)
      m.a2 += std::conj(c(i)) * c(i + 2) * std::sqrt(static_cast<double>((i + 1) * (i + 2)));
  }
}

void matvec(const RowMajorMatrix& m, const StateVector& x, StateVector& y) {
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  kernels::cmatvec({m.data(), rows * cols}, rows, cols, {x.data(), cols}, {y.data(), rows});
}

}  // namespace

std::vector<double> CoinWalkerState::populations() const {
  std::vector<double> p(dim());
  for (std::size_t n = 0; n < p.size(); ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    p[n] = std::norm(up(i)) + std::norm(down(i));
  }
  return p;
}

CoinMatrix coin_matrix(double phi) {
  CoinMatrix c;
  const cplx e = std::polar(1.0, phi);
  c << 1.0, -kI * e, -kI * std::conj(e), 1.0;
  return c / std::numbers::sqrt2;
}

CoinMatrix pauli_x() {
  CoinMatrix x;
  x << 0.0, 1.0, 1.0, 0.0;
  return x;
}

// --- CompositeOperator -----------------------------------------------------

CompositeOperator CompositeOperator::coin_diagonal(const OperatorMatrix& up_op,
                                                   const OperatorMatrix& down_op) {
  if (up_op.rows() != down_op.rows()) throw ConfigError("coin_diagonal: block size mismatch");
  const auto d = up_op.rows();
  return {up_op, OperatorMatrix::Zero(d, d), OperatorMatrix::Zero(d, d), down_op};
}

CompositeOperator CompositeOperator::coin(const CoinMatrix& c, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  const OperatorMatrix id = OperatorMatrix::Identity(d, d);
  return {c(0, 0) * id, c(0, 1) * id, c(1, 0) * id, c(1, 1) * id};
}

CoinWalkerState CompositeOperator::apply(const CoinWalkerState& s) const {
  if (s.dim() != dim()) throw ConfigError("composite operator and state dimensions differ");
  return {uu * s.up + ud * s.down, du * s.up + dd * s.down};
}

CompositeOperator CompositeOperator::adjoint() const {
  return {uu.adjoint(), du.adjoint(), ud.adjoint(), dd.adjoint()};
}

CompositeOperator CompositeOperator::operator*(const CompositeOperator& r) const {
  return {uu * r.uu + ud * r.du, uu * r.ud + ud * r.dd, du * r.uu + dd * r.du,
          du * r.ud + dd * r.dd};
}

double CompositeOperator::unitarity_defect(std::size_t guard_levels) const {
  const CompositeOperator p = adjoint() * *this;
  const Eigen::Index keep = static_cast<Eigen::Index>(dim()) - static_cast<Eigen::Index>(guard_levels);
  double worst = 0.0;
  const OperatorMatrix* blocks[4] = {&p.uu, &p.ud, &p.du, &p.dd};
  for (int b = 0; b < 4; ++b) {
    const bool diagonal_block = (b == 0 || b == 3);
    for (Eigen::Index i = 0; i < keep; ++i)
      for (Eigen::Index j = 0; j < keep; ++j) {
        const cplx target = (diagonal_block && i == j) ? cplx(1.0) : cplx(0.0);
        worst = std::max(worst, std::abs((*blocks[b])(i, j) - target));
      }
  }
  return worst;
}

double operator_distance(const CompositeOperator& a, const CompositeOperator& b) {
  if (a.dim() != b.dim()) throw ConfigError("operator_distance: dimension mismatch");
  return std::max({(a.uu - b.uu).cwiseAbs().maxCoeff(), (a.ud - b.ud).cwiseAbs().maxCoeff(),
                   (a.du - b.du).cwiseAbs().maxCoeff(), (a.dd - b.dd).cwiseAbs().maxCoeff()});
}

// --- walk ------------------------------------------------------------------

CompositeOperator conditional_translation(double alpha_step, const TruncationConfig& cfg) {
  return CompositeOperator::coin_diagonal(displacement(alpha_step, cfg),
                                          displacement(-alpha_step, cfg));
}

StepOperators ideal_step_operators(double alpha_step, const TruncationConfig& cfg) {
  return {displacement(alpha_step, cfg), displacement(-alpha_step, cfg)};
}

CoinWalkerState apply_step(const CoinWalkerState& s, const CoinMatrix& coin,
                           const StepOperators& ops) {
  const auto d = static_cast<Eigen::Index>(s.dim());
  if (ops.up.rows() != d || ops.down.rows() != d)
    throw ConfigError("step operators and state dimensions differ");
  const StateVector u = coin(0, 0) * s.up + coin(0, 1) * s.down;
  const StateVector v = coin(1, 0) * s.up + coin(1, 1) * s.down;
  CoinWalkerState out{StateVector(d), StateVector(d)};
  matvec(ops.up, u, out.up);
  matvec(ops.down, v, out.down);
  return out;
}

CoinWalkerState ideal_step(const CoinWalkerState& s, double phi, double alpha_step,
                           const TruncationConfig& cfg) {
  TruncationConfig c = cfg;
  c.dim = s.dim();
  CoinWalkerState out = apply_step(s, coin_matrix(phi), ideal_step_operators(alpha_step, c));
  check_guard(out.populations(), c, "ideal_step");
  return out;
}

CoinWalkerState initial_state(const TruncationConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  CoinWalkerState s{StateVector::Zero(d), StateVector::Zero(d)};
  s.up(0) = 1.0 / std::numbers::sqrt2;
  s.down(0) = 1.0 / std::numbers::sqrt2;
  return s;
}

FockState reduce_walker(const CoinWalkerState& s) {
  return FockState::mixed(s.up * s.up.adjoint() + s.down * s.down.adjoint());
}

MomentSet walker_moments(const CoinWalkerState& s, const TruncationConfig& cfg) {
  TruncationConfig c = cfg;
  c.dim = s.dim();
  check_guard(s.populations(), c, "walker_moments");
  RawMoments r;
  accumulate(s.up, r);
  accumulate(s.down, r);
  const cplx ea = r.a / r.norm;
  const cplx ea2 = r.a2 / r.norm;
  const double en = r.n / r.norm;
  MomentSet m;
  m.mean_n = en;
  m.mean_x = std::numbers::sqrt2 * ea.real();
  m.mean_p = std::numbers::sqrt2 * ea.imag();
  m.var_x = ea2.real() + en + 0.5 - m.mean_x * m.mean_x;
  m.var_p = -ea2.real() + en + 0.5 - m.mean_p * m.mean_p;
  m.cov_xp = ea2.imag() - m.mean_x * m.mean_p;
  return m;
}

std::vector<double> walker_position_distribution(const CoinWalkerState& s,
                                                 std::span<const double> grid) {
  auto pu = position_distribution(FockState::pure(s.up), grid);
  const auto pd = position_distribution(FockState::pure(s.down), grid);
  for (std::size_t i = 0; i < pu.size(); ++i) pu[i] += pd[i];
  return pu;
}

WalkTrace run_walk(const StepOperators& ops, std::span<const double> phases,
                   const TruncationConfig& cfg) {
  WalkTrace t{{}, initial_state(cfg)};
  t.moments.reserve(phases.size() + 1);
  t.moments.push_back(walker_moments(t.final_state, cfg));
  for (double phi : phases) {
    t.final_state = apply_step(t.final_state, coin_matrix(phi), ops);
    t.moments.push_back(walker_moments(t.final_state, cfg));
  }
  return t;
}

double position_asymmetry(std::span<const double> grid, std::span<const double> density) {
  const std::size_t n = grid.size();
  if (n < 2 || density.size() != n) throw ConfigError("position_asymmetry: size mismatch");
  const double dx = (grid.back() - grid.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(grid[i] + grid[n - 1 - i]) > 1e-9 * (1.0 + std::abs(grid[i])))
      throw DomainError("position_asymmetry: grid is not symmetric about 0");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(density[i] - density[n - 1 - i]);
  return s * dx;
}

}  // namespace qwalk
