#include "qwalk/iontrap.hpp"

#include <cmath>
#include <complex>

#include "qwalk/errors.hpp"
#include "qwalk/kernels.hpp"

namespace qwalk {

namespace {

constexpr cplx kI{0.0, 1.0};

bool finite_all(std::initializer_list<double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Antiderivative factor of e^{i m w s} over the pulse, m != 0.
cplx time_factor(int m, const IonParams& p) {
  const double w = static_cast<double>(m) * p.omega_z;
  const cplx at_end = std::exp(kI * w * p.pulse_t) / (kI * w);
  if (p.timing == OffResonantTiming::pulse_end) return at_end;
  return at_end - 1.0 / (kI * w);
}

struct Ladder {
  OperatorMatrix a;
  OperatorMatrix ad;
  OperatorMatrix id;
  OperatorMatrix n;
};

Ladder make_ladder(const TruncationConfig& cfg) {
  auto [a, ad] = ladder_ops(cfg);
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  return {a, ad, OperatorMatrix::Identity(d, d), number_op(cfg)};
}

// Accumulates -i (X + X^dag) for X = l c f M into g.
void add_term(OperatorMatrix& g, cplx weight, const OperatorMatrix& m) {
  const OperatorMatrix x = weight * m;
  g += -kI * (x + x.adjoint());
}

OperatorMatrix exp_if_nonzero(const OperatorMatrix& g) {
  if (g.cwiseAbs().maxCoeff() == 0.0)
    return OperatorMatrix::Identity(g.rows(), g.cols());
  return expm_skew_hermitian(g);
}

void require_resonant(const IonParams& p) {
  if (std::abs(p.delta - p.omega_z) > 1e-12 * std::abs(p.omega_z))
    throw ConfigError("the Lamb-Dicke product form requires delta == omega_z");
}

}  // namespace

std::string timing_name(OffResonantTiming t) {
  return t == OffResonantTiming::interval ? "interval" : "pulse_end";
}

OffResonantTiming parse_timing(const std::string& s) {
  if (s == "interval") return OffResonantTiming::interval;
  if (s == "pulse_end") return OffResonantTiming::pulse_end;
  throw ConfigError("unknown off-resonant timing '" + s + "' (interval or pulse_end)");
}

void IonParams::validate() const {
  if (!finite_all({delta, omega_z, omega_up, eta, pulse_t, laser_phase}))
    throw ConfigError("ion parameters must be finite");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(pulse_t > 0.0)) throw ConfigError("pulse_t must be positive");
  if (!(omega_z > 0.0)) throw ConfigError("omega_z must be positive");
}

StepDiagnostics ld_validity(const IonParams& p, int n_max_steps) {
  if (n_max_steps < 1) throw ConfigError("ld_validity: n_max_steps must be >= 1");
  StepDiagnostics d;
  d.displacement_magnitude = std::abs(p.step_amplitude());
  const double bound = std::pow(2.0 / 3.0, 0.25) /
                       std::sqrt(static_cast<double>(n_max_steps) * std::abs(p.omega_up) * p.pulse_t);
  d.ld_margin = bound / p.eta;
  return d;
}

OperatorMatrix resonant_factor(double coefficient, const IonParams& p, const TruncationConfig& cfg) {
  p.validate();
  const cplx l = coefficient * std::polar(1.0, p.laser_phase);
  OperatorMatrix u = displacement(l * p.eta * p.pulse_t, cfg);
  if (p.include_B) u = u * cubic_b(-l * std::pow(p.eta, 3) * p.pulse_t, cfg);
  return u;
}

OperatorMatrix u_off(double coefficient, const IonParams& p, const TruncationConfig& cfg) {
  p.validate();
  require_resonant(p);
  const Ladder L = make_ladder(cfg);
  const cplx l = coefficient * std::polar(1.0, p.laser_phase);
  const double eta = p.eta;
  // Expansion coefficients (i eta)^k / k!.
  const cplx c1 = kI * eta;
  const cplx c2 = -0.5 * eta * eta;
  const cplx c3 = -kI * eta * eta * eta / 6.0;
  const auto d = static_cast<Eigen::Index>(cfg.dim);
  const OperatorMatrix zero = OperatorMatrix::Zero(d, d);

  // A term with n_+ creators and n_- annihilators carries e^{i(n_+ - n_- - 1) w s}.
  OperatorMatrix g_disp = zero;
  add_term(g_disp, l * c1 * time_factor(-2, p), L.a);

  OperatorMatrix g_sq = zero;
  add_term(g_sq, l * c2 * time_factor(1, p), L.ad * L.ad);
  add_term(g_sq, l * c2 * time_factor(-3, p), L.a * L.a);

  const OperatorMatrix k3 = L.ad * L.ad * L.a + L.ad * L.a * L.ad + L.a * L.ad * L.ad;
  OperatorMatrix g_cub = zero;
  add_term(g_cub, l * c3 * time_factor(-2, p), k3.adjoint());

  OperatorMatrix g_ph = zero;
  add_term(g_ph, l * c2 * time_factor(-1, p), 2.0 * L.n + L.id);
  add_term(g_ph, l * c3 * time_factor(2, p), L.ad * L.ad * L.ad);
  add_term(g_ph, l * c3 * time_factor(-4, p), L.a * L.a * L.a);

  // Carrier: a c-number phase.
  OperatorMatrix g_car = zero;
  add_term(g_car, l * time_factor(-1, p), L.id);

  OperatorMatrix u = L.id;
  if (p.factors.displacement) u = u * exp_if_nonzero(g_disp);
  if (p.factors.squeeze) u = u * exp_if_nonzero(g_sq);
  if (p.factors.cubic) u = u * exp_if_nonzero(g_cub);
  if (p.factors.phase) u = u * exp_if_nonzero(g_ph);
  u *= std::exp(g_car(0, 0));
  return u;
}

cplx uoff_squeeze_parameter(double coefficient, const IonParams& p) {
  const cplx l = coefficient * std::polar(1.0, p.laser_phase);
  const cplx c2 = -0.5 * p.eta * p.eta;
  // Coefficient of a^dag^2 in the generator, from the a^dag^2 term and the
  // conjugate of the a^2 term.
  const cplx from_ad2 = -kI * l * c2 * time_factor(1, p);
  const cplx from_a2 = -kI * l * c2 * time_factor(-3, p);
  const cplx coef = from_ad2 - std::conj(from_a2);
  return -2.0 * coef;
}

OperatorMatrix branch_operator(double coefficient, const IonParams& p, const TruncationConfig& cfg) {
  OperatorMatrix u = resonant_factor(coefficient, p, cfg);
  if (p.include_Uoff) u = u * u_off(coefficient, p, cfg);
  return u;
}

IonStepOperator step_operator_product(const IonParams& p, const TruncationConfig& cfg,
                                      int n_max_steps) {
  if (p.include_Uoff) require_resonant(p);
  const OperatorMatrix uu = branch_operator(p.omega_up, p, cfg);
  const OperatorMatrix ud = branch_operator(p.omega_down(), p, cfg);
  IonStepOperator out{CompositeOperator::coin_diagonal(uu, ud), ld_validity(p, n_max_steps)};
  std::vector<double> col(cfg.dim);
  for (std::size_t n = 0; n < cfg.dim; ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    col[n] = 0.5 * (std::norm(uu(i, 0)) + std::norm(ud(i, 0)));
  }
  out.diagnostics.guard_population = guard_population(col, cfg);
  check_guard(col, cfg, "step_operator_product");
  return out;
}

StepOperators ion_step_operators(const IonParams& p, const TruncationConfig& cfg) {
  const OperatorMatrix uu = branch_operator(p.omega_up, p, cfg);
  const OperatorMatrix ud = branch_operator(p.omega_down(), p, cfg);
  StepOperators ops{ud.adjoint() * uu, uu.adjoint() * ud};
  std::vector<double> col(cfg.dim);
  for (std::size_t n = 0; n < cfg.dim; ++n) {
    const auto i = static_cast<Eigen::Index>(n);
    col[n] = 0.5 * (std::norm(ops.up(i, 0)) + std::norm(ops.down(i, 0)));
  }
  check_guard(col, cfg, "ion_step_operators");
  return ops;
}

CompositeOperator full_step(const IonParams& p, double phi, const TruncationConfig& cfg) {
  const CompositeOperator u = step_operator_product(p, cfg).u;
  const CompositeOperator x = CompositeOperator::coin(pauli_x(), cfg.dim);
  return x * u.adjoint() * x * u * CompositeOperator::coin(coin_matrix(phi), cfg.dim);
}

// --- direct integration ----------------------------------------------------

namespace {

// exp(-i sign h (w1 H(t1) + w2 H(t2))) applied to one branch by a Taylor
// series on the vector. H(s) = Omega [e^{-i chi} M(s) + h.c.], chi = delta s -
// phi_L, M(s) = D(i eta e^{i w s}) = R(w s) D(i eta) R(w s)^dag, R = e^{i theta n}.
class BranchPropagator {
 public:
  BranchPropagator(double omega_s, const IonParams& p, const RowMajorMatrix& d0,
                   const RowMajorMatrix& d0_dag)
      : omega_s_(omega_s), p_(p), d0_(d0), d0_dag_(d0_dag),
        dim_(static_cast<std::size_t>(d0.rows())), rot_(dim_), m1_(dim_), m2_(dim_),
        h1_(dim_), h2_(dim_) {}

  void exp_step(double t1, double t2, double w1, double w2, double h, double sign,
                StateVector& psi) {
    StateVector term = psi;
    StateVector next(static_cast<Eigen::Index>(dim_));
    const double psi_norm = psi.norm();
    for (int k = 1; k <= 40; ++k) {
      apply_h(t1, term, h1_);
      apply_h(t2, term, h2_);
      next = (-kI * sign * h / static_cast<double>(k)) * (w1 * h1_ + w2 * h2_);
      term.swap(next);
      psi += term;
      if (term.norm() <= 1e-17 * psi_norm) return;
    }
    throw ConvergenceError("direct_integrate: Taylor series did not converge; reduce dt");
  }

 private:
  void apply_h(double s, const StateVector& in, StateVector& out) {
    const double theta = p_.omega_z * s;
    const double chi = p_.delta * s - p_.laser_phase;
    for (std::size_t n = 0; n < dim_; ++n)
      rot_(static_cast<Eigen::Index>(n)) =
          std::polar(1.0, -theta * static_cast<double>(n)) * in(static_cast<Eigen::Index>(n));
    kernels::cmatvec({d0_.data(), dim_ * dim_}, dim_, dim_, {rot_.data(), dim_}, {m1_.data(), dim_});
    kernels::cmatvec({d0_dag_.data(), dim_ * dim_}, dim_, dim_, {rot_.data(), dim_},
                     {m2_.data(), dim_});
    const cplx e = std::polar(1.0, -chi);
    for (std::size_t n = 0; n < dim_; ++n) {
      const auto i = static_cast<Eigen::Index>(n);
      out(i) = omega_s_ * std::polar(1.0, theta * static_cast<double>(n)) *
               (e * m1_(i) + std::conj(e) * m2_(i));
    }
  }

  double omega_s_;
  const IonParams& p_;
  const RowMajorMatrix& d0_;
  const RowMajorMatrix& d0_dag_;
  std::size_t dim_;
  StateVector rot_, m1_, m2_, h1_, h2_;
};

CoinWalkerState integrate_substeps(const IonParams& p, const CoinWalkerState& s,
                                   std::size_t n_sub, bool adjoint) {
  TruncationConfig cfg;
  cfg.dim = s.dim();
  // Exponential of the truncated generator, so each substep is exactly unitary.
  const OperatorMatrix d0_exact = [&] {
    auto [a, ad] = ladder_ops(cfg);
    return expm_skew_hermitian(cplx(0.0, p.eta) * (ad + a));
  }();
  const RowMajorMatrix dm = d0_exact;
  const RowMajorMatrix dm_dag = d0_exact.adjoint();

  const double r3 = std::sqrt(3.0);
  const double c1 = 0.5 - r3 / 6.0;
  const double c2 = 0.5 + r3 / 6.0;
  const double wa = 0.25 + r3 / 6.0;
  const double wb = 0.25 - r3 / 6.0;
  const double h = p.pulse_t / static_cast<double>(n_sub);

  CoinWalkerState out = s;
  BranchPropagator up(p.omega_up, p, dm, dm_dag);
  BranchPropagator down(p.omega_down(), p, dm, dm_dag);
  for (std::size_t j = 0; j < n_sub; ++j) {
    const std::size_t k = adjoint ? n_sub - 1 - j : j;
    const double t0 = static_cast<double>(k) * h;
    const double t1 = t0 + c1 * h;
    const double t2 = t0 + c2 * h;
    if (!adjoint) {
      up.exp_step(t1, t2, wa, wb, h, 1.0, out.up);
      up.exp_step(t1, t2, wb, wa, h, 1.0, out.up);
      down.exp_step(t1, t2, wa, wb, h, 1.0, out.down);
      down.exp_step(t1, t2, wb, wa, h, 1.0, out.down);
    } else {
      up.exp_step(t1, t2, wb, wa, h, -1.0, out.up);
      up.exp_step(t1, t2, wa, wb, h, -1.0, out.up);
      down.exp_step(t1, t2, wb, wa, h, -1.0, out.down);
      down.exp_step(t1, t2, wa, wb, h, -1.0, out.down);
    }
  }
  return out;
}

CoinWalkerState integrate_checked(const IonParams& p, const CoinWalkerState& s,
                                  const IntegratorOptions& opt, bool adjoint) {
  p.validate();
  const double period = 2.0 * std::numbers::pi / p.omega_z;
  const double dt = opt.dt > 0.0 ? opt.dt : period / 200.0;
  if (dt > period / 50.0 * (1.0 + 1e-12))
    throw ConvergenceError("direct_integrate: dt coarser than 2 pi/(50 omega_z)");
  const auto n_sub = static_cast<std::size_t>(std::ceil(p.pulse_t / dt - 1e-9));
  CoinWalkerState out = integrate_substeps(p, s, n_sub, adjoint);
  if (opt.check_convergence) {
    const CoinWalkerState fine = integrate_substeps(p, s, 2 * n_sub, adjoint);
    const double diff =
        std::sqrt((out.up - fine.up).squaredNorm() + (out.down - fine.down).squaredNorm());
    if (diff >= opt.tolerance)
      throw ConvergenceError("direct_integrate: halving dt changed the state by " +
                             std::to_string(diff));
  }
  TruncationConfig cfg;
  cfg.dim = s.dim();
  check_guard(out.populations(), cfg, "direct_integrate");
  return out;
}

CoinWalkerState swap_coin(const CoinWalkerState& s) { return {s.down, s.up}; }

}  // namespace

CoinWalkerState direct_integrate(const IonParams& p, const CoinWalkerState& s,
                                 const IntegratorOptions& opt) {
  return integrate_checked(p, s, opt, false);
}

CoinWalkerState direct_integrate_adjoint(const IonParams& p, const CoinWalkerState& s,
                                         const IntegratorOptions& opt) {
  return integrate_checked(p, s, opt, true);
}

CoinWalkerState direct_full_step(const IonParams& p, double phi, const CoinWalkerState& s,
                                 const IntegratorOptions& opt) {
  const CoinMatrix c = coin_matrix(phi);
  CoinWalkerState t{c(0, 0) * s.up + c(0, 1) * s.down, c(1, 0) * s.up + c(1, 1) * s.down};
  t = direct_integrate(p, t, opt);
  t = swap_coin(t);
  t = direct_integrate_adjoint(p, t, opt);
  return swap_coin(t);
}

double state_fidelity(const CoinWalkerState& a, const CoinWalkerState& b) {
  const cplx ov = a.up.dot(b.up) + a.down.dot(b.down);
  return std::norm(ov);
}

}  // namespace qwalk
