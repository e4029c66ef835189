// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qwalk/decoherence.hpp"
#include "qwalk/iontrap.hpp"
#include "qwalk/readout.hpp"
#include "qwalk/walker.hpp"
#include "qwalk/wigner.hpp"

using namespace qwalk;

namespace {

const double kPi = std::numbers::pi;

// Tolerances.
constexpr double kScalingLo = 1.85, kScalingHi = 2.05;
constexpr double kVarPSlopeMax = 0.1;
constexpr double kStepTarget = 0.565, kStepTol = 1e-3;
constexpr double kReductionTol = 1e-9;
constexpr double kOracleFidelity = 0.999, kOracleSlopeMin = 3.0;
constexpr double kWignerMinLo = -0.115, kWignerMinHi = -0.075;
constexpr double kWignerMaxLo = 0.032, kWignerMaxHi = 0.072;
constexpr double kWignerRefine = 1e-3;
constexpr double kReadoutNoiseless = 1e-2, kReadoutHybrid = 2e-2, kReadoutNoisy = 5e-2, kNoisyFraction = 0.95;
constexpr double kTruncationRel = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<double> range_n(int lo, int hi) {
  std::vector<double> v;
  for (int n = lo; n <= hi; ++n) v.push_back(n);
  return v;
}

template <class F>
std::vector<double> column(const std::vector<MomentSet>& m, int lo, int hi, F f) {
  std::vector<double> v;
  for (int n = lo; n <= hi; ++n) v.push_back(f(m[static_cast<std::size_t>(n)]));
  return v;
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

WalkTrace ideal_walk(int steps, double phi, std::size_t dim) {
  const TruncationConfig cfg{dim};
  return run_walk(ideal_step_operators(0.565, cfg), std::vector<double>(static_cast<std::size_t>(steps), phi), cfg);
}

WalkTrace ion_walk(int steps, double phi, std::size_t dim) {
  const TruncationConfig cfg{dim};
  return run_walk(ion_step_operators(IonParams{}, cfg), std::vector<double>(static_cast<std::size_t>(steps), phi), cfg);
}

Outcome ideal_scaling() {
  const WalkTrace tr = ideal_walk(17, kPi / 2, 256);
  const auto ns = range_n(3, 17);
  const double s_var = power_law_fit(ns, column(tr.moments, 3, 17, [](const MomentSet& m) { return m.var_x - 0.5; })).slope;
  const double s_raw = power_law_fit(ns, column(tr.moments, 3, 17, [](const MomentSet& m) { return m.var_x; })).slope;
  const double s_n = power_law_fit(ns, column(tr.moments, 3, 17, [](const MomentSet& m) { return m.mean_n; })).slope;
  const double s_p = power_law_fit(ns, column(tr.moments, 3, 17, [](const MomentSet& m) { return m.var_p; })).slope;
  Outcome o;
  o.pass = within(s_var, kScalingLo, kScalingHi) && within(s_n, kScalingLo, kScalingHi) && std::abs(s_p) < kVarPSlopeMax;
  o.detail = "excess var_x slope " + fmt("%.4f", s_var) + " (raw var_x " + fmt("%.4f", s_raw) + "), n-bar slope " +
             fmt("%.4f", s_n) + ", var_p slope " + fmt("%.4f", s_p);
  return o;
}

Outcome step_size() {
  const double a = IonParams{}.step_amplitude();
  return {std::abs(a - kStepTarget) <= kStepTol, "3 Omega eta t = " + fmt("%.6f", a)};
}

Outcome reduction() {
  const TruncationConfig cfg{256};
  IonParams p;
  p.include_B = false;
  p.include_Uoff = false;
  double worst = 0.0;
  for (double phi : {0.0, kPi / 4, kPi / 2, 2.0}) {
    const CompositeOperator ref = conditional_translation(p.step_amplitude(), cfg) *
                                  CompositeOperator::coin(coin_matrix(phi), cfg.dim);
    worst = std::max(worst, operator_distance(full_step(p, phi, cfg), ref));
  }
  return {worst < kReductionTol, "max operator distance " + fmt("%.3e", worst)};
}

Outcome oracle() {
  const TruncationConfig cfg{48};
  std::vector<double> etas = {0.05, 0.1, 0.2}, infid;
  double fid_ref = 0.0;
  for (double eta : etas) {
    IonParams p;
    p.eta = eta;
    const CoinWalkerState s0 = initial_state(cfg);
    const double f = state_fidelity(full_step(p, kPi / 2, cfg).apply(s0), direct_full_step(p, kPi / 2, s0));
    if (eta == 0.1) fid_ref = f;
    infid.push_back(1.0 - f);
  }
  const double slope = power_law_fit(etas, infid).slope;
  return {fid_ref >= kOracleFidelity && slope >= kOracleSlopeMin,
          "fidelity " + fmt("%.8f", fid_ref) + ", infidelities " + fmt("%.2e", infid[0]) + " " + fmt("%.2e", infid[1]) +
              " " + fmt("%.2e", infid[2]) + ", slope " + fmt("%.3f", slope)};
}

Outcome decoherence_slopes() {
  struct Case {
    const char* label;
    WalkKind kind;
    double q, xi, xi_tol, vs, vs_tol;
  };
  const std::vector<Case> cases = {
      {"ideal q=1", WalkKind::ideal, 1.0, 1.003, 0.15, 0.510, 0.10},
      {"ideal q=5", WalkKind::ideal, 5.0, 1.660, 0.15, 0.860, 0.10},
      {"ideal q=20", WalkKind::ideal, 20.0, 1.938, 0.10, 0.990, 0.10},
      {"ion q=1", WalkKind::ion, 1.0, 1.061, 0.15, 0.496, 0.10},
      {"ion q=20", WalkKind::ion, 20.0, 1.902, 0.15, 0.985, 0.10},
  };
  const TruncationConfig cfg{256};
  const StepOperators ideal_ops = ideal_step_operators(0.565, cfg);
  const StepOperators ion_ops = ion_step_operators(IonParams{}, cfg);
  Outcome o{true, ""};
  for (const Case& c : cases) {
    DecoherenceConfig d;
    d.q = c.q;
    d.n_traj = 400;
    d.n_steps = 17;
    d.walk_kind = c.kind;
    const EnsembleExponents e =
        ensemble_exponents(run_ensemble(d, c.kind == WalkKind::ideal ? ideal_ops : ion_ops, cfg), 3, 17);
    const bool ok = std::abs(e.xi.slope - c.xi) <= c.xi_tol && std::abs(e.varsigma.slope - c.vs) <= c.vs_tol;
    o.pass = o.pass && ok;
    o.detail += std::string(o.detail.empty() ? "" : "; ") + c.label + " xi " + fmt("%.3f", e.xi.slope) + " vs " +
                fmt("%.3f", e.varsigma.slope) + (ok ? "" : " (out)");
  }
  return o;
}

Outcome narrowing() {
  const WalkTrace ideal = ideal_walk(10, kPi / 2, 256);
  const WalkTrace ion = ion_walk(10, kPi / 2, 256);
  const double s_ion = std::sqrt(ion.moments[10].var_x), s_ideal = std::sqrt(ideal.moments[10].var_x);
  const double slope = linear_slope(range_n(1, 10), column(ion.moments, 1, 10, [](const MomentSet& m) { return m.var_p; }));
  return {s_ion < s_ideal && slope > 0.0, "sigma_ion " + fmt("%.4f", s_ion) + ", sigma_ideal " + fmt("%.4f", s_ideal) +
                                              ", var_p slope " + fmt("%.3e", slope)};
}

Outcome wigner_extrema() {
  const FockState rho = reduce_walker(ion_walk(10, kPi / 2, 256).final_state);
  GridSpec g;
  g.x_lo = g.p_lo = -14.0;
  g.x_hi = g.p_hi = 14.0;
  g.nx = g.np = 281;
  const WignerGrid w = wigner_grid(rho, g);
  g.nx = g.np = 561;
  const WignerGrid fine = wigner_grid(rho, g);
  const double refine = std::max(std::abs(fine.min() - w.min()), std::abs(fine.max() - w.max()));
  return {within(w.min(), kWignerMinLo, kWignerMinHi) && within(w.max(), kWignerMaxLo, kWignerMaxHi) &&
              refine < kWignerRefine,
          "min " + fmt("%.4f", w.min()) + ", max " + fmt("%.4f", w.max()) + ", refinement change " + fmt("%.2e", refine)};
}

std::vector<double> random_distribution(std::size_t support, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(support);
  double s = 0.0;
  for (auto& v : p) s += (v = u(rng));
  for (auto& v : p) v /= s;
  return p;
}

double linf(const std::vector<double>& a, const std::vector<double>& b, std::size_t upto) {
  double e = 0.0;
  for (std::size_t n = 0; n < upto; ++n)
    e = std::max(e, std::abs((n < a.size() ? a[n] : 0.0) - (n < b.size() ? b[n] : 0.0)));
  return e;
}

Outcome readout() {
  ReadoutConfig cfg;
  cfg.sample_times = ReadoutConfig::default_times(cfg.omega0);
  std::mt19937_64 rng(20090101);
  double clean = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto p = random_distribution(25, rng);
    clean = std::max(clean, linf(reconstruct(synthesize_signal(p, Channel::carrier, cfg), cfg).p_n_hat, p, 25));
  }

  ReadoutConfig hy = cfg;
  hy.n_max = 60;
  const auto pn = ideal_walk(17, kPi / 2, 256).final_state.populations();
  const double hybrid = linf(hybrid_reconstruct(synthesize_signal(pn, Channel::carrier, hy),
                                                synthesize_signal(pn, Channel::blue_sideband, hy), hy)
                                 .p_n_hat,
                             pn, 60);

  const int seeds = 100;
  int good = 0;
  for (int k = 0; k < seeds; ++k) {
    ReadoutConfig noisy = cfg;
    noisy.noise_sigma = 0.01;
    noisy.seed = 5000 + static_cast<std::uint64_t>(k);
    const auto p = random_distribution(25, rng);
    good += linf(reconstruct(synthesize_signal(p, Channel::carrier, noisy), noisy).p_n_hat, p, 25) < kReadoutNoisy;
  }
  const double frac = static_cast<double>(good) / seeds;
  return {clean < kReadoutNoiseless && hybrid < kReadoutHybrid && frac >= kNoisyFraction,
          "noiseless " + fmt("%.2e", clean) + ", hybrid N=17 " + fmt("%.2e", hybrid) + ", noisy pass fraction " +
              fmt("%.2f", frac)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Outcome properties() {
  std::ostringstream d;
  bool ok = true;

  // Unitarity of the step operators on the unguarded block.
  const TruncationConfig cfg{256};
  const double u_ideal = full_step(IonParams{.include_B = false, .include_Uoff = false}, kPi / 2, cfg)
                             .unitarity_defect(cfg.guard_levels());
  const double u_ion = full_step(IonParams{}, kPi / 2, cfg).unitarity_defect(cfg.guard_levels() + 8);
  ok = ok && u_ideal < 1e-8 && u_ion < 1e-8;
  d << "unitarity " << fmt("%.1e", std::max(u_ideal, u_ion));

  // Normalization of states and of the Wigner function.
  const WalkTrace ideal = ideal_walk(17, kPi / 2, 256);
  const double norm = std::abs(ideal.final_state.norm_squared() - 1.0);
  GridSpec g;
  g.x_lo = g.p_lo = -14.0;
  g.x_hi = g.p_hi = 14.0;
  g.nx = g.np = 281;
  const double wint = std::abs(wigner_grid(reduce_walker(ion_walk(10, kPi / 2, 256).final_state), g).integral() - 1.0);
  ok = ok && norm < 1e-8 && wint < 1e-3;
  d << ", norm " << fmt("%.1e", norm) << ", Wigner integral " << fmt("%.1e", wint);

  // Truncation convergence 256 -> 512.
  double trunc = 0.0;
  {
    const WalkTrace big = ideal_walk(17, kPi / 2, 512);
    const WalkTrace ion_a = ion_walk(10, kPi / 2, 256), ion_b = ion_walk(10, kPi / 2, 512);
    for (const auto& [a, b] : {std::pair{&ideal.moments.back(), &big.moments.back()},
                               std::pair{&ion_a.moments.back(), &ion_b.moments.back()}}) {
      trunc = std::max({trunc, rel(a->var_x, b->var_x), rel(a->var_p, b->var_p), rel(a->mean_n, b->mean_n)});
    }
  }
  ok = ok && trunc < kTruncationRel;
  d << ", dim 256->512 " << fmt("%.1e", trunc);

  // Mixture identity: the ensemble variance equals the mean trajectory
  // variance plus the variance of the trajectory means.
  DecoherenceConfig dc;
  dc.q = 5.0;
  dc.n_traj = 40;
  dc.jackknife_blocks = 4;
  const StepOperators ops = ideal_step_operators(dc.alpha_step, cfg);
  const auto obs = mixture_observables(run_ensemble(dc, ops, cfg));
  double mean_var = 0.0, mean_mu = 0.0, mean_mu2 = 0.0, mean_n = 0.0;
  for (int t = 0; t < dc.n_traj; ++t) {
    std::mt19937_64 rng(trajectory_seed(dc.master_seed, static_cast<std::uint64_t>(t)));
    const MomentSet m = run_walk(ops, sample_phases(dc.q, dc.n_steps, rng), cfg).moments.back();
    mean_var += m.var_x / dc.n_traj;
    mean_mu += m.mean_x / dc.n_traj;
    mean_mu2 += m.mean_x * m.mean_x / dc.n_traj;
    mean_n += m.mean_n / dc.n_traj;
  }
  const double mix = std::max(rel(obs.back().var_x, mean_var + mean_mu2 - mean_mu * mean_mu), rel(obs.back().mean_n, mean_n));
  ok = ok && mix < 1e-10;
  d << ", mixture identity " << fmt("%.1e", mix);

  // Thread-count reproducibility.
  dc.threads = 1;
  const EnsembleAccumulator a = run_ensemble(dc, ops, cfg);
  dc.threads = 4;
  const EnsembleAccumulator b = run_ensemble(dc, ops, cfg);
  const bool same = a.sums() == b.sums() && a.block_sums() == b.block_sums();
  ok = ok && same;
  d << ", threads 1 vs 4 " << (same ? "identical" : "differ");
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"ideal-walk scaling", ideal_scaling},
      {"step-size consistency", step_size},
      {"reduction identity", reduction},
      {"oracle equivalence", oracle},
      {"decoherence slopes", decoherence_slopes},
      {"ion-vs-ideal narrowing", narrowing},
      {"Wigner extrema", wigner_extrema},
      {"readout round trip", readout},
      {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed;
}
