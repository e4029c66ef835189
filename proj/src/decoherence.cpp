#include "qwalk/decoherence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Trajectory {
  std::vector<MomentSet> moments;
  std::vector<std::vector<double>> populations;
};

Trajectory run_trajectory(const DecoherenceConfig& cfg, const StepOperators& ops,
                          const TruncationConfig& trunc, std::uint64_t index) {
  std::mt19937_64 stream(trajectory_seed(cfg.master_seed, index));
  const auto phases = sample_phases(cfg.q, cfg.n_steps, stream);
  Trajectory t;
  t.moments.reserve(phases.size() + 1);
  t.populations.reserve(phases.size() + 1);
  CoinWalkerState s = initial_state(trunc);
  t.moments.push_back(walker_moments(s, trunc));
  t.populations.push_back(s.populations());
  for (double phi : phases) {
    s = apply_step(s, coin_matrix(phi), ops);
    t.moments.push_back(walker_moments(s, trunc));
    t.populations.push_back(s.populations());
  }
  return t;
}

int block_of(std::size_t index, int n_traj, int n_blocks) {
  return static_cast<int>(index * static_cast<std::size_t>(n_blocks) / static_cast<std::size_t>(n_traj));
}

double mixture_variance(double m1, double m2) { return m2 - m1 * m1; }

}  // namespace

void DecoherenceConfig::validate() const {
  if (std::isnan(q) || q < 1.0) throw DomainError("q must be >= 1 (or inf)");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (n_steps < 0) throw ConfigError("n_steps must be >= 0");
  if (jackknife_blocks < 1) throw ConfigError("jackknife_blocks must be >= 1");
  if (walk_kind == WalkKind::ion) ion.validate();
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

std::vector<double> sample_phases(double q, int n_steps, std::mt19937_64& stream) {
  if (std::isnan(q) || q < 1.0) throw DomainError("sample_phases: q must be >= 1");
  if (n_steps < 0) throw ConfigError("sample_phases: negative step count");
  std::vector<double> phases(static_cast<std::size_t>(n_steps), 0.0);
  if (std::isinf(q)) return phases;
  const double half_width = std::numbers::pi / q;
  for (double& phi : phases) {
    // Midpoint of one of 2^53 equal cells: never 0 or 1.
    const double u = (static_cast<double>(stream() >> 11) + 0.5) * 0x1.0p-53;
    phi = half_width * (2.0 * u - 1.0);
  }
  return phases;
}

// --- accumulator -----------------------------------------------------------

EnsembleAccumulator::EnsembleAccumulator(int n_steps, std::size_t dim, int n_blocks)
    : n_steps_(n_steps), dim_(dim),
      sums_(static_cast<std::size_t>(n_steps + 1) * kFields, 0.0),
      block_sums_(static_cast<std::size_t>(n_blocks), Sums(sums_.size(), 0.0)),
      block_counts_(static_cast<std::size_t>(n_blocks), 0),
      pn_(static_cast<std::size_t>(n_steps + 1), std::vector<double>(dim, 0.0)) {}

void EnsembleAccumulator::add(const std::vector<MomentSet>& moments,
                              const std::vector<std::vector<double>>& populations, int block) {
  const auto steps = static_cast<std::size_t>(n_steps_ + 1);
  if (moments.size() != steps || populations.size() != steps)
    throw ConfigError("EnsembleAccumulator::add: trajectory length mismatch");
  Sums& bs = block_sums_.at(static_cast<std::size_t>(block));
  for (std::size_t k = 0; k < steps; ++k) {
    const MomentSet& m = moments[k];
    const double f[kFields] = {m.mean_x, m.var_x + m.mean_x * m.mean_x, m.mean_p,
                               m.var_p + m.mean_p * m.mean_p, m.mean_n};
    for (int j = 0; j < kFields; ++j) {
      sums_[k * kFields + static_cast<std::size_t>(j)] += f[j];
      bs[k * kFields + static_cast<std::size_t>(j)] += f[j];
    }
    for (std::size_t n = 0; n < dim_; ++n) pn_[k][n] += populations[k][n];
  }
  ++block_counts_[static_cast<std::size_t>(block)];
  ++count_;
}

EnsembleAccumulator run_ensemble(const DecoherenceConfig& cfg, const TruncationConfig& trunc) {
  cfg.validate();
  trunc.validate();
  const StepOperators ops = cfg.walk_kind == WalkKind::ideal
                                ? ideal_step_operators(cfg.alpha_step, trunc)
                                : ion_step_operators(cfg.ion, trunc);
  return run_ensemble(cfg, ops, trunc);
}

EnsembleAccumulator run_ensemble(const DecoherenceConfig& cfg, const StepOperators& ops,
                                 const TruncationConfig& trunc) {
  cfg.validate();
  const int n_blocks = std::min(cfg.jackknife_blocks, cfg.n_traj);
  EnsembleAccumulator acc(cfg.n_steps, trunc.dim, n_blocks);
  unsigned threads = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
  threads = std::max(1u, threads);

  const auto n_traj = static_cast<std::size_t>(cfg.n_traj);
  constexpr std::size_t kBatch = 64;
  std::vector<Trajectory> results(kBatch);
  std::vector<std::exception_ptr> errors(kBatch);
  for (std::size_t begin = 0; begin < n_traj; begin += kBatch) {
    const std::size_t end = std::min(n_traj, begin + kBatch);
    std::atomic<std::size_t> next{begin};
    auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < end; i = next.fetch_add(1)) {
        try {
          results[i - begin] = run_trajectory(cfg, ops, trunc, i);
        } catch (...) {
          errors[i - begin] = std::current_exception();
        }
      }
    };
    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, end - begin));
    if (n_workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    for (std::size_t i = begin; i < end; ++i) {
      if (errors[i - begin]) std::rethrow_exception(errors[i - begin]);
      const Trajectory& t = results[i - begin];
      acc.add(t.moments, t.populations, block_of(i, cfg.n_traj, n_blocks));
    }
  }
  return acc;
}

// --- observables -----------------------------------------------------------

double MixtureStep::sigma_x() const { return std::sqrt(std::max(0.0, var_x)); }
double MixtureStep::sigma_p() const { return std::sqrt(std::max(0.0, var_p)); }
double MixtureStep::excess_sigma_x() const { return std::sqrt(std::max(0.0, var_x - 0.5)); }

namespace {

std::vector<MixtureStep> observables_from_sums(const EnsembleAccumulator::Sums& sums, double count,
                                               int n_steps) {
  constexpr int F = EnsembleAccumulator::kFields;
  std::vector<MixtureStep> out(static_cast<std::size_t>(n_steps + 1));
  for (int k = 0; k <= n_steps; ++k) {
    const double* s = sums.data() + static_cast<std::size_t>(k) * F;
    MixtureStep& m = out[static_cast<std::size_t>(k)];
    m.step = k;
    m.mean_x = s[0] / count;
    m.mean_p = s[2] / count;
    m.var_x = mixture_variance(m.mean_x, s[1] / count);
    m.var_p = mixture_variance(m.mean_p, s[3] / count);
    m.mean_n = s[4] / count;
  }
  return out;
}

struct FitPair {
  PowerLawFit xi;
  PowerLawFit varsigma;
};

FitPair fit_steps(const std::vector<MixtureStep>& steps, int n_lo, int n_hi) {
  std::vector<double> ns, nbar, spread;
  for (int k = n_lo; k <= n_hi; ++k) {
    const MixtureStep& m = steps[static_cast<std::size_t>(k)];
    ns.push_back(static_cast<double>(k));
    nbar.push_back(m.mean_n);
    spread.push_back(m.excess_sigma_x());
  }
  return {power_law_fit(ns, nbar), power_law_fit(ns, spread)};
}

}  // namespace

std::vector<MixtureStep> mixture_observables(const EnsembleAccumulator& acc) {
  if (acc.count() == 0) throw ConfigError("mixture_observables: empty accumulator");
  return observables_from_sums(acc.sums(), static_cast<double>(acc.count()), acc.n_steps());
}

std::vector<double> mixture_populations(const EnsembleAccumulator& acc, int step) {
  if (acc.count() == 0) throw ConfigError("mixture_populations: empty accumulator");
  if (step < 0 || step > acc.n_steps()) throw ConfigError("mixture_populations: step out of range");
  std::vector<double> p = acc.population_sums(step);
  for (double& v : p) v /= static_cast<double>(acc.count());
  return p;
}

PowerLawFit power_law_fit(std::span<const double> n_values, std::span<const double> y_values) {
  if (n_values.size() != y_values.size()) throw ConfigError("power_law_fit: size mismatch");
  const std::size_t m = n_values.size();
  if (m < 3) throw DomainError("power_law_fit: need at least 3 points");
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(n_values[i] > 0.0) || !(y_values[i] > 0.0))
      throw DomainError("power_law_fit: values must be positive");
    lx[i] = std::log(n_values[i]);
    ly[i] = std::log(y_values[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw DomainError("power_law_fit: all N values equal");
  PowerLawFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_se = std::sqrt(sse / static_cast<double>(m - 2) / sxx);
  return f;
}

double linear_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("linear_slope: need >= 2 paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("linear_slope: x values all equal");
  return sxy / sxx;
}

EnsembleExponents ensemble_exponents(const EnsembleAccumulator& acc, int n_lo, int n_hi) {
  if (n_hi <= 0) n_hi = acc.n_steps();
  if (n_lo < 1 || n_hi > acc.n_steps() || n_hi - n_lo < 2)
    throw DomainError("ensemble_exponents: fit range needs >= 3 steps within the walk");
  const FitPair all = fit_steps(mixture_observables(acc), n_lo, n_hi);
  EnsembleExponents e{all.xi, all.varsigma, 0.0, 0.0};

  const auto& blocks = acc.block_sums();
  const std::size_t n_blocks = blocks.size();
  if (n_blocks < 2) return e;
  std::vector<double> xi(n_blocks), vs(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    EnsembleAccumulator::Sums loo = acc.sums();
    for (std::size_t j = 0; j < loo.size(); ++j) loo[j] -= blocks[b][j];
    const double count = static_cast<double>(acc.count() - acc.block_counts()[b]);
    const FitPair f = fit_steps(observables_from_sums(loo, count, acc.n_steps()), n_lo, n_hi);
    xi[b] = f.xi.slope;
    vs[b] = f.varsigma.slope;
  }
  auto jk = [&](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss * static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  e.xi_jackknife_se = jk(xi);
  e.varsigma_jackknife_se = jk(vs);
  return e;
}

}  // namespace qwalk
