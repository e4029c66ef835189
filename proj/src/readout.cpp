#include "qwalk/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

std::vector<double> frequency_table(Channel c, int count, const ReadoutConfig& cfg) {
  std::vector<double> w(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) w[static_cast<std::size_t>(n)] = rabi_freq(c, n, cfg);
  return w;
}

Eigen::MatrixXd dictionary(const std::vector<double>& times, const std::vector<double>& freqs,
                           int first, int last) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(times.size()), last - first);
  for (int n = first; n < last; ++n)
    for (std::size_t i = 0; i < times.size(); ++i)
      a(static_cast<Eigen::Index>(i), n - first) = std::cos(freqs[static_cast<std::size_t>(n)] * times[i]);
  return a;
}

Eigen::VectorXd target(const SignalTrace& sig) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(sig.p_down.size()));
  for (std::size_t i = 0; i < sig.p_down.size(); ++i)
    b(static_cast<Eigen::Index>(i)) = 2.0 * sig.p_down[i] - 1.0;
  return b;
}

double duration_of(const SignalTrace& sig) { return sig.times.back() - sig.times.front(); }

void check_trace(const SignalTrace& sig) {
  if (sig.times.size() != sig.p_down.size())
    throw ConfigError("signal trace: times and p_down lengths differ");
  if (sig.times.size() < 2) throw ResolvabilityError("signal trace has fewer than two samples");
  for (std::size_t i = 1; i < sig.times.size(); ++i)
    if (!(sig.times[i] > sig.times[i - 1]))
      throw ConfigError("signal trace: sample times must be strictly increasing");
  if (!(duration_of(sig) > 0.0)) throw ResolvabilityError("signal trace has zero duration");
}

void check_resolvable(const SignalTrace& sig, const std::vector<double>& freqs) {
  double fastest = 0.0;
  for (double w : freqs) fastest = std::max(fastest, std::abs(w));
  if (fastest == 0.0) throw ResolvabilityError("all dictionary frequencies vanish");
  double max_gap = 0.0;
  for (std::size_t i = 1; i < sig.times.size(); ++i)
    max_gap = std::max(max_gap, sig.times[i] - sig.times[i - 1]);
  if (fastest * max_gap >= std::numbers::pi)
    throw ResolvabilityError("sampling is coarser than the Nyquist limit of the fastest tone");
  if (duration_of(sig) < 4.0 * 2.0 * std::numbers::pi / fastest)
    throw ResolvabilityError("signal shorter than four periods of the fastest tone");
}

std::vector<bool> collisions(const std::vector<double>& freqs, int count, double resolution) {
  std::vector<bool> flag(static_cast<std::size_t>(count), false);
  for (int n = 0; n < count; ++n)
    for (int m = 0; m < count; ++m)
      if (m != n && std::abs(std::abs(freqs[static_cast<std::size_t>(n)]) -
                             std::abs(freqs[static_cast<std::size_t>(m)])) < resolution)
        flag[static_cast<std::size_t>(n)] = true;
  return flag;
}

double condition_number(const Eigen::MatrixXd& a) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double lo = s(s.size() - 1);
  return lo > 0.0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

// NNLS with the extra constraint sum x <= cap, imposed by a heavily weighted
// row only when the plain solution violates it.
Eigen::VectorXd solve_capped(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double cap) {
  cap = std::max(cap, 0.0);
  Eigen::VectorXd x = nnls(a, b).x;
  if (x.sum() <= cap + 1e-9) return x;
  const double w = 1e3 * std::sqrt(static_cast<double>(a.rows()));
  Eigen::MatrixXd aa(a.rows() + 1, a.cols());
  aa.topRows(a.rows()) = a;
  aa.row(a.rows()).setConstant(w);
  Eigen::VectorXd bb(b.size() + 1);
  bb.head(b.size()) = b;
  bb(b.size()) = w * cap;
  x = nnls(aa, bb).x;
  const double s = x.sum();
  if (s > cap && s > 0.0) x *= cap / s;
  return x;
}

}  // namespace

std::string channel_name(Channel c) { return c == Channel::carrier ? "carrier" : "blue_sideband"; }

Channel parse_channel(const std::string& s) {
  if (s == "carrier") return Channel::carrier;
  if (s == "blue_sideband" || s == "bsb") return Channel::blue_sideband;
  throw ConfigError("unknown readout channel '" + s + "' (carrier or blue_sideband)");
}

void ReadoutConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("readout eta must be >= 0");
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw ConfigError("omega0 must be positive");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (carrier_levels < 1) throw ConfigError("carrier_levels must be >= 1");
  for (std::size_t i = 1; i < sample_times.size(); ++i)
    if (!(sample_times[i] > sample_times[i - 1]))
      throw ConfigError("sample_times must be strictly increasing");
}

std::vector<double> ReadoutConfig::default_times(double omega0, std::size_t count,
                                                 double duration_rad) {
  std::vector<double> t(count);
  const double duration = duration_rad / omega0;
  for (std::size_t i = 0; i < count; ++i)
    t[i] = duration * static_cast<double>(i) / static_cast<double>(count - 1);
  return t;
}

double laguerre(int n, int m, double x) {
  if (n < 0 || m < 0) throw DomainError("laguerre: n and m must be >= 0");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + m - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + m - x) * cur - (k + m) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double rabi_freq(Channel c, int n, double eta, double omega0) {
  if (n < 0) throw DomainError("rabi_freq: n must be >= 0");
  const double x = eta * eta;
  const double base = omega0 * std::exp(-0.5 * x);
  if (c == Channel::carrier) return base * laguerre(n, 0, x);
  return base * eta * laguerre(n, 1, x) / std::sqrt(n + 1.0);
}

double rabi_freq(Channel c, int n, const ReadoutConfig& cfg) {
  return rabi_freq(c, n, cfg.eta, cfg.omega0);
}

SignalTrace synthesize_signal(std::span<const double> p_n, Channel c, const ReadoutConfig& cfg) {
  cfg.validate();
  double total = 0.0;
  for (double v : p_n) {
    if (v < 0.0) throw DomainError("synthesize_signal: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw DomainError("synthesize_signal: P_n sums to " + std::to_string(total) + ", not 1");
  const auto freqs = frequency_table(c, static_cast<int>(p_n.size()), cfg);
  SignalTrace s{cfg.sample_times, std::vector<double>(cfg.sample_times.size()), c};
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    double sum = 0.0;
    for (std::size_t n = 0; n < p_n.size(); ++n)
      if (p_n[n] != 0.0) sum += p_n[n] * std::cos(freqs[n] * s.times[i]);
    s.p_down[i] = 0.5 * (1.0 + sum);
  }
  if (cfg.noise_sigma > 0.0) {
    std::mt19937_64 stream(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (double& v : s.p_down) v = std::clamp(v + noise(stream), 0.0, 1.0);
  }
  return s;
}

bool ReconstructionResult::any_ambiguous() const {
  return std::any_of(ambiguity_flags.begin(), ambiguity_flags.end(), [](bool b) { return b; });
}

ReconstructionResult reconstruct(const SignalTrace& sig, const ReadoutConfig& cfg) {
  cfg.validate();
  check_trace(sig);
  const auto freqs = frequency_table(sig.channel, cfg.n_max, cfg);
  check_resolvable(sig, freqs);
  const Eigen::MatrixXd a = dictionary(sig.times, freqs, 0, cfg.n_max);
  const Eigen::VectorXd b = target(sig);

  ReconstructionResult r;
  const Eigen::VectorXd x = solve_capped(a, b, 1.0);
  r.p_n_hat.assign(x.data(), x.data() + x.size());
  r.residual_norm = (a * x - b).norm();
  r.ambiguity_flags = collisions(freqs, cfg.n_max, 2.0 * std::numbers::pi / duration_of(sig));
  r.condition_number = condition_number(a);
  r.ill_conditioned = r.condition_number > cfg.condition_limit;
  r.deficit = 1.0 - x.sum();
  return r;
}

ReconstructionResult hybrid_reconstruct(const SignalTrace& carrier, const SignalTrace& bsb,
                                        const ReadoutConfig& cfg) {
  cfg.validate();
  if (carrier.channel != Channel::carrier || bsb.channel != Channel::blue_sideband)
    throw ConfigError("hybrid_reconstruct expects a carrier and a blue-sideband trace");
  check_trace(carrier);
  check_trace(bsb);
  const int n_max = cfg.n_max;
  const int split = std::min(cfg.carrier_levels, n_max);
  const auto fc = frequency_table(Channel::carrier, n_max, cfg);
  const auto fb = frequency_table(Channel::blue_sideband, n_max, cfg);
  check_resolvable(carrier, fc);
  check_resolvable(bsb, fb);

  // Stage 1: carrier over every level, keep the low ones.
  const Eigen::MatrixXd ac = dictionary(carrier.times, fc, 0, n_max);
  const Eigen::VectorXd bc = target(carrier);
  const Eigen::VectorXd x1 = solve_capped(ac, bc, 1.0);
  Eigen::VectorXd known = x1.head(split);

  // Stage 2: sideband for the remaining levels with the low ones held fixed.
  const Eigen::MatrixXd ab = dictionary(bsb.times, fb, 0, n_max);
  const Eigen::VectorXd bb = target(bsb);
  Eigen::VectorXd x(n_max);
  x.head(split) = known;
  if (split < n_max) {
    const Eigen::VectorXd rhs = bb - ab.leftCols(split) * known;
    x.tail(n_max - split) = solve_capped(ab.rightCols(n_max - split), rhs, 1.0 - known.sum());
  }

  ReconstructionResult r;
  r.p_n_hat.assign(x.data(), x.data() + x.size());
  r.residual_norm = std::sqrt((ac * x - bc).squaredNorm() + (ab * x - bb).squaredNorm());
  const auto flag_c = collisions(fc, n_max, 2.0 * std::numbers::pi / duration_of(carrier));
  const auto flag_b = collisions(fb, n_max, 2.0 * std::numbers::pi / duration_of(bsb));
  r.ambiguity_flags.resize(static_cast<std::size_t>(n_max));
  for (std::size_t n = 0; n < r.ambiguity_flags.size(); ++n)
    r.ambiguity_flags[n] = flag_c[n] && flag_b[n];
  r.condition_number = condition_number(ac.leftCols(split));
  if (split < n_max) r.condition_number = std::max(r.condition_number, condition_number(ab.rightCols(n_max - split)));
  r.ill_conditioned = r.condition_number > cfg.condition_limit;
  r.deficit = 1.0 - x.sum();
  return r;
}

int monotonic_range(double eta, int scan_limit) {
  if (!(eta > 0.0)) throw DomainError("monotonic_range: eta must be positive");
  double prev = rabi_freq(Channel::carrier, 0, eta, 1.0);
  for (int n = 1; n <= scan_limit; ++n) {
    const double cur = rabi_freq(Channel::carrier, n, eta, 1.0);
    if (cur <= 0.0 || std::abs(cur) >= std::abs(prev)) return n - 1;
    prev = cur;
  }
  return scan_limit;
}

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations) {
  const Eigen::Index n = a.cols();
  if (a.rows() != b.size()) throw ConfigError("nnls: dimension mismatch");
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n) + 30;
  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.cwiseAbs().colwise().sum().maxCoeff() *
                     static_cast<double>(std::max(a.rows(), n));

  auto solve_passive = [&](Eigen::VectorXd& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) ap.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    z.setZero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
  };

  Eigen::VectorXd w = a.transpose() * (b - a * res.x);
  Eigen::VectorXd z(n);
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      if (feasible) {
        res.x = z;
        break;
      }
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0)
          alpha = std::min(alpha, res.x(j) / (res.x(j) - z(j)));
      res.x += alpha * (z - res.x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && res.x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          res.x(j) = 0.0;
        }
    }
    w = a.transpose() * (b - a * res.x);
    // A column whose gradient survives only through rounding would be picked
    // again forever; drop it from consideration for this pass.
    if (!passive[static_cast<std::size_t>(best)]) w(best) = 0.0;
  }
  res.residual_norm = (a * res.x - b).norm();
  return res;
}

}  // namespace qwalk
