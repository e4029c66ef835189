#include "qwalk/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <ostream>

#include "qwalk/decoherence.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/io.hpp"
#include "qwalk/iontrap.hpp"
#include "qwalk/readout.hpp"
#include "qwalk/wigner.hpp"

namespace qwalk::cli {

namespace {

using io::Json;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

struct Globals {
  std::size_t dim = kDefaultDim;
  double edge_guard = kDefaultEdgeGuard;
  std::uint64_t seed = 20090101;
  std::string out_dir = ".";
  unsigned threads = 0;

  TruncationConfig truncation() const {
    TruncationConfig t{dim, edge_guard};
    t.validate();
    return t;
  }
  std::string path(const std::string& name) const {
    return (std::filesystem::path(out_dir) / name).string();
  }
  Json to_json() const { return {{"dim", dim}, {"edge_guard", edge_guard}}; }
};

struct IonOptions {
  double delta_mhz = 4.0;
  double omega_z_mhz = 4.0;
  double omega_up_mhz = 0.3;
  double delta = kUnset;
  double omega_z = kUnset;
  double omega_up = kUnset;
  double eta = 0.1;
  double pulse_t = 1e-6;
  double laser_phase = 0.0;
  bool no_b = false;
  bool no_uoff = false;
  std::string timing = "interval";
  std::vector<std::string> drop;

  IonParams resolve() const {
    IonParams p;
    p.delta = std::isnan(delta) ? kTwoPi * delta_mhz * 1e6 : delta;
    p.omega_z = std::isnan(omega_z) ? kTwoPi * omega_z_mhz * 1e6 : omega_z;
    p.omega_up = std::isnan(omega_up) ? kTwoPi * omega_up_mhz * 1e6 : omega_up;
    p.eta = eta;
    p.pulse_t = pulse_t;
    p.laser_phase = laser_phase;
    p.include_B = !no_b;
    p.include_Uoff = !no_uoff;
    p.timing = parse_timing(timing);
    for (const auto& d : drop) {
      if (d == "displacement") p.factors.displacement = false;
      else if (d == "squeeze") p.factors.squeeze = false;
      else if (d == "cubic") p.factors.cubic = false;
      else if (d == "phase") p.factors.phase = false;
    }
    p.validate();
    return p;
  }
};

Json ion_json(const IonParams& p) {
  return {{"delta_rad_s", p.delta},
          {"omega_z_rad_s", p.omega_z},
          {"omega_up_rad_s", p.omega_up},
          {"eta", p.eta},
          {"pulse_t_s", p.pulse_t},
          {"laser_phase", p.laser_phase},
          {"include_B", p.include_B},
          {"include_Uoff", p.include_Uoff},
          {"timing", timing_name(p.timing)},
          {"uoff_displacement", p.factors.displacement},
          {"uoff_squeeze", p.factors.squeeze},
          {"uoff_cubic", p.factors.cubic},
          {"uoff_phase", p.factors.phase}};
}

void add_ion_options(CLI::App* app, IonOptions& o) {
  app->add_option("--delta-mhz", o.delta_mhz, "Raman detuning delta/2pi in MHz")->capture_default_str();
  app->add_option("--omega-z-mhz", o.omega_z_mhz, "Trap frequency omega_z/2pi in MHz")->capture_default_str();
  app->add_option("--omega-up-mhz", o.omega_up_mhz, "Carrier Rabi frequency Omega_up/2pi in MHz")
      ->capture_default_str();
  app->add_option("--delta", o.delta, "delta in rad/s (overrides --delta-mhz)");
  app->add_option("--omega-z", o.omega_z, "omega_z in rad/s (overrides --omega-z-mhz)");
  app->add_option("--omega-up", o.omega_up, "Omega_up in rad/s (overrides --omega-up-mhz)");
  app->add_option("--eta", o.eta, "Lamb-Dicke parameter")->capture_default_str();
  app->add_option("--pulse-t", o.pulse_t, "Pulse duration in seconds")->capture_default_str();
  app->add_option("--laser-phase", o.laser_phase, "Laser phase in radians")->capture_default_str();
  app->add_flag("--no-B", o.no_b, "Drop the cubic B factor");
  app->add_flag("--no-Uoff", o.no_uoff, "Drop all off-resonant factors");
  app->add_option("--timing", o.timing, "Off-resonant antiderivative: interval or pulse_end")
      ->check(CLI::IsMember({"interval", "pulse_end"}))
      ->capture_default_str();
  app->add_option("--drop-factor", o.drop, "Force one U_off group to the identity (repeatable)")
      ->check(CLI::IsMember({"displacement", "squeeze", "cubic", "phase"}));
}

std::vector<double> moment_row(int n, const MomentSet& m) {
  return {static_cast<double>(n), m.mean_x, m.mean_p, m.var_x, m.var_p, m.cov_xp, m.mean_n,
          m.excess_var_x()};
}
const std::vector<std::string> kMomentHeader = {"N",     "mean_x", "mean_p", "var_x",
                                                "var_p", "cov_xp", "mean_n", "excess_var_x"};

void write_state_tables(const Globals& g, const std::string& prefix, const Json& prov,
                        const CoinWalkerState& s, double x_range, std::size_t x_points) {
  const auto grid = linspace(-x_range, x_range, x_points);
  const auto px = walker_position_distribution(s, grid);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) rows.push_back({grid[i], px[i]});
  io::write_csv(g.path(prefix + "_px.csv"), prov, {"x", "P_x"}, rows);
  rows.clear();
  const auto pn = s.populations();
  for (std::size_t n = 0; n < pn.size(); ++n) rows.push_back({static_cast<double>(n), pn[n]});
  io::write_csv(g.path(prefix + "_pn.csv"), prov, {"n", "P_n"}, rows);
}

// --- ideal -----------------------------------------------------------------

struct IdealOptions {
  double alpha = 0.565;
  double phi = std::numbers::pi / 2.0;
  int steps = 17;
  double x_range = 20.0;
  std::size_t x_points = 801;
};

int cmd_ideal(const Globals& g, const IdealOptions& o, std::ostream& out) {
  if (o.steps < 0) throw ConfigError("--steps must be >= 0");
  const TruncationConfig trunc = g.truncation();
  const Json cfg = {{"alpha", o.alpha}, {"phi", o.phi}, {"steps", o.steps},
                    {"x_range", o.x_range}, {"x_points", o.x_points}, {"truncation", g.to_json()}};
  const Json prov = io::provenance("ideal", g.seed, cfg);
  const StepOperators ops = ideal_step_operators(o.alpha, trunc);
  const std::vector<double> phases(static_cast<std::size_t>(o.steps), o.phi);
  const WalkTrace trace = run_walk(ops, phases, trunc);
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < trace.moments.size(); ++k)
    rows.push_back(moment_row(static_cast<int>(k), trace.moments[k]));
  io::write_csv(g.path("ideal_moments.csv"), prov, kMomentHeader, rows);
  write_state_tables(g, "ideal", prov, trace.final_state, o.x_range, o.x_points);
  const MomentSet& last = trace.moments.back();
  out << "ideal walk: N=" << o.steps << " var_x=" << io::format_double(last.var_x)
      << " mean_n=" << io::format_double(last.mean_n) << '\n';
  return kExitOk;
}

// --- ion -------------------------------------------------------------------

struct IonCmdOptions {
  IonOptions ion;
  double phi = std::numbers::pi / 2.0;
  int steps = 10;
  bool oracle = false;
  double oracle_dt = 0.0;
  bool oracle_check = true;
  double x_range = 20.0;
  std::size_t x_points = 801;
};

int cmd_ion(const Globals& g, const IonCmdOptions& o, std::ostream& out) {
  if (o.steps < 0) throw ConfigError("--steps must be >= 0");
  const TruncationConfig trunc = g.truncation();
  const IonParams p = o.ion.resolve();
  Json cfg = {{"ion", ion_json(p)}, {"phi", o.phi}, {"steps", o.steps}, {"oracle", o.oracle},
              {"x_range", o.x_range}, {"x_points", o.x_points}, {"truncation", g.to_json()}};
  if (o.oracle) cfg["oracle_dt"] = o.oracle_dt, cfg["oracle_check"] = o.oracle_check;
  const Json prov = io::provenance("ion", g.seed, cfg);

  const StepOperators ops = ion_step_operators(p, trunc);
  const StepDiagnostics diag = ld_validity(p, std::max(1, o.steps));
  IntegratorOptions iopt;
  iopt.dt = o.oracle_dt;
  iopt.check_convergence = o.oracle_check;

  CoinWalkerState product = initial_state(trunc);
  CoinWalkerState oracle = product;
  std::vector<std::vector<double>> rows;
  std::vector<double> fidelity;
  rows.push_back(moment_row(0, walker_moments(product, trunc)));
  if (o.oracle) rows.back().push_back(1.0);
  for (int k = 1; k <= o.steps; ++k) {
    product = apply_step(product, coin_matrix(o.phi), ops);
    if (o.oracle) {
      oracle = direct_full_step(p, o.phi, oracle, iopt);
      fidelity.push_back(state_fidelity(product, oracle));
      rows.push_back(moment_row(k, walker_moments(oracle, trunc)));
      rows.back().push_back(fidelity.back());
    } else {
      rows.push_back(moment_row(k, walker_moments(product, trunc)));
    }
  }
  auto header = kMomentHeader;
  if (o.oracle) header.push_back("fidelity_vs_product");
  io::write_csv(g.path("ion_moments.csv"), prov, header, rows);
  const CoinWalkerState& final_state = o.oracle ? oracle : product;
  write_state_tables(g, "ion", prov, final_state, o.x_range, o.x_points);

  Json d = prov;
  d["diagnostics"] = {{"step_amplitude", p.step_amplitude()},
                      {"ld_margin", diag.ld_margin},
                      {"ld_valid", diag.valid()},
                      {"guard_population", guard_population(final_state.populations(), trunc)}};
  if (p.include_Uoff) {
    const cplx z = uoff_squeeze_parameter(p.omega_down(), p);
    d["diagnostics"]["uoff_squeeze_down"] = {z.real(), z.imag()};
  }
  if (o.oracle && !fidelity.empty())
    d["diagnostics"]["min_fidelity_vs_product"] = *std::min_element(fidelity.begin(), fidelity.end());
  io::write_json(g.path("ion_diagnostics.json"), d);

  out << "ion walk: N=" << o.steps << " var_x=" << io::format_double(rows.back()[3])
      << " ld_margin=" << io::format_double(diag.ld_margin) << '\n';
  if (!diag.valid()) out << "warning: Lamb-Dicke margin <= 1 for " << o.steps << " steps\n";
  if (o.oracle)
    for (std::size_t k = 0; k < fidelity.size(); ++k)
      out << "step " << k + 1 << " fidelity " << io::format_double(fidelity[k]) << '\n';
  return kExitOk;
}

// --- sweep -----------------------------------------------------------------

struct SweepOptions {
  std::string kind = "ideal";
  std::vector<std::string> q_values = {"1", "5", "20"};
  int traj = 400;
  int steps = 17;
  double alpha = 0.565;
  int fit_lo = 3;
  int blocks = 20;
  IonOptions ion;
};

double parse_q(const std::string& s) {
  if (s == "inf" || s == "infinity") return kQInfinity;
  try {
    std::size_t used = 0;
    const double q = std::stod(s, &used);
    if (used == s.size()) return q;
  } catch (const std::exception&) {
  }
  throw ConfigError("cannot parse q value '" + s + "'");
}

int cmd_sweep(const Globals& g, const SweepOptions& o, std::ostream& out) {
  const TruncationConfig trunc = g.truncation();
  DecoherenceConfig base;
  base.n_traj = o.traj;
  base.n_steps = o.steps;
  base.master_seed = g.seed;
  base.threads = g.threads;
  base.alpha_step = o.alpha;
  base.jackknife_blocks = o.blocks;
  Json cfg = {{"kind", o.kind}, {"q", o.q_values}, {"traj", o.traj}, {"steps", o.steps},
              {"fit_lo", o.fit_lo}, {"jackknife_blocks", o.blocks}, {"truncation", g.to_json()}};
  if (o.kind == "ideal") {
    base.walk_kind = WalkKind::ideal;
    cfg["alpha"] = o.alpha;
  } else {
    base.walk_kind = WalkKind::ion;
    base.ion = o.ion.resolve();
    cfg["ion"] = ion_json(base.ion);
  }
  const Json prov = io::provenance("sweep", g.seed, cfg);
  const StepOperators ops = base.walk_kind == WalkKind::ideal
                                ? ideal_step_operators(base.alpha_step, trunc)
                                : ion_step_operators(base.ion, trunc);

  std::vector<std::vector<double>> fit_rows;
  for (const auto& qs : o.q_values) {
    DecoherenceConfig c = base;
    c.q = parse_q(qs);
    const EnsembleAccumulator acc = run_ensemble(c, ops, trunc);
    const auto steps = mixture_observables(acc);
    std::vector<std::vector<double>> rows;
    for (const auto& m : steps)
      rows.push_back({static_cast<double>(m.step), m.mean_x, m.mean_p, m.var_x, m.var_p, m.sigma_x(),
                      m.excess_sigma_x(), m.mean_n});
    Json qprov = prov;
    qprov["q"] = qs;
    io::write_csv(g.path("sweep_q" + qs + ".csv"), qprov,
                  {"N", "mean_x", "mean_p", "var_x", "var_p", "sigma_x", "excess_sigma_x", "mean_n"}, rows);
    if (o.steps - o.fit_lo >= 2) {
      const EnsembleExponents e = ensemble_exponents(acc, o.fit_lo, o.steps);
      fit_rows.push_back({c.q, e.xi.slope, e.xi.slope_se, e.xi_jackknife_se, e.xi.r_squared,
                          e.varsigma.slope, e.varsigma.slope_se, e.varsigma_jackknife_se,
                          e.varsigma.r_squared});
      out << "q=" << qs << " xi=" << io::format_double(e.xi.slope) << " +- "
          << io::format_double(e.xi_jackknife_se) << " varsigma=" << io::format_double(e.varsigma.slope)
          << " +- " << io::format_double(e.varsigma_jackknife_se) << '\n';
    }
  }
  io::write_csv(g.path("sweep_fits.csv"), prov,
                {"q", "xi", "xi_se", "xi_jackknife_se", "xi_r2", "varsigma", "varsigma_se",
                 "varsigma_jackknife_se", "varsigma_r2"},
                fit_rows);
  return kExitOk;
}

// --- readout ---------------------------------------------------------------

struct ReadoutOptions {
  std::string mode = "synthesize";
  std::string pn_file;
  std::string channel = "carrier";
  std::string signal_file;
  std::string carrier_file;
  std::string bsb_file;
  std::string truth_file;
  double eta = 0.2;
  double omega0_mhz = 0.3;
  std::size_t samples = 2048;
  double duration_rad = 200.0 * std::numbers::pi;
  double noise = 0.0;
  int n_max = 0;
  int carrier_levels = 25;
  bool strict = false;
};

std::vector<double> read_distribution(const std::string& path) {
  const io::CsvTable t = io::read_csv(path);
  const std::string col = std::find(t.header.begin(), t.header.end(), "P_n") != t.header.end() ? "P_n" : "p_n_hat";
  return t.column_values(col);
}

int cmd_readout(const Globals& g, const ReadoutOptions& o, std::ostream& out) {
  ReadoutConfig rc;
  rc.eta = o.eta;
  rc.omega0 = kTwoPi * o.omega0_mhz * 1e6;
  if (o.samples < 2) throw ConfigError("--samples must be >= 2");
  rc.sample_times = ReadoutConfig::default_times(rc.omega0, o.samples, o.duration_rad);
  rc.noise_sigma = o.noise;
  rc.seed = g.seed;
  rc.carrier_levels = o.carrier_levels;
  rc.n_max = o.n_max > 0 ? o.n_max : (o.mode == "hybrid" ? 60 : 25);
  rc.validate();
  Json cfg = {{"mode", o.mode}, {"eta", rc.eta}, {"omega0_rad_s", rc.omega0}, {"samples", o.samples},
              {"duration_rad", o.duration_rad}, {"noise_sigma", rc.noise_sigma}, {"n_max", rc.n_max},
              {"carrier_levels", rc.carrier_levels}};

  if (o.mode == "synthesize") {
    if (o.pn_file.empty()) throw ConfigError("synthesize needs --pn");
    cfg["pn_file"] = o.pn_file;
    const Json prov = io::provenance("readout", g.seed, cfg);
    const auto pn = read_distribution(o.pn_file);
    std::vector<Channel> channels;
    if (o.channel == "both") channels = {Channel::carrier, Channel::blue_sideband};
    else channels = {parse_channel(o.channel)};
    for (Channel c : channels) {
      const SignalTrace s = synthesize_signal(pn, c, rc);
      const std::string path = g.path("readout_signal_" + channel_name(c) + ".csv");
      io::write_signal_csv(path, s, prov);
      out << "wrote " << path << '\n';
    }
    return kExitOk;
  }

  ReconstructionResult r;
  if (o.mode == "reconstruct") {
    if (o.signal_file.empty()) throw ConfigError("reconstruct needs --signal");
    cfg["signal_file"] = o.signal_file;
    r = reconstruct(io::read_signal_csv(o.signal_file, parse_channel(o.channel == "both" ? "carrier" : o.channel)), rc);
  } else if (o.mode == "hybrid") {
    if (o.carrier_file.empty() || o.bsb_file.empty())
      throw ConfigError("hybrid needs --carrier-signal and --bsb-signal");
    cfg["carrier_signal"] = o.carrier_file;
    cfg["bsb_signal"] = o.bsb_file;
    SignalTrace c = io::read_signal_csv(o.carrier_file, Channel::carrier);
    SignalTrace b = io::read_signal_csv(o.bsb_file, Channel::blue_sideband);
    r = hybrid_reconstruct(c, b, rc);
  } else {
    throw ConfigError("unknown readout mode '" + o.mode + "'");
  }
  const Json prov = io::provenance("readout", g.seed, cfg);
  std::vector<std::vector<double>> rows;
  for (std::size_t n = 0; n < r.p_n_hat.size(); ++n)
    rows.push_back({static_cast<double>(n), r.p_n_hat[n], r.ambiguity_flags[n] ? 1.0 : 0.0});
  io::write_csv(g.path("readout_pn.csv"), prov, {"n", "p_n_hat", "ambiguous"}, rows);

  Json res = prov;
  std::vector<int> flagged;
  for (std::size_t n = 0; n < r.ambiguity_flags.size(); ++n)
    if (r.ambiguity_flags[n]) flagged.push_back(static_cast<int>(n));
  res["result"] = {{"residual_norm", r.residual_norm},
                   {"deficit", r.deficit},
                   {"condition_number", r.condition_number},
                   {"ill_conditioned", r.ill_conditioned},
                   {"ambiguous_levels", flagged}};
  if (!o.truth_file.empty()) {
    const auto truth = read_distribution(o.truth_file);
    double err = 0.0;
    for (std::size_t n = 0; n < r.p_n_hat.size(); ++n)
      err = std::max(err, std::abs(r.p_n_hat[n] - (n < truth.size() ? truth[n] : 0.0)));
    res["result"]["linf_error_vs_truth"] = err;
    out << "L-infinity error vs truth: " << io::format_double(err) << '\n';
  }
  io::write_json(g.path("readout_result.json"), res);
  out << "reconstructed " << r.p_n_hat.size() << " levels, residual "
      << io::format_double(r.residual_norm) << ", " << flagged.size() << " ambiguous\n";
  if (o.strict && (r.any_ambiguous() || r.ill_conditioned))
    throw ResolvabilityError("ambiguous or ill-conditioned reconstruction (see readout_result.json)");
  return kExitOk;
}

// --- wigner ----------------------------------------------------------------

struct WignerOptions {
  std::string source = "ion";
  double alpha = 0.565;
  int fock_n = 1;
  int steps = 10;
  double phi = std::numbers::pi / 2.0;
  double range = 14.0;
  std::size_t points = 281;
  bool no_coverage_check = false;
  IonOptions ion;
};

int cmd_wigner(const Globals& g, const WignerOptions& o, std::ostream& out) {
  const TruncationConfig trunc = g.truncation();
  Json cfg = {{"source", o.source}, {"range", o.range}, {"points", o.points}, {"truncation", g.to_json()}};
  FockState rho = FockState::vacuum(trunc.dim);
  if (o.source == "vacuum") {
  } else if (o.source == "coherent") {
    cfg["alpha"] = o.alpha;
    rho = FockState::pure(displacement(o.alpha, trunc).col(0));
  } else if (o.source == "fock") {
    cfg["fock_n"] = o.fock_n;
    if (o.fock_n < 0) throw ConfigError("--fock-n must be >= 0");
    rho = FockState::number(static_cast<std::size_t>(o.fock_n), trunc.dim);
  } else if (o.source == "ideal" || o.source == "ion") {
    cfg["steps"] = o.steps;
    cfg["phi"] = o.phi;
    StepOperators ops;
    if (o.source == "ideal") {
      cfg["alpha"] = o.alpha;
      ops = ideal_step_operators(o.alpha, trunc);
    } else {
      const IonParams p = o.ion.resolve();
      cfg["ion"] = ion_json(p);
      ops = ion_step_operators(p, trunc);
    }
    const std::vector<double> phases(static_cast<std::size_t>(std::max(0, o.steps)), o.phi);
    rho = reduce_walker(run_walk(ops, phases, trunc).final_state);
  } else {
    throw ConfigError("unknown Wigner source '" + o.source + "'");
  }
  const Json prov = io::provenance("wigner", g.seed, cfg);
  GridSpec gs;
  gs.x_lo = gs.p_lo = -o.range;
  gs.x_hi = gs.p_hi = o.range;
  gs.nx = gs.np = o.points;
  const WignerGrid w = wigner_grid(rho, gs, !o.no_coverage_check, g.threads);

  std::vector<std::vector<double>> rows;
  rows.reserve(w.values.size());
  for (std::size_t i = 0; i < w.x_axis.size(); ++i)
    for (std::size_t j = 0; j < w.p_axis.size(); ++j) rows.push_back({w.x_axis[i], w.p_axis[j], w.at(i, j)});
  io::write_csv(g.path("wigner.csv"), prov, {"x", "p", "W"}, rows);
  const SymmetryMetrics sm = symmetry_metrics(w);
  Json h = prov;
  h["axes"] = {{"x", {gs.x_lo, gs.x_hi, gs.nx}}, {"p", {gs.p_lo, gs.p_hi, gs.np}}};
  h["normalization"] = "integral W dx dp = 1, x=(a+a^dag)/sqrt2, p=(a-a^dag)/(i sqrt2)";
  h["min"] = w.min();
  h["max"] = w.max();
  h["integral"] = w.integral();
  h["asym_x"] = sm.asym_x;
  h["asym_p"] = sm.asym_p;
  io::write_json(g.path("wigner.json"), h);
  out << "wigner: min=" << io::format_double(w.min()) << " max=" << io::format_double(w.max()) << '\n';
  return kExitOk;
}

// --- fit -------------------------------------------------------------------

struct FitOptions {
  std::string input;
  std::string x_col = "N";
  std::string y_col = "var_x";
  double lo = 3.0;
  double hi = std::numeric_limits<double>::infinity();
  double offset = 0.0;
};

int cmd_fit(const Globals& g, const FitOptions& o, std::ostream& out) {
  const io::CsvTable t = io::read_csv(o.input);
  const auto xs = t.column_values(o.x_col);
  const auto ys = t.column_values(o.y_col);
  std::vector<double> fx, fy;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] >= o.lo && xs[i] <= o.hi) {
      fx.push_back(xs[i]);
      fy.push_back(ys[i] - o.offset);
    }
  const PowerLawFit f = power_law_fit(fx, fy);
  const Json cfg = {{"input", o.input}, {"x", o.x_col}, {"y", o.y_col}, {"lo", o.lo},
                    {"hi", std::isinf(o.hi) ? Json("inf") : Json(o.hi)}, {"offset", o.offset}};
  const Json prov = io::provenance("fit", g.seed, cfg);
  io::write_csv(g.path("fit.csv"), prov, {"slope", "intercept", "r_squared", "slope_se", "points"},
                {{f.slope, f.intercept, f.r_squared, f.slope_se, static_cast<double>(fx.size())}});
  out << "slope=" << io::format_double(f.slope) << " intercept=" << io::format_double(f.intercept)
      << " r2=" << io::format_double(f.r_squared) << " se=" << io::format_double(f.slope_se) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coined quantum walk of a trapped ion"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");

  Globals g;
  app.add_option("--dim", g.dim, "Fock-space dimension")->capture_default_str();
  app.add_option("--edge-guard", g.edge_guard, "Largest tolerated guard-band population")->capture_default_str();
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

  IdealOptions ideal;
  auto* c_ideal = app.add_subcommand("ideal", "Ideal Fock-space walk");
  c_ideal->add_option("--alpha", ideal.alpha, "Step amplitude")->capture_default_str();
  c_ideal->add_option("--phi", ideal.phi, "Coin phase")->capture_default_str();
  c_ideal->add_option("--steps", ideal.steps, "Number of steps")->capture_default_str();
  c_ideal->add_option("--x-range", ideal.x_range, "Half width of the P(x) grid")->capture_default_str();
  c_ideal->add_option("--x-points", ideal.x_points, "Points on the P(x) grid")->capture_default_str();

  IonCmdOptions ion;
  auto* c_ion = app.add_subcommand("ion", "Trapped-ion walk");
  add_ion_options(c_ion, ion.ion);
  c_ion->add_option("--phi", ion.phi, "Coin phase")->capture_default_str();
  c_ion->add_option("--steps", ion.steps, "Number of steps")->capture_default_str();
  c_ion->add_flag("--oracle", ion.oracle, "Evolve with the direct Hamiltonian integrator");
  c_ion->add_option("--oracle-dt", ion.oracle_dt, "Integrator substep in seconds (0 = default)");
  c_ion->add_flag("!--oracle-no-check", ion.oracle_check, "Skip the dt-halving check");
  c_ion->add_option("--x-range", ion.x_range, "Half width of the P(x) grid")->capture_default_str();
  c_ion->add_option("--x-points", ion.x_points, "Points on the P(x) grid")->capture_default_str();

  SweepOptions sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Decoherence ensembles over q");
  c_sweep->add_option("--kind", sweep.kind, "ideal or ion")
      ->check(CLI::IsMember({"ideal", "ion"}))
      ->capture_default_str();
  c_sweep->add_option("--q", sweep.q_values, "q values (inf allowed)")->capture_default_str();
  c_sweep->add_option("--traj", sweep.traj, "Trajectories per q")->capture_default_str();
  c_sweep->add_option("--steps", sweep.steps, "Steps per trajectory")->capture_default_str();
  c_sweep->add_option("--alpha", sweep.alpha, "Ideal-walk step amplitude")->capture_default_str();
  c_sweep->add_option("--fit-lo", sweep.fit_lo, "First N in the power-law fits")->capture_default_str();
  c_sweep->add_option("--blocks", sweep.blocks, "Jackknife blocks")->capture_default_str();
  add_ion_options(c_sweep, sweep.ion);

  ReadoutOptions ro;
  auto* c_ro = app.add_subcommand("readout", "Phonon-number readout");
  c_ro->add_option("--mode", ro.mode, "synthesize, reconstruct or hybrid")
      ->check(CLI::IsMember({"synthesize", "reconstruct", "hybrid"}))
      ->capture_default_str();
  c_ro->add_option("--pn", ro.pn_file, "P_n CSV (columns n, P_n) to synthesize from");
  c_ro->add_option("--channel", ro.channel, "carrier, blue_sideband or both")
      ->check(CLI::IsMember({"carrier", "blue_sideband", "both"}))
      ->capture_default_str();
  c_ro->add_option("--signal", ro.signal_file, "Signal CSV to reconstruct");
  c_ro->add_option("--carrier-signal", ro.carrier_file, "Carrier signal CSV (hybrid)");
  c_ro->add_option("--bsb-signal", ro.bsb_file, "Blue-sideband signal CSV (hybrid)");
  c_ro->add_option("--truth", ro.truth_file, "Reference P_n CSV for an error report");
  c_ro->add_option("--eta", ro.eta, "Lamb-Dicke parameter")->capture_default_str();
  c_ro->add_option("--omega0-mhz", ro.omega0_mhz, "Base Rabi frequency / 2pi in MHz")->capture_default_str();
  c_ro->add_option("--samples", ro.samples, "Samples per trace")->capture_default_str();
  c_ro->add_option("--duration-rad", ro.duration_rad, "Trace length in units of 1/omega0")->capture_default_str();
  c_ro->add_option("--noise", ro.noise, "Gaussian noise per sample")->capture_default_str();
  c_ro->add_option("--n-max", ro.n_max, "Levels to solve (0 = 25, or 60 in hybrid mode)");
  c_ro->add_option("--carrier-levels", ro.carrier_levels, "Levels taken from the carrier in hybrid mode")
      ->capture_default_str();
  c_ro->add_flag("--strict", ro.strict, "Fail on ambiguity or ill-conditioning");

  WignerOptions wo;
  auto* c_w = app.add_subcommand("wigner", "Wigner function on a grid");
  c_w->add_option("--source", wo.source, "vacuum, coherent, fock, ideal or ion")
      ->check(CLI::IsMember({"vacuum", "coherent", "fock", "ideal", "ion"}))
      ->capture_default_str();
  c_w->add_option("--alpha", wo.alpha, "Coherent amplitude or ideal step")->capture_default_str();
  c_w->add_option("--fock-n", wo.fock_n, "Fock level")->capture_default_str();
  c_w->add_option("--steps", wo.steps, "Walk steps")->capture_default_str();
  c_w->add_option("--phi", wo.phi, "Coin phase")->capture_default_str();
  c_w->add_option("--range", wo.range, "Half width of both axes")->capture_default_str();
  c_w->add_option("--points", wo.points, "Points per axis")->capture_default_str();
  c_w->add_flag("--no-coverage-check", wo.no_coverage_check, "Allow |W| > 1e-6 on the boundary");
  add_ion_options(c_w, wo.ion);

  FitOptions fo;
  auto* c_fit = app.add_subcommand("fit", "Power-law fit of a CSV column");
  c_fit->add_option("--input", fo.input, "Input CSV")->required();
  c_fit->add_option("--x", fo.x_col, "Column with N")->capture_default_str();
  c_fit->add_option("--y", fo.y_col, "Column to fit")->capture_default_str();
  c_fit->add_option("--lo", fo.lo, "Smallest N included")->capture_default_str();
  c_fit->add_option("--hi", fo.hi, "Largest N included");
  c_fit->add_option("--offset", fo.offset, "Constant subtracted from y before the fit")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (!g.out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(g.out_dir, ec);
      if (ec) throw IoError("cannot create output directory '" + g.out_dir + "': " + ec.message());
    }
    if (*c_ideal) return cmd_ideal(g, ideal, out);
    if (*c_ion) return cmd_ion(g, ion, out);
    if (*c_sweep) return cmd_sweep(g, sweep, out);
    if (*c_ro) return cmd_readout(g, ro, out);
    if (*c_w) return cmd_wigner(g, wo, out);
    if (*c_fit) return cmd_fit(g, fo, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitConfig;
}

}  // namespace qwalk::cli
