#include <cmath>
#include <vector>

#include "qwalk/decoherence.hpp"
#include "qwalk/iontrap.hpp"
#include "qwalk/wigner.hpp"

namespace qwalk {

std::vector<AttributionRow> attribution_harness(const IonParams& p, const AttributionSpec& spec,
                                                const TruncationConfig& cfg) {
  struct Variant {
    const char* label;
    IonParams params;
  };
  std::vector<Variant> variants;
  variants.push_back({"full", p});
  IonParams v = p;
  v.include_Uoff = false;
  variants.push_back({"no_Uoff", v});
  v = p;
  v.include_B = false;
  variants.push_back({"no_B", v});
  v = p;
  v.factors.displacement = false;
  variants.push_back({"no_displacement", v});
  v = p;
  v.factors.squeeze = false;
  variants.push_back({"no_squeeze", v});
  v = p;
  v.factors.cubic = false;
  variants.push_back({"no_cubic", v});
  v = p;
  v.factors.phase = false;
  variants.push_back({"no_phase", v});

  const auto grid = linspace(-spec.grid_half_width, spec.grid_half_width, spec.grid_points);
  GridSpec gs;
  gs.x_lo = gs.p_lo = -spec.grid_half_width;
  gs.x_hi = gs.p_hi = spec.grid_half_width;
  gs.nx = gs.np = spec.grid_points;

  std::vector<AttributionRow> rows;
  for (const Variant& var : variants) {
    const StepOperators ops = ion_step_operators(var.params, cfg);
    const std::vector<double> phases(static_cast<std::size_t>(spec.n_steps), spec.phi);
    const WalkTrace trace = run_walk(ops, phases, cfg);

    AttributionRow row;
    row.label = var.label;
    row.sigma_x = std::sqrt(trace.moments.back().var_x);
    std::vector<double> ns, vp;
    for (int k = 1; k <= spec.n_steps; ++k) {
      ns.push_back(k);
      vp.push_back(trace.moments[static_cast<std::size_t>(k)].var_p);
    }
    row.var_p_slope = linear_slope(ns, vp);
    row.asymmetry = position_asymmetry(grid, walker_position_distribution(trace.final_state, grid));
    const WignerGrid w = wigner_grid(reduce_walker(trace.final_state), gs, false);
    row.sideband_energy = sideband_energy(w, spec.band_lo, spec.band_hi);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qwalk
