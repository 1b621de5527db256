#pragma once

#include <vector>

#include "estop/field.hpp"
#include "estop/kinematics.hpp"

namespace estop {

// Solver discretization knobs. `ds` is the column spacing of the prefix
// arrays (independent of the field's column spacing); the row spacing is
// always taken from the field.
struct SolveOptions {
  double ds = 0.25;  // [m]
  int threads = 1;   // parallel row precompute when > 1; results are identical
};

// Per-row prefix antiderivatives over the reachable arc-length window.
// Transition weights come in two variants because the valve direction (and
// with it the substitution) depends on which side of a_prev a candidate lies.
struct RowAntiderivatives {
  double s0 = 0.0;      // arc length of the first column edge
  int n_cells = 0;      // prefix arrays have n_cells + 1 entries
  double s_line = 0.0;  // v0 * t of this row (upper limit of moving lookups)
  double s_ref = 0.0;   // image of the t_fail = 0 trajectory at this row

  std::vector<double> w_edge;     // field samples at column edges
  std::vector<double> pre_cmov;   // weight W / sqrt(2 v0 t - 2 s)
  std::vector<double> pre_crest;  // weight W
  std::vector<double> pre_bp;     // transition weight, valve opening (kappa > 0)
  std::vector<double> pre_bm;     // transition weight, valve closing (kappa < 0)
  double ref_bp = 0.0;  // pre_bp evaluated at s_ref
  double ref_bm = 0.0;  // pre_bm evaluated at s_ref
  // Arc-length band actually swept by each transition family; lookups
  // interpolate within the supported part of a cell.
  double bp_lo = 0.0, bp_hi = -1.0;
  double bm_lo = 0.0, bm_hi = -1.0;
};

struct RegionAntiderivatives {
  double dt = 0.0;  // row spacing (== field dt_grid)
  double ds = 0.0;  // column spacing of the prefix arrays
  int first_row = 1;
  int n_rows = 0;  // rows [first_row, first_row + n_rows) carry windows
  double v0 = 0.0;
  std::vector<RowAntiderivatives> rows;
};

// One candidate's expected penalties (already normalized by 1/dt_plan).
struct CandidateEvaluation {
  double a_next = 0.0;
  double p_b = 0.0;    // transition share
  double p_c = 0.0;    // post-transition share
  double total = 0.0;  // p_b + p_c
  double t_valve = 0.0;
};

struct PlanResult {
  double a_star = 0.0;
  std::vector<CandidateEvaluation> evaluations;
  bool tie_break_applied = false;
  double precompute_time = 0.0;  // wall seconds
  double evaluate_time = 0.0;    // wall seconds
};

// Arithmetic candidate grid {a_min, a_min+da, ..., a_max}; candidates whose
// worst-case stopping distance v0*dt_plan + v0^2/(2|a|) exceeds s_cap are
// removed. Throws InfeasibleCapError when nothing remains.
std::vector<double> candidate_set(const PlanParams& params);

// Builds the per-row prefix arrays. Cost depends on the window sizes and row
// count only, never on the number of candidates.
RegionAntiderivatives precompute(const PenaltyField& field, const PlanParams& params,
                                 const SolveOptions& opts = {});

// O(rows) lookups per candidate against the precomputed arrays.
CandidateEvaluation evaluate_candidate(const RegionAntiderivatives& pre,
                                       const PlanParams& params, double a_next);

// candidate_set -> precompute -> evaluate all -> argmin with tie-break
// (smallest valve motion first, then stronger braking).
PlanResult plan(const PenaltyField& field, const PlanParams& params,
                const SolveOptions& opts = {});

// Shared argmin/tie-break over finished evaluations; used by both solvers so
// their selection is bit-identical. Returns the index into `evals`.
std::size_t argmin_with_tie_break(const std::vector<CandidateEvaluation>& evals,
                                  double a_prev, bool* tie_break_applied);

// Validates the field/params combination shared by both solvers and returns
// the index of the last usable row (t <= t_hzn and inside the field).
int validate_grid(const PenaltyField& field, const PlanParams& params);

}  // namespace estop
