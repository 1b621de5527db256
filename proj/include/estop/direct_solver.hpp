#pragma once

#include <vector>

#include "estop/fast_solver.hpp"
#include "estop/field.hpp"
#include "estop/kinematics.hpp"

namespace estop {

// Discretized failure times over [0, dt_plan] with trapezoid quadrature
// weights (weights sum to dt_plan). Dense enough that consecutive samples
// displace the trajectory by at most one solver column.
struct FailTimeGrid {
  std::vector<double> samples;
  std::vector<double> weights;
};

// The transition interval gets a mandatory node exactly at t_valve; inside it
// the step also honors the stopping-distance sweep across the transition.
FailTimeGrid build_fail_grid(const PlanParams& params, double a_next, double ds = 0.25);

struct PenaltySplit {
  double pre_fail = 0.0;   // set-A share; identical for every candidate
  double post_fail = 0.0;  // braking share; the quantity the solvers compare
};

// Brute-force expected penalty for one candidate: integrate the field along
// the exact trajectory of every sampled failure time, weight by the fail
// grid, normalize by 1/dt_plan.
PenaltySplit expected_penalty(const PenaltyField& field, const PlanParams& params,
                              double a_next, double ds = 0.25);

// Enumerates all candidates with expected_penalty and minimizes the
// post-failure share under the same tie-break as the fast solver.
PlanResult plan_direct(const PenaltyField& field, const PlanParams& params,
                       const SolveOptions& opts = {});

}  // namespace estop
