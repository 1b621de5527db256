#include "estop/direct_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "estop/errors.hpp"

namespace estop {

namespace {

// Appends a uniform trapezoid segment [lo, hi] with n intervals; the shared
// node at `lo` accumulates weight when the previous segment ended there.
void append_segment(FailTimeGrid& g, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  if (g.samples.empty() || g.samples.back() < lo) {
    g.samples.push_back(lo);
    g.weights.push_back(0.0);
  }
  g.weights.back() += 0.5 * h;
  for (int i = 1; i <= n; ++i) {
    g.samples.push_back(lo + i * h);
    g.weights.push_back(i == n ? 0.5 * h : h);
  }
}

}  // namespace

FailTimeGrid build_fail_grid(const PlanParams& params, double a_next, double ds) {
  params.validate();
  if (!(ds > 0.0)) throw ParamError("ds must be > 0");
  FailTimeGrid g;
  const double v0 = params.v0;
  if (v0 == 0.0) {
    g.samples = {0.0, params.dt_plan};
    g.weights = {0.5 * params.dt_plan, 0.5 * params.dt_plan};
    return g;
  }

  const auto vt = ValveTransition::make(params.a_prev, a_next, params.kappa_mag);
  const double drive_step = ds / v0;
  if (vt.t_valve > 0.0) {
    const double span =
        std::abs(v0 * v0 / (2.0 * params.a_prev) - v0 * v0 / (2.0 * a_next));
    double step = drive_step;
    if (span > 0.0) step = std::min(step, vt.t_valve * ds / span);
    const int n = std::max(1, static_cast<int>(std::ceil(vt.t_valve / step)));
    append_segment(g, 0.0, vt.t_valve, n);
  }
  const double tail = params.dt_plan - vt.t_valve;
  if (tail > 0.0) {
    const int n = std::max(1, static_cast<int>(std::ceil(tail / drive_step)));
    append_segment(g, vt.t_valve, params.dt_plan, n);
  }
  return g;
}

PenaltySplit expected_penalty(const PenaltyField& field, const PlanParams& params,
                              double a_next, double ds) {
  const int last_row = validate_grid(field, params);
  PenaltySplit out;
  const double dt = field.dt_grid;
  const double v0 = params.v0;

  // Set-A share: the pre-failure trajectory is common to all candidates, so
  // integrate it once with the failure-time measure (dt_plan - t) folded in.
  for (int m = 0; m <= last_row; ++m) {
    const double t = m * dt;
    if (t >= params.dt_plan) break;
    out.pre_fail += dt * (params.dt_plan - t) * field.sample(m, v0 * t);
  }
  out.pre_fail /= params.dt_plan;

  if (v0 == 0.0) return out;

  const auto vt = ValveTransition::make(params.a_prev, a_next, params.kappa_mag);
  const auto grid = build_fail_grid(params, a_next, ds);

  double post = 0.0;
  for (size_t k = 0; k < grid.samples.size(); ++k) {
    const double tf = grid.samples[k];
    const double a = vt.alpha_at(tf);
    const StopPoint sp = stop_point(v0, tf, a);
    double traj_sum = 0.0;
    const int m_start = static_cast<int>(std::floor(tf / dt)) + 1;
    for (int m = m_start; m <= last_row; ++m) {
      const double t = m * dt;
      double s;
      if (t >= sp.t_stop) {
        s = sp.s_stop;
      } else {
        const double dtf = t - tf;
        s = v0 * t + 0.5 * a * dtf * dtf;
      }
      traj_sum += field.sample(m, s);
    }
    post += grid.weights[k] * traj_sum * dt;
  }
  out.post_fail = post / params.dt_plan;
  return out;
}

PlanResult plan_direct(const PenaltyField& field, const PlanParams& params,
                       const SolveOptions& opts) {
  using clock = std::chrono::steady_clock;
  validate_grid(field, params);
  const auto candidates = candidate_set(params);

  PlanResult result;
  result.evaluations.reserve(candidates.size());

  if (params.v0 == 0.0) {
    for (double a : candidates) {
      CandidateEvaluation ev;
      ev.a_next = a;
      ev.t_valve = std::abs(a - params.a_prev) / params.kappa_mag;
      result.evaluations.push_back(ev);
    }
    const auto idx = argmin_with_tie_break(result.evaluations, params.a_prev,
                                           &result.tie_break_applied);
    result.a_star = result.evaluations[idx].a_next;
    return result;
  }

  const auto t0 = clock::now();
  for (double a : candidates) {
    const auto split = expected_penalty(field, params, a, opts.ds);
    CandidateEvaluation ev;
    ev.a_next = a;
    ev.t_valve = std::abs(a - params.a_prev) / params.kappa_mag;
    ev.p_c = split.post_fail;  // undivided by regime; total is what matters
    ev.total = split.post_fail;
    result.evaluations.push_back(ev);
  }
  const auto idx =
      argmin_with_tie_break(result.evaluations, params.a_prev, &result.tie_break_applied);
  const auto t1 = clock::now();

  result.a_star = result.evaluations[idx].a_next;
  result.evaluate_time = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

}  // namespace estop
