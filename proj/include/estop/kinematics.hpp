#pragma once

#include <optional>
#include <vector>

namespace estop {

// Per-cycle planner state. Times are normalized so the current cycle starts
// at t = 0 and the next planning step happens at t = dt_plan. Decelerations
// are strictly negative; "stronger" means more negative.
struct PlanParams {
  double v0 = 0.0;         // current speed [m/s], >= 0
  double a_prev = -4.0;    // current valve state [m/s^2], in [a_min, a_max]
  double a_min = -9.0;     // strongest allowed deceleration [m/s^2]
  double a_max = -1.0;     // gentlest allowed deceleration [m/s^2], < 0
  double dt_plan = 0.25;   // replanning interval [s]
  double t_hzn = 10.0;     // prediction horizon [s]
  double kappa_mag = 100.0;  // valve speed magnitude [m/s^3]
  double da = 0.1;         // candidate spacing [m/s^2]
  std::optional<double> s_cap;  // max allowed braking distance [m]

  // Longest possible valve transition, (a_max - a_min) / kappa_mag.
  double t_valve_max() const { return (a_max - a_min) / kappa_mag; }

  // Throws ParamError when any invariant is violated.
  void validate() const;
};

// Linear valve model between two states. kappa is signed,
// sign(kappa) = sign(a_next - a_prev), and t_valve = (a_next - a_prev)/kappa.
struct ValveTransition {
  double a_prev = 0.0;
  double a_next = 0.0;
  double kappa = 0.0;    // signed [m/s^3]; 0 only when a_next == a_prev
  double t_valve = 0.0;  // [s], >= 0

  static ValveTransition make(double a_prev, double a_next, double kappa_mag);

  // Deceleration frozen when failing at t_fail: a_prev + kappa*min(t_fail, t_valve).
  double alpha_at(double t_fail) const;
};

// Time and arc length where a braking trajectory reaches zero speed.
struct StopPoint {
  double t_stop = 0.0;  // [s]
  double s_stop = 0.0;  // [m]
};

// Stop point of the constant-deceleration trajectory failing at t_fail.
// Requires a < 0.
StopPoint stop_point(double v0, double t_fail, double a);

// Single stopping trajectory: constant speed v0 until t_fail, then constant
// deceleration a until rest. Continuous and non-decreasing in t.
double sigma_single(double t, double v0, double t_fail, double a);

// Trajectory for a failure during the valve transition (t_fail <= t_valve):
// brakes with the frozen intermediate deceleration a_prev + kappa*t_fail.
double sigma_b(double t, double t_fail, const PlanParams& params, const ValveTransition& vt);

// Trajectory for a failure after the transition finished: brakes with a_next.
double sigma_c(double t, double t_fail, double v0, double a_next);

// Reachable arc-length band per time row, bounding all stopping trajectories
// between the earliest-strongest and the full-transition gentlest braking.
struct Envelope {
  std::vector<double> s_min;  // one entry per row t = i*dt
  std::vector<double> s_max;
};

// Evaluates both extreme trajectories at rows t = 0, dt, ..., (n_rows-1)*dt.
Envelope envelope(const PlanParams& params, double dt, int n_rows);

}  // namespace estop
