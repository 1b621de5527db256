#pragma once

#include <cmath>
#include <optional>
#include <utility>

namespace estop {

// Coefficients of the quadratic failure-time substitution for transition
// failures. Moving case: s = alpha_m*tau^2 + beta_m*tau + gamma_m (third-order
// term dropped). Rest case: alpha_r*tau^2 + beta_r*tau + gamma_r = 0 with the
// given arc length folded into beta_r and gamma_r.
struct RegimeCoefficients {
  double alpha_m = 0.0, beta_m = 0.0, gamma_m = 0.0;
  double alpha_r = 0.0, beta_r = 0.0, gamma_r = 0.0;

  static RegimeCoefficients at(double t, double s, double v0, double a_prev, double kappa);
};

// Quadratic-in-t_fail approximation of the transition trajectory (moving
// branch). Exact at t_fail = 0; error bounded by |kappa|/2 * t_fail^3.
double sigma_b_approx(double t, double t_fail, double v0, double a_prev, double kappa);

// Failure time whose (approximate) transition trajectory passes through (t,s)
// while still moving. Restricted to the monotone branch that starts at
// t_fail = 0 and ends at the extremum or at tau_max, whichever comes first.
// Throws OutOfRegionError when no such root exists.
double tau_b_moving(double t, double s, double v0, double a_prev, double kappa,
                    double tau_max);

// Failure time of the transition trajectory that has stopped at arc length s
// (independent of t once stopped). Same branch restriction as above.
double tau_b_rest(double s, double v0, double a_prev, double kappa, double tau_max);

// d(tau)/d(s) for the transition regimes. Throws SingularityError at (or
// beyond) a vanishing discriminant.
double dtau_ds_b_moving(double t, double s, double v0, double a_prev, double kappa);
double dtau_ds_b_rest(double s, double v0, double a_prev, double kappa);
double dtau_ds_b(double t, double s, double v0, double a_prev, double kappa, bool stopped);

// Failure time for post-transition trajectories braking with a_next.
// Moving case requires s <= v0*t; rest case requires v0 > 0.
double tau_c_moving(double t, double s, double v0, double a_next);
double tau_c_rest(double s, double v0, double a_next);
double tau_c(double t, double s, double v0, double a_next, bool stopped);

// d(tau)/d(s) for the post-transition regimes; positive.
double dtau_ds_c_moving(double t, double s, double v0, double a_next);
double dtau_ds_c_rest(double v0);
double dtau_ds_c(double t, double s, double v0, double a_next, bool stopped);

namespace detail {

// Numerically stable roots of a*x^2 + b*x + c = 0. Returns nullopt when there
// is no real root; a == 0 degenerates to the linear root twice.
std::optional<std::pair<double, double>> quadratic_roots(double a, double b, double c);

}  // namespace detail

}  // namespace estop
