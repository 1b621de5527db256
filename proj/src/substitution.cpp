#include "estop/substitution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "estop/errors.hpp"

namespace estop {

namespace detail {

std::optional<std::pair<double, double>> quadratic_roots(double a, double b, double c) {
  if (a == 0.0) {
    if (b == 0.0) return std::nullopt;
    const double r = -c / b;
    return std::make_pair(r, r);
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b == 0.0 ? 1.0 : b));
  double r1 = q / a;
  double r2 = (q == 0.0) ? -b / (2.0 * a) : c / q;
  if (r1 > r2) std::swap(r1, r2);
  return std::make_pair(r1, r2);
}

}  // namespace detail

RegimeCoefficients RegimeCoefficients::at(double t, double s, double v0, double a_prev,
                                          double kappa) {
  RegimeCoefficients rc;
  rc.alpha_m = 0.5 * a_prev - kappa * t;
  rc.beta_m = 0.5 * kappa * t * t - a_prev * t;
  rc.gamma_m = v0 * t + 0.5 * a_prev * t * t;
  rc.alpha_r = 2.0 * v0 * kappa;
  rc.beta_r = 2.0 * v0 * a_prev - 2.0 * kappa * s;
  rc.gamma_r = -v0 * v0 - 2.0 * a_prev * s;
  return rc;
}

double sigma_b_approx(double t, double t_fail, double v0, double a_prev, double kappa) {
  const auto rc = RegimeCoefficients::at(t, 0.0, v0, a_prev, kappa);
  return (rc.alpha_m * t_fail + rc.beta_m) * t_fail + rc.gamma_m;
}

namespace {

constexpr double kTauTol = 1e-9;

// Picks the root lying on the monotone branch [0, tau_max] before the
// extremum tau_ext (ignored when outside that interval).
double select_branch_root(std::optional<std::pair<double, double>> roots, double tau_max,
                          double tau_ext, const char* what) {
  if (!roots) throw OutOfRegionError(what);
  double hi = tau_max;
  if (tau_ext > kTauTol && tau_ext < tau_max) hi = tau_ext;
  const auto in_range = [&](double r) { return r >= -kTauTol && r <= hi + kTauTol; };
  if (in_range(roots->first)) return std::clamp(roots->first, 0.0, hi);
  if (in_range(roots->second)) return std::clamp(roots->second, 0.0, hi);
  throw OutOfRegionError(what);
}

}  // namespace

double tau_b_moving(double t, double s, double v0, double a_prev, double kappa,
                    double tau_max) {
  const auto rc = RegimeCoefficients::at(t, s, v0, a_prev, kappa);
  const double tau_ext =
      rc.alpha_m != 0.0 ? -rc.beta_m / (2.0 * rc.alpha_m) : std::numeric_limits<double>::infinity();
  const auto roots = detail::quadratic_roots(rc.alpha_m, rc.beta_m, rc.gamma_m - s);
  return select_branch_root(roots, tau_max, tau_ext, "no transition failure time reaches (t,s)");
}

double tau_b_rest(double s, double v0, double a_prev, double kappa, double tau_max) {
  const auto rc = RegimeCoefficients::at(0.0, s, v0, a_prev, kappa);
  double tau_ext = std::numeric_limits<double>::infinity();
  if (kappa < 0.0 && v0 > 0.0) {
    // Extremum of the stopped-distance sweep, at frozen deceleration
    // -sqrt(v0*|kappa|/2).
    tau_ext = (-std::sqrt(0.5 * v0 * -kappa) - a_prev) / kappa;
  }
  const auto roots = detail::quadratic_roots(rc.alpha_r, rc.beta_r, rc.gamma_r);
  return select_branch_root(roots, tau_max, tau_ext, "no stopped transition trajectory at s");
}

double dtau_ds_b_moving(double t, double s, double v0, double a_prev, double kappa) {
  const auto rc = RegimeCoefficients::at(t, s, v0, a_prev, kappa);
  const double disc = rc.beta_m * rc.beta_m - 4.0 * rc.alpha_m * rc.gamma_m + 4.0 * rc.alpha_m * s;
  if (!(disc > 0.0)) throw SingularityError("vanishing discriminant in moving transition density");
  // Branch sign: the monotone branch through t_fail = 0 keeps the sign of
  // beta_m (which equals sign(kappa) once t > 2*a_prev/kappa).
  const double sign = rc.beta_m >= 0.0 ? 1.0 : -1.0;
  return sign / std::sqrt(disc);
}

double dtau_ds_b_rest(double s, double v0, double a_prev, double kappa) {
  if (!(v0 > 0.0)) throw ParamError("rest density needs v0 > 0");
  const auto rc = RegimeCoefficients::at(0.0, s, v0, a_prev, kappa);
  const double disc = rc.beta_r * rc.beta_r - 4.0 * rc.alpha_r * rc.gamma_r;
  if (!(disc > 0.0)) throw SingularityError("vanishing discriminant in rest transition density");
  const double sign_kappa = kappa >= 0.0 ? 1.0 : -1.0;
  return 1.0 / (2.0 * v0) -
         sign_kappa * (rc.beta_r + 4.0 * kappa * s) / (2.0 * v0 * std::sqrt(disc));
}

double dtau_ds_b(double t, double s, double v0, double a_prev, double kappa, bool stopped) {
  return stopped ? dtau_ds_b_rest(s, v0, a_prev, kappa)
                 : dtau_ds_b_moving(t, s, v0, a_prev, kappa);
}

double tau_c_moving(double t, double s, double v0, double a_next) {
  if (!(a_next < 0.0)) throw ParamError("a_next must be negative");
  const double gap = v0 * t - s;
  if (gap < -kTauTol) throw OutOfRegionError("arc length ahead of the pre-failure trajectory");
  return t - std::sqrt(2.0 * std::max(gap, 0.0) / -a_next);
}

double tau_c_rest(double s, double v0, double a_next) {
  if (!(a_next < 0.0)) throw ParamError("a_next must be negative");
  if (!(v0 > 0.0)) throw ParamError("rest substitution needs v0 > 0");
  return s / v0 + v0 / (2.0 * a_next);
}

double tau_c(double t, double s, double v0, double a_next, bool stopped) {
  return stopped ? tau_c_rest(s, v0, a_next) : tau_c_moving(t, s, v0, a_next);
}

double dtau_ds_c_moving(double t, double s, double v0, double a_next) {
  if (!(a_next < 0.0)) throw ParamError("a_next must be negative");
  const double gap = 2.0 * v0 * t - 2.0 * s;
  if (!(gap > 0.0)) throw SingularityError("density singular at the pre-failure trajectory");
  return 1.0 / (std::sqrt(-a_next) * std::sqrt(gap));
}

double dtau_ds_c_rest(double v0) {
  if (!(v0 > 0.0)) throw ParamError("rest density needs v0 > 0");
  return 1.0 / v0;
}

double dtau_ds_c(double t, double s, double v0, double a_next, bool stopped) {
  return stopped ? dtau_ds_c_rest(v0) : dtau_ds_c_moving(t, s, v0, a_next);
}

}  // namespace estop
