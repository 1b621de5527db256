#include "estop/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "estop/errors.hpp"

namespace estop {

void PlanParams::validate() const {
  if (!(v0 >= 0.0) || !std::isfinite(v0)) throw ParamError("v0 must be finite and >= 0");
  if (!(a_max < 0.0)) throw ParamError("a_max must be negative");
  if (!(a_min <= a_prev && a_prev <= a_max))
    throw ParamError("need a_min <= a_prev <= a_max < 0");
  if (!(dt_plan > 0.0) || !(dt_plan < t_hzn))
    throw ParamError("need 0 < dt_plan < t_hzn");
  if (!(kappa_mag > 0.0)) throw ParamError("kappa_mag must be > 0");
  if (!(da > 0.0)) throw ParamError("da must be > 0");
  if (s_cap && !(*s_cap > 0.0)) throw ParamError("s_cap must be > 0 when set");
}

ValveTransition ValveTransition::make(double a_prev, double a_next, double kappa_mag) {
  if (!(kappa_mag > 0.0)) throw ParamError("kappa_mag must be > 0");
  ValveTransition vt;
  vt.a_prev = a_prev;
  vt.a_next = a_next;
  const double delta = a_next - a_prev;
  vt.kappa = delta == 0.0 ? 0.0 : std::copysign(kappa_mag, delta);
  vt.t_valve = std::abs(delta) / kappa_mag;
  return vt;
}

double ValveTransition::alpha_at(double t_fail) const {
  return a_prev + kappa * std::min(std::max(t_fail, 0.0), t_valve);
}

StopPoint stop_point(double v0, double t_fail, double a) {
  if (!(a < 0.0)) throw ParamError("deceleration must be negative");
  StopPoint sp;
  sp.t_stop = t_fail - v0 / a;
  sp.s_stop = v0 * t_fail - v0 * v0 / (2.0 * a);
  return sp;
}

double sigma_single(double t, double v0, double t_fail, double a) {
  if (!(a < 0.0)) throw ParamError("deceleration must be negative");
  if (t <= t_fail) return v0 * t;
  const StopPoint sp = stop_point(v0, t_fail, a);
  if (t >= sp.t_stop) return sp.s_stop;
  const double dt = t - t_fail;
  return v0 * t + 0.5 * a * dt * dt;
}

double sigma_b(double t, double t_fail, const PlanParams& params, const ValveTransition& vt) {
  if (t_fail < 0.0 || t_fail > vt.t_valve + 1e-12)
    throw ParamError("t_fail outside the valve transition interval");
  const double a = vt.alpha_at(t_fail);
  return sigma_single(t, params.v0, t_fail, a);
}

double sigma_c(double t, double t_fail, double v0, double a_next) {
  if (!(a_next < 0.0)) throw ParamError("a_next must be negative");
  return sigma_single(t, v0, t_fail, a_next);
}

Envelope envelope(const PlanParams& params, double dt, int n_rows) {
  if (!(dt > 0.0) || n_rows < 1) throw ParamError("envelope needs dt > 0 and n_rows >= 1");
  params.validate();
  Envelope env;
  env.s_min.resize(n_rows);
  env.s_max.resize(n_rows);
  const double tf_strong = std::abs(params.a_min - params.a_prev) / params.kappa_mag;
  const double tf_gentle = std::abs(params.a_max - params.a_prev) / params.kappa_mag;
  for (int i = 0; i < n_rows; ++i) {
    const double t = i * dt;
    const double lo = sigma_single(t, params.v0, tf_strong, params.a_min);
    const double hi = sigma_single(t, params.v0, tf_gentle, params.a_max);
    env.s_min[i] = std::min(lo, hi);
    env.s_max[i] = std::max(lo, hi);
  }
  return env;
}

}  // namespace estop
