#include "estop/fast_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "estop/errors.hpp"
#include "estop/substitution.hpp"

namespace estop {

int validate_grid(const PenaltyField& field, const PlanParams& params) {
  field.validate();
  params.validate();
  if (field.t0 != 0.0)
    throw ConfigError("field t0 must be 0 (times are normalized per cycle)");
  const double dt = field.dt_grid;
  const double tv_max = params.t_valve_max();
  if (!(dt > tv_max))
    throw ConfigError("row spacing must exceed the longest valve transition (a_max - a_min)/kappa");
  if (!(params.dt_plan > tv_max))
    throw ConfigError("dt_plan must exceed the longest valve transition");
  const int last_by_hzn = static_cast<int>(std::floor(params.t_hzn / dt + 1e-9));
  const int last_row = std::min(field.n_t - 1, last_by_hzn);
  if (last_row < 1) throw ConfigError("field does not cover a single planning row");
  return last_row;
}

std::vector<double> candidate_set(const PlanParams& params) {
  params.validate();
  std::vector<double> all;
  const int n = static_cast<int>(std::round((params.a_max - params.a_min) / params.da)) + 1;
  for (int i = 0; i < n; ++i) all.push_back(std::min(params.a_min + i * params.da, params.a_max));
  if (all.empty() || all.back() < params.a_max - 1e-9) all.push_back(params.a_max);

  if (!params.s_cap) return all;
  std::vector<double> kept;
  for (double a : all) {
    const double worst = params.v0 * params.dt_plan + params.v0 * params.v0 / (2.0 * -a);
    if (worst <= *params.s_cap) kept.push_back(a);
  }
  if (kept.empty())
    throw InfeasibleCapError("no candidate deceleration satisfies the braking-distance cap");
  return kept;
}

namespace {

constexpr double kTiny = 1e-12;

// Trajectory used by the prefix arrays for transition failures: quadratic
// approximation while moving, exact expression once stopped. Matches the
// weights accumulated below so that lookups and masses are consistent.
double sigma_b_fast(double t, double tau, double v0, double a_prev, double kappa) {
  const double a_b = a_prev + kappa * tau;
  const double t_stop = tau - v0 / a_b;
  if (t >= t_stop) return v0 * tau - v0 * v0 / (2.0 * a_b);
  return sigma_b_approx(t, tau, v0, a_prev, kappa);
}

// ---- closed-form cell integrals (W linear within the cell) ----

// Integral of (w0 + m*(s - sa)) / sqrt(2*(S - s)) over [a, b], b <= S.
double cmov_integral(double S, double sa, double w0, double m, double a, double b) {
  constexpr double kSqrt2 = 1.4142135623730951;
  const double ua = std::max(S - a, 0.0), ub = std::max(S - b, 0.0);
  const double qa = std::sqrt(ua), qb = std::sqrt(ub);
  const double i1 = kSqrt2 * (qa - qb);
  const double i2 = (kSqrt2 / 3.0) * (ua * qa - ub * qb);
  return (w0 + m * (S - sa)) * i1 - m * i2;
}

// ---- transition-weight accumulation via the failure-time parameterization ----

struct BPiece {
  double tau_a = 0.0;
  double tau_b = 0.0;
  bool rest = false;
};

struct BFamily {
  double v0, a_prev, kappa;  // kappa signed
  double alpha_m(double t) const { return 0.5 * a_prev - kappa * t; }
  double beta_m(double t) const { return 0.5 * kappa * t * t - a_prev * t; }
  double gamma_m(double t) const { return v0 * t + 0.5 * a_prev * t * t; }

  double s_at(double t, double tau, bool rest) const {
    if (rest) return v0 * tau - v0 * v0 / (2.0 * (a_prev + kappa * tau));
    return (alpha_m(t) * tau + beta_m(t)) * tau + gamma_m(t);
  }

  // Antiderivative of s(tau) d(tau) within one regime.
  double s_antiderivative(double t, double tau, bool rest) const {
    if (rest) {
      const double a_b = a_prev + kappa * tau;
      return 0.5 * v0 * tau * tau - (v0 * v0 / (2.0 * kappa)) * std::log(-a_b);
    }
    return ((alpha_m(t) / 3.0 * tau + 0.5 * beta_m(t)) * tau + gamma_m(t)) * tau;
  }

  double t_stop(double tau) const { return tau - v0 / (a_prev + kappa * tau); }

  // Inverse of s(tau) within a monotone piece.
  double invert(double t, double x, const BPiece& p) const {
    std::optional<std::pair<double, double>> roots;
    if (p.rest) {
      roots = detail::quadratic_roots(2.0 * v0 * kappa, 2.0 * v0 * a_prev - 2.0 * kappa * x,
                                      -v0 * v0 - 2.0 * a_prev * x);
    } else {
      roots = detail::quadratic_roots(alpha_m(t), beta_m(t), gamma_m(t) - x);
    }
    const double tol = 1e-9 + 1e-9 * std::max(std::abs(p.tau_a), std::abs(p.tau_b));
    if (roots) {
      if (roots->first >= p.tau_a - tol && roots->first <= p.tau_b + tol)
        return std::clamp(roots->first, p.tau_a, p.tau_b);
      if (roots->second >= p.tau_a - tol && roots->second <= p.tau_b + tol)
        return std::clamp(roots->second, p.tau_a, p.tau_b);
    }
    // Fallback: bisection on the monotone piece.
    double lo = p.tau_a, hi = p.tau_b;
    const bool increasing = s_at(t, hi, p.rest) >= s_at(t, lo, p.rest);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const bool below = s_at(t, mid, p.rest) < x;
      if (below == increasing)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }
};

// Splits [0, tau_max] into monotone moving/rest pieces at row time t.
std::vector<BPiece> build_b_pieces(const BFamily& f, double t, double tau_max) {
  std::vector<double> cuts = {0.0, tau_max};
  // Stop boundary: t_stop(tau) == t.
  if (auto r = detail::quadratic_roots(f.kappa, f.a_prev - f.kappa * t,
                                       -(f.a_prev * t + f.v0))) {
    for (double tau : {r->first, r->second})
      if (tau > kTiny && tau < tau_max - kTiny) cuts.push_back(tau);
  }
  std::sort(cuts.begin(), cuts.end());

  std::vector<BPiece> segs;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] < 1e-15) continue;
    BPiece p{cuts[i], cuts[i + 1], false};
    p.rest = f.t_stop(0.5 * (p.tau_a + p.tau_b)) <= t;
    segs.push_back(p);
  }

  // Split each regime segment at its interior extremum, if any.
  std::vector<BPiece> pieces;
  for (const BPiece& p : segs) {
    double ext = std::numeric_limits<double>::quiet_NaN();
    if (p.rest) {
      if (f.kappa < 0.0 && f.v0 > 0.0)
        ext = (-std::sqrt(0.5 * f.v0 * -f.kappa) - f.a_prev) / f.kappa;
    } else if (f.alpha_m(t) != 0.0) {
      ext = -f.beta_m(t) / (2.0 * f.alpha_m(t));
    }
    if (std::isfinite(ext) && ext > p.tau_a + 1e-15 && ext < p.tau_b - 1e-15) {
      pieces.push_back({p.tau_a, ext, p.rest});
      pieces.push_back({ext, p.tau_b, p.rest});
    } else {
      pieces.push_back(p);
    }
  }
  return pieces;
}

struct RowBuildContext {
  double s0 = 0.0;
  double ds = 0.0;
  int n_cells = 0;
  const std::vector<double>* w_edge = nullptr;

  int cell_of(double s) const {
    const int c = static_cast<int>(std::floor((s - s0) / ds));
    return std::clamp(c, 0, n_cells - 1);
  }
  double edge(int c) const { return s0 + c * ds; }
  double w_at(double s) const {
    const int c = cell_of(s);
    const double frac = std::clamp((s - edge(c)) / ds, 0.0, 1.0);
    return (*w_edge)[c] * (1.0 - frac) + (*w_edge)[c + 1] * frac;
  }
};

// Adds the integral of W(s(tau)) d(tau) over [t1, t2] (inside cell c) using
// the cell-linear field model.
void add_tau_integral(const RowBuildContext& ctx, const BFamily& f, double t,
                      const BPiece& p, double t1, double t2, int c,
                      std::vector<double>& cell_mass) {
  if (t2 <= t1) return;
  const double sc = ctx.edge(c);
  const double w0 = (*ctx.w_edge)[c];
  const double m = ((*ctx.w_edge)[c + 1] - w0) / ctx.ds;
  const double base = (w0 - m * sc) * (t2 - t1);
  const double svar = m * (f.s_antiderivative(t, t2, p.rest) - f.s_antiderivative(t, t1, p.rest));
  cell_mass[c] += base + svar;
}

// Walks one monotone piece across the cell grid, accumulating exact
// per-cell masses in failure-time measure.
void walk_piece(const RowBuildContext& ctx, const BFamily& f, double t, const BPiece& p,
                double tau_from, std::vector<double>& cell_mass) {
  const double sa = f.s_at(t, tau_from, p.rest);
  const double sb = f.s_at(t, p.tau_b, p.rest);
  if (std::abs(sb - sa) < kTiny) {
    cell_mass[ctx.cell_of(sa)] += ctx.w_at(sa) * (p.tau_b - tau_from);
    return;
  }
  const int dir = sb > sa ? 1 : -1;
  int c = ctx.cell_of(sa);
  double tau = tau_from;
  while (true) {
    const double next_edge = dir > 0 ? ctx.edge(c + 1) : ctx.edge(c);
    const bool last = dir > 0 ? (next_edge >= sb || c == ctx.n_cells - 1)
                              : (next_edge <= sb || c == 0);
    if (last) {
      add_tau_integral(ctx, f, t, p, tau, p.tau_b, c, cell_mass);
      return;
    }
    const double tau_e = f.invert(t, next_edge, {tau, p.tau_b, p.rest});
    add_tau_integral(ctx, f, t, p, tau, tau_e, c, cell_mass);
    tau = tau_e;
    c += dir;
  }
}

// Accumulates one transition family (fixed valve direction) into cell
// masses. Re-swept arc lengths keep the weight of the earliest piece.
// Returns the swept band in [out_lo, out_hi].
void accumulate_b_family(const RowBuildContext& ctx, const BFamily& f, double t,
                         double tau_max, std::vector<double>& cell_mass, double& out_lo,
                         double& out_hi) {
  if (tau_max <= kTiny) return;
  const auto pieces = build_b_pieces(f, t, tau_max);
  double claimed_lo = std::numeric_limits<double>::infinity();
  double claimed_hi = -std::numeric_limits<double>::infinity();
  for (const BPiece& p : pieces) {
    const double sa = f.s_at(t, p.tau_a, p.rest);
    const double sb = f.s_at(t, p.tau_b, p.rest);
    const double pmin = std::min(sa, sb), pmax = std::max(sa, sb);
    double tau_from = p.tau_a;
    bool walk = true;
    if (claimed_lo <= claimed_hi) {  // not the first piece
      if (pmin >= claimed_hi || pmax <= claimed_lo) {
        // entirely outside the claimed band; walk whole piece
      } else if (sb > claimed_hi) {
        tau_from = f.invert(t, claimed_hi, p);
      } else if (sb < claimed_lo) {
        tau_from = f.invert(t, claimed_lo, p);
      } else {
        walk = false;  // re-sweep of already-claimed arc lengths
      }
    }
    if (walk) walk_piece(ctx, f, t, p, tau_from, cell_mass);
    claimed_lo = std::min(claimed_lo, pmin);
    claimed_hi = std::max(claimed_hi, pmax);
  }
  out_lo = claimed_lo;
  out_hi = claimed_hi;
}

void prefix_from_cells(const std::vector<double>& cell_mass, std::vector<double>& pre) {
  pre.resize(cell_mass.size() + 1);
  pre[0] = 0.0;
  for (size_t i = 0; i < cell_mass.size(); ++i) pre[i + 1] = pre[i] + cell_mass[i];
}

// Transition-array lookup. The density's support ends mid-cell at the sweep
// boundaries, so the within-cell fraction is taken over the supported part of
// the cell; boundary lookups then return the exact accumulated mass.
double lookup_b(const RowAntiderivatives& row, const std::vector<double>& pre, double ds,
                double s, double sup_lo, double sup_hi) {
  if (sup_hi <= sup_lo) return 0.0;
  const double x = std::clamp(s, sup_lo, sup_hi);
  int c = static_cast<int>(std::floor((x - row.s0) / ds));
  c = std::clamp(c, 0, row.n_cells - 1);
  const double cell_lo = std::max(row.s0 + c * ds, sup_lo);
  const double cell_hi = std::min(row.s0 + (c + 1) * ds, sup_hi);
  const double width = cell_hi - cell_lo;
  const double frac = width > 0.0 ? std::clamp((x - cell_lo) / width, 0.0, 1.0) : 1.0;
  return pre[c] + (pre[c + 1] - pre[c]) * frac;
}

double lookup_crest(const RowAntiderivatives& row, double ds, double s) {
  const double x = std::clamp(s, row.s0, row.s0 + row.n_cells * ds);
  int c = static_cast<int>(std::floor((x - row.s0) / ds));
  c = std::clamp(c, 0, row.n_cells - 1);
  const double e = row.s0 + c * ds;
  const double frac = (x - e) / ds;
  const double wx = row.w_edge[c] * (1.0 - frac) + row.w_edge[c + 1] * frac;
  return row.pre_crest[c] + (x - e) * 0.5 * (row.w_edge[c] + wx);
}

double lookup_cmov(const RowAntiderivatives& row, double ds, double s) {
  double x = std::clamp(s, row.s0, row.s0 + row.n_cells * ds);
  x = std::min(x, row.s_line);
  int c = static_cast<int>(std::floor((x - row.s0) / ds));
  c = std::clamp(c, 0, row.n_cells - 1);
  const double e = row.s0 + c * ds;
  if (x <= e || e >= row.s_line) return row.pre_cmov[c];
  const double m = (row.w_edge[c + 1] - row.w_edge[c]) / ds;
  return row.pre_cmov[c] + cmov_integral(row.s_line, e, row.w_edge[c], m, e, x);
}

struct Bracket {
  double strong = 0.0;  // most negative deceleration the plan can reach
  double gentle = 0.0;  // least negative
};

Bracket candidate_bracket(const PlanParams& params) {
  const auto cands = candidate_set(params);
  Bracket b;
  b.strong = std::min(cands.front(), params.a_prev);
  b.gentle = std::max(cands.back(), params.a_prev);
  return b;
}

void build_row(const PenaltyField& field, const PlanParams& params, const SolveOptions& opts,
               const Bracket& bracket, int field_row, RowAntiderivatives& out) {
  const double t = field_row * field.dt_grid;
  const double ds = opts.ds;
  const double v0 = params.v0;

  const double tf_strong = (params.a_prev - bracket.strong) / params.kappa_mag;
  const double s_lo = std::min(sigma_single(t, v0, tf_strong, bracket.strong),
                               sigma_single(t, v0, 0.0, params.a_prev));
  const double s_hi = sigma_single(t, v0, params.dt_plan, bracket.gentle);

  const int j_lo = std::max(0, static_cast<int>(std::floor(s_lo / ds)) - 2);
  const int j_hi = static_cast<int>(std::ceil(s_hi / ds)) + 2;
  out.s0 = j_lo * ds;
  out.n_cells = std::max(1, j_hi - j_lo);
  out.s_line = v0 * t;
  out.s_ref = sigma_single(t, v0, 0.0, params.a_prev);

  out.w_edge.resize(out.n_cells + 1);
  for (int k = 0; k <= out.n_cells; ++k) out.w_edge[k] = field.sample(field_row, out.s0 + k * ds);

  RowBuildContext ctx{out.s0, ds, out.n_cells, &out.w_edge};

  // Post-transition arrays.
  std::vector<double> cell_crest(out.n_cells, 0.0), cell_cmov(out.n_cells, 0.0);
  for (int c = 0; c < out.n_cells; ++c) {
    const double e0 = ctx.edge(c), e1 = ctx.edge(c + 1);
    cell_crest[c] = 0.5 * ds * (out.w_edge[c] + out.w_edge[c + 1]);
    if (e0 < out.s_line) {
      const double b = std::min(e1, out.s_line);
      const double m = (out.w_edge[c + 1] - out.w_edge[c]) / ds;
      cell_cmov[c] = cmov_integral(out.s_line, e0, out.w_edge[c], m, e0, b);
    }
  }
  prefix_from_cells(cell_crest, out.pre_crest);
  prefix_from_cells(cell_cmov, out.pre_cmov);

  // Transition arrays, one per valve direction.
  std::vector<double> cell_bp(out.n_cells, 0.0), cell_bm(out.n_cells, 0.0);
  const double tb_plus = (bracket.gentle - params.a_prev) / params.kappa_mag;
  const double tb_minus = (params.a_prev - bracket.strong) / params.kappa_mag;
  if (v0 > 0.0) {
    if (tb_plus > kTiny)
      accumulate_b_family(ctx, {v0, params.a_prev, params.kappa_mag}, t, tb_plus, cell_bp,
                          out.bp_lo, out.bp_hi);
    if (tb_minus > kTiny)
      accumulate_b_family(ctx, {v0, params.a_prev, -params.kappa_mag}, t, tb_minus, cell_bm,
                          out.bm_lo, out.bm_hi);
  }
  prefix_from_cells(cell_bp, out.pre_bp);
  prefix_from_cells(cell_bm, out.pre_bm);
  out.ref_bp = lookup_b(out, out.pre_bp, ds, out.s_ref, out.bp_lo, out.bp_hi);
  out.ref_bm = lookup_b(out, out.pre_bm, ds, out.s_ref, out.bm_lo, out.bm_hi);
}

}  // namespace

RegionAntiderivatives precompute(const PenaltyField& field, const PlanParams& params,
                                 const SolveOptions& opts) {
  const int last_row = validate_grid(field, params);
  if (!(opts.ds > 0.0)) throw ConfigError("solver column spacing must be > 0");

  RegionAntiderivatives pre;
  pre.dt = field.dt_grid;
  pre.ds = opts.ds;
  pre.first_row = 1;
  pre.n_rows = last_row;
  pre.v0 = params.v0;
  pre.rows.resize(pre.n_rows);

  const Bracket bracket = candidate_bracket(params);

  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i)
      build_row(field, params, opts, bracket, pre.first_row + i, pre.rows[i]);
  };

  const int threads = std::max(1, opts.threads);
  if (threads == 1 || pre.n_rows < 2 * threads) {
    work(0, pre.n_rows);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (pre.n_rows + threads - 1) / threads;
    for (int k = 0; k < threads; ++k) {
      const int b = k * chunk, e = std::min(pre.n_rows, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return pre;
}

CandidateEvaluation evaluate_candidate(const RegionAntiderivatives& pre,
                                       const PlanParams& params, double a_next) {
  CandidateEvaluation ev;
  ev.a_next = a_next;
  const auto vt = ValveTransition::make(params.a_prev, a_next, params.kappa_mag);
  ev.t_valve = vt.t_valve;

  const double v0 = pre.v0;
  if (v0 <= 0.0) return ev;

  const double inv_sqrt_a = 1.0 / std::sqrt(-a_next);
  double sum_b = 0.0, sum_c = 0.0;
  for (int i = 0; i < pre.n_rows; ++i) {
    const RowAntiderivatives& row = pre.rows[i];
    const double t = (pre.first_row + i) * pre.dt;

    if (vt.t_valve > 0.0) {
      const double s_b = sigma_b_fast(t, vt.t_valve, v0, params.a_prev, vt.kappa);
      const bool plus = vt.kappa > 0.0;
      const double val = plus ? lookup_b(row, row.pre_bp, pre.ds, s_b, row.bp_lo, row.bp_hi)
                              : lookup_b(row, row.pre_bm, pre.ds, s_b, row.bm_lo, row.bm_hi);
      sum_b += std::abs(val - (plus ? row.ref_bp : row.ref_bm));
    }

    const double lo = sigma_single(t, v0, vt.t_valve, a_next);
    const double hi = sigma_single(t, v0, std::min(t, params.dt_plan), a_next);
    if (hi > lo) {
      const double s_split = v0 * t + v0 * v0 / (2.0 * a_next);
      const double rest_hi = std::min(hi, s_split);
      if (rest_hi > lo)
        sum_c += (lookup_crest(row, pre.ds, rest_hi) - lookup_crest(row, pre.ds, lo)) / v0;
      const double mov_lo = std::max(lo, s_split);
      if (hi > mov_lo)
        sum_c += (lookup_cmov(row, pre.ds, hi) - lookup_cmov(row, pre.ds, mov_lo)) * inv_sqrt_a;
    }
  }

  const double scale = pre.dt / params.dt_plan;
  ev.p_b = sum_b * scale;
  ev.p_c = sum_c * scale;
  ev.total = ev.p_b + ev.p_c;
  return ev;
}

std::size_t argmin_with_tie_break(const std::vector<CandidateEvaluation>& evals,
                                  double a_prev, bool* tie_break_applied) {
  double best_total = std::numeric_limits<double>::infinity();
  for (const auto& ev : evals) best_total = std::min(best_total, ev.total);

  std::size_t best = 0;
  int n_tied = 0;
  bool have = false;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (evals[i].total != best_total) continue;
    ++n_tied;
    if (!have) {
      best = i;
      have = true;
      continue;
    }
    const double di = std::abs(evals[i].a_next - a_prev);
    const double db = std::abs(evals[best].a_next - a_prev);
    if (di < db || (di == db && evals[i].a_next < evals[best].a_next)) best = i;
  }
  if (tie_break_applied) *tie_break_applied = n_tied > 1;
  return best;
}

PlanResult plan(const PenaltyField& field, const PlanParams& params, const SolveOptions& opts) {
  using clock = std::chrono::steady_clock;
  validate_grid(field, params);
  const auto candidates = candidate_set(params);

  PlanResult result;
  result.evaluations.reserve(candidates.size());

  if (params.v0 == 0.0) {
    // Nothing moves: all penalties vanish and the tie-break keeps the valve.
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
  const auto pre = precompute(field, params, opts);
  const auto t1 = clock::now();
  for (double a : candidates) result.evaluations.push_back(evaluate_candidate(pre, params, a));
  const auto idx =
      argmin_with_tie_break(result.evaluations, params.a_prev, &result.tie_break_applied);
  const auto t2 = clock::now();

  result.a_star = result.evaluations[idx].a_next;
  result.precompute_time = std::chrono::duration<double>(t1 - t0).count();
  result.evaluate_time = std::chrono::duration<double>(t2 - t1).count();
  return result;
}

}  // namespace estop
