#include "estop/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "estop/direct_solver.hpp"
#include "estop/errors.hpp"
#include "estop/fast_solver.hpp"

namespace estop {

namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double time_once(F&& fn) {
  const auto t0 = clock_type::now();
  fn();
  const auto t1 = clock_type::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

BenchReport run_speedup(const std::vector<PenaltyField>& fields, const PlanParams& params,
                        int runs_per_field) {
  if (fields.size() < 10) throw ParamError("run_speedup needs at least 10 fields");
  if (runs_per_field < 1) throw ParamError("runs_per_field must be >= 1");

  BenchReport rep;
  rep.scenario = "speedup";
  rep.params = params;

  std::vector<double> fast_times, direct_times;
  for (const auto& field : fields) {
    volatile double sink = 0.0;
    sink = plan(field, params).a_star;          // warmup
    sink = plan_direct(field, params).a_star;
    (void)sink;
    for (int r = 0; r < runs_per_field; ++r) {
      fast_times.push_back(time_once([&] { plan(field, params); }));
      direct_times.push_back(time_once([&] { plan_direct(field, params); }));
    }
  }
  rep.trials = static_cast<int>(fast_times.size());
  rep.fast_worst = *std::max_element(fast_times.begin(), fast_times.end());
  rep.direct_worst = *std::max_element(direct_times.begin(), direct_times.end());
  rep.fast_median = median(fast_times);
  rep.direct_median = median(direct_times);
  rep.ratio = rep.fast_worst / rep.direct_worst;
  return rep;
}

std::vector<BenchRow> run_v0_sweep(const PenaltyField& field, PlanParams params,
                                   const std::vector<double>& v0_list,
                                   const std::vector<double>& s_caps, int runs) {
  std::vector<BenchRow> rows;
  for (double cap : s_caps) {
    for (double v0 : v0_list) {
      params.v0 = v0;
      params.s_cap = cap;
      const int n_cand = static_cast<int>(candidate_set(params).size());

      std::vector<double> fast_t, direct_t;
      plan(field, params);  // warmup
      plan_direct(field, params);
      for (int r = 0; r < runs; ++r) {
        fast_t.push_back(time_once([&] { plan(field, params); }));
        direct_t.push_back(time_once([&] { plan_direct(field, params); }));
      }
      for (const char* solver : {"fast", "direct"}) {
        const auto& t = solver[0] == 'f' ? fast_t : direct_t;
        BenchRow row;
        row.scenario = "v0_sweep";
        row.solver = solver;
        row.stage = "total";
        row.v0 = v0;
        row.cap = cap;
        row.n_candidates = n_cand;
        row.ds = 0.25;
        row.worst_s = *std::max_element(t.begin(), t.end());
        row.median_s = median(t);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

ScalingResult run_scaling(const PenaltyField& field, PlanParams params, int runs) {
  ScalingResult res;

  // Candidate-count sweep at fixed ds.
  const std::vector<double> da_values = {0.4, 0.2, 0.1, 0.05};
  std::vector<double> n_cands, pre_medians, direct_medians;
  for (double da : da_values) {
    params.da = da;
    params.s_cap.reset();
    const int n_cand = static_cast<int>(candidate_set(params).size());

    std::vector<double> pre_t, eval_t, direct_t;
    plan(field, params);  // warmup
    plan_direct(field, params);
    for (int r = 0; r < runs; ++r) {
      const auto pr = plan(field, params);
      pre_t.push_back(pr.precompute_time);
      eval_t.push_back(pr.evaluate_time);
      direct_t.push_back(time_once([&] { plan_direct(field, params); }));
    }
    n_cands.push_back(n_cand);
    pre_medians.push_back(median(pre_t));
    direct_medians.push_back(median(direct_t));

    auto push = [&](const char* solver, const char* stage, const std::vector<double>& t) {
      BenchRow row;
      row.scenario = "scaling_candidates";
      row.solver = solver;
      row.stage = stage;
      row.v0 = params.v0;
      row.n_candidates = n_cand;
      row.ds = 0.25;
      row.worst_s = *std::max_element(t.begin(), t.end());
      row.median_s = median(t);
      res.rows.push_back(row);
    };
    push("fast", "precompute", pre_t);
    push("fast", "evaluate", eval_t);
    push("direct", "total", direct_t);
  }

  const auto [pmin, pmax] = std::minmax_element(pre_medians.begin(), pre_medians.end());
  res.precompute_flat = (*pmax - *pmin) <= 0.05 * *pmax;

  // Least-squares slope of log(direct time) vs log(candidate count).
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(n_cands.size());
    for (int i = 0; i < n; ++i) {
      const double x = std::log(n_cands[i]);
      const double y = std::log(direct_medians[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    res.direct_loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  // Column-spacing sweep at fixed da.
  params.da = 0.1;
  std::vector<double> ds_values = {0.5, 0.25, 0.125};
  std::vector<double> pre_by_ds;
  for (double ds : ds_values) {
    SolveOptions opts;
    opts.ds = ds;
    std::vector<double> pre_t;
    plan(field, params, opts);  // warmup
    for (int r = 0; r < runs; ++r) pre_t.push_back(plan(field, params, opts).precompute_time);
    pre_by_ds.push_back(median(pre_t));

    BenchRow row;
    row.scenario = "scaling_ds";
    row.solver = "fast";
    row.stage = "precompute";
    row.v0 = params.v0;
    row.n_candidates = static_cast<int>(candidate_set(params).size());
    row.ds = ds;
    row.worst_s = *std::max_element(pre_t.begin(), pre_t.end());
    row.median_s = median(pre_t);
    res.rows.push_back(row);
  }
  res.ds_scaling_ok = true;
  for (size_t i = 0; i + 1 < pre_by_ds.size(); ++i) {
    const double ratio = pre_by_ds[i + 1] / pre_by_ds[i];
    if (ratio < 1.6 || ratio > 2.4) res.ds_scaling_ok = false;
  }
  return res;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open for writing: " + path);
  out << "scenario,solver,stage,v0,cap,n_candidates,ds,worst_s,median_s\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.solver << ',' << r.stage << ',' << r.v0 << ',' << r.cap << ','
        << r.n_candidates << ',' << r.ds << ',' << r.worst_s << ',' << r.median_s << "\n";
  }
}

}  // namespace estop
