#pragma once

#include <string>
#include <vector>

#include "estop/field.hpp"
#include "estop/kinematics.hpp"

namespace estop {

// Wall-clock comparison of the two solvers on a batch of fields.
struct BenchReport {
  std::string scenario;
  double fast_worst = 0.0;    // seconds, max over post-warmup runs
  double direct_worst = 0.0;
  double fast_median = 0.0;
  double direct_median = 0.0;
  double ratio = 0.0;  // fast_worst / direct_worst
  int trials = 0;      // timed runs per solver
  PlanParams params;
};

// One line of a sweep/scaling table; serialized to CSV by the CLI.
struct BenchRow {
  std::string scenario;
  std::string solver;  // "fast" or "direct"
  std::string stage;   // "total", "precompute", "evaluate"
  double v0 = 0.0;
  double cap = 0.0;  // 0 when unset
  int n_candidates = 0;
  double ds = 0.0;
  double worst_s = 0.0;
  double median_s = 0.0;
};

// Times both solvers per field (one warmup run each, then `runs_per_field`
// timed runs). Requires at least 10 fields.
BenchReport run_speedup(const std::vector<PenaltyField>& fields, const PlanParams& params,
                        int runs_per_field = 3);

// Times both solvers across v0 values for each braking-distance cap. Also
// reports candidate counts so cap-truncation effects are visible.
std::vector<BenchRow> run_v0_sweep(const PenaltyField& field, PlanParams params,
                                   const std::vector<double>& v0_list,
                                   const std::vector<double>& s_caps, int runs = 10);

// Scaling study: candidate-count sweep at fixed grids (precompute must stay
// flat, direct must grow linearly) and column-spacing sweep (precompute must
// scale inversely with the spacing).
struct ScalingResult {
  std::vector<BenchRow> rows;
  bool precompute_flat = false;     // < 5% variation across candidate counts
  double direct_loglog_slope = 0.0; // vs. candidate count; expect ~1
  bool ds_scaling_ok = false;       // halving ds doubles precompute +-40%
};

ScalingResult run_scaling(const PenaltyField& field, PlanParams params, int runs = 10);

double median(std::vector<double> v);

void write_bench_csv(const std::vector<BenchRow>& rows, const std::string& path);

}  // namespace estop
