#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "estop/bench.hpp"
#include "estop/direct_solver.hpp"
#include "estop/errors.hpp"
#include "estop/fast_solver.hpp"
#include "estop/field.hpp"
#include "estop/kinematics.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCompareFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct PlanFlags {
  std::string field_path;
  estop::PlanParams params;
  double s_cap = 0.0;
  double ds_hat = 0.25;
  int threads = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--field", field_path, "penalty field CSV")->required();
    cmd->add_option("--v0", params.v0, "current speed [m/s]")->required();
    cmd->add_option("--a-prev", params.a_prev, "current valve state [m/s^2]")->required();
    cmd->add_option("--a-min", params.a_min, "strongest deceleration [m/s^2]");
    cmd->add_option("--a-max", params.a_max, "gentlest deceleration [m/s^2]");
    cmd->add_option("--dt-plan", params.dt_plan, "replanning interval [s]");
    cmd->add_option("--t-hzn", params.t_hzn, "prediction horizon [s]");
    cmd->add_option("--kappa", params.kappa_mag, "valve speed magnitude [m/s^3]");
    cmd->add_option("--da", params.da, "candidate spacing [m/s^2]");
    cmd->add_option("--s-cap", s_cap, "max allowed braking distance [m]");
    cmd->add_option("--ds-hat", ds_hat, "solver column spacing [m]");
    cmd->add_option("--threads", threads, "parallel precompute threads");
  }

  estop::PlanParams make_params() const {
    estop::PlanParams p = params;
    if (s_cap > 0.0) p.s_cap = s_cap;
    return p;
  }
  estop::SolveOptions make_opts() const { return {ds_hat, threads}; }
};

json params_to_json(const estop::PlanParams& p, const estop::SolveOptions& opts) {
  json j{{"v0", p.v0},           {"a_prev", p.a_prev},   {"a_min", p.a_min},
         {"a_max", p.a_max},     {"dt_plan", p.dt_plan}, {"t_hzn", p.t_hzn},
         {"kappa", p.kappa_mag}, {"da", p.da},           {"ds_hat", opts.ds}};
  if (p.s_cap) j["s_cap"] = *p.s_cap;
  return j;
}

json result_to_json(const estop::PlanResult& r) {
  json cands = json::array();
  for (const auto& ev : r.evaluations) {
    cands.push_back({{"a_next", ev.a_next},
                     {"p_b", ev.p_b},
                     {"p_c", ev.p_c},
                     {"total", ev.total},
                     {"t_valve", ev.t_valve}});
  }
  return json{{"a_star", r.a_star},
              {"candidates", std::move(cands)},
              {"tie_break_applied", r.tie_break_applied},
              {"timings", {{"precompute_s", r.precompute_time}, {"evaluate_s", r.evaluate_time}}}};
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw estop::FormatError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

estop::TrajectoryFan fan_for_plan(const estop::PenaltyField& field, const estop::PlanParams& p,
                                  double a_star) {
  estop::TrajectoryFan fan;
  const auto vt = estop::ValveTransition::make(p.a_prev, a_star, p.kappa_mag);
  estop::TrajectoryFan::Trajectory pre, initial, boundary, latest;
  for (int row = 0; row < field.n_t; ++row) {
    const double t = row * field.dt_grid;
    if (t <= p.dt_plan) pre.emplace_back(row, p.v0 * t);
    initial.emplace_back(row, estop::sigma_single(t, p.v0, 0.0, p.a_prev));
    boundary.emplace_back(row, estop::sigma_single(t, p.v0, vt.t_valve, a_star));
    latest.emplace_back(row, estop::sigma_single(t, p.v0, p.dt_plan, a_star));
  }
  fan.trajectories = {pre, initial, boundary, latest};
  return fan;
}

int cmd_plan(const PlanFlags& flags, const std::string& solver, const std::string& out_path) {
  const auto field = estop::read_field_csv(flags.field_path);
  const auto params = flags.make_params();
  const auto opts = flags.make_opts();
  const auto result = solver == "direct" ? estop::plan_direct(field, params, opts)
                                         : estop::plan(field, params, opts);
  json j = result_to_json(result);
  j["solver"] = solver;
  j["params"] = params_to_json(params, opts);
  write_json(j, out_path);
  std::printf("a_star = %.6g (solver=%s, %zu candidates)\n", result.a_star, solver.c_str(),
              result.evaluations.size());
  return kExitOk;
}

int cmd_compare(const PlanFlags& flags, const std::string& out_path) {
  const auto field = estop::read_field_csv(flags.field_path);
  const auto params = flags.make_params();
  const auto opts = flags.make_opts();
  const auto fast = estop::plan(field, params, opts);
  const auto direct = estop::plan_direct(field, params, opts);

  double max_rel_dev = 0.0;
  json cands = json::array();
  for (size_t i = 0; i < fast.evaluations.size(); ++i) {
    const double f = fast.evaluations[i].total;
    const double d = direct.evaluations[i].total;
    const double denom = std::max(f, d);
    const double rel = denom > 1e-6 ? std::abs(f - d) / denom : 0.0;
    max_rel_dev = std::max(max_rel_dev, rel);
    cands.push_back({{"a_next", fast.evaluations[i].a_next},
                     {"fast_total", f},
                     {"direct_total", d},
                     {"rel_dev", rel}});
  }
  const bool argmin_agrees = fast.a_star == direct.a_star;
  const bool ok = argmin_agrees && max_rel_dev <= 0.01;
  json j{{"argmin_agrees", argmin_agrees},
         {"a_star_fast", fast.a_star},
         {"a_star_direct", direct.a_star},
         {"max_rel_dev", max_rel_dev},
         {"ok", ok},
         {"candidates", std::move(cands)},
         {"params", params_to_json(params, opts)}};
  write_json(j, out_path);
  std::printf("argmin %s (fast %.6g, direct %.6g), max relative deviation %.3g\n",
              argmin_agrees ? "agrees" : "DIFFERS", fast.a_star, direct.a_star, max_rel_dev);
  return ok ? kExitOk : kExitCompareFailed;
}

estop::ScenarioSpec scenario_from_json(const std::string& path, int nt, int ns, double dt,
                                       double ds) {
  std::ifstream in(path);
  if (!in) throw estop::FormatError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw estop::FormatError(std::string("scenario JSON: ") + e.what());
  }
  estop::ScenarioSpec spec;
  spec.n_t = nt;
  spec.n_s = ns;
  spec.dt_grid = dt;
  spec.ds_grid = ds;
  try {
    for (const auto& b : j.value("bands", json::array())) {
      spec.bands.push_back({b.at("s").get<double>(), b.at("speed").get<double>(),
                            b.at("width").get<double>(), b.at("weight").get<double>()});
    }
    for (const auto& z : j.value("zones", json::array())) {
      spec.zones.push_back({z.at("s_lo").get<double>(), z.at("s_hi").get<double>(),
                            z.at("weight").get<double>()});
    }
  } catch (const json::exception& e) {
    throw estop::FormatError(std::string("scenario JSON: ") + e.what());
  }
  return spec;
}

int cmd_bench(const std::string& suite, const std::string& out_path, int trials) {
  estop::PlanParams params;
  params.v0 = 15.0;
  params.a_prev = -4.0;

  std::vector<estop::BenchRow> rows;
  if (suite == "speedup") {
    std::vector<estop::PenaltyField> fields;
    for (int i = 0; i < 10; ++i)
      fields.push_back(estop::generate_brownian(1000 + i, 100, 800, 0.1, 0.25, 8));
    const auto rep = estop::run_speedup(fields, params, std::max(1, trials / 10));
    for (const char* solver : {"fast", "direct"}) {
      estop::BenchRow row;
      row.scenario = rep.scenario;
      row.solver = solver;
      row.stage = "total";
      row.v0 = params.v0;
      row.n_candidates = static_cast<int>(estop::candidate_set(params).size());
      row.ds = 0.25;
      row.worst_s = solver[0] == 'f' ? rep.fast_worst : rep.direct_worst;
      row.median_s = solver[0] == 'f' ? rep.fast_median : rep.direct_median;
      rows.push_back(row);
    }
    std::printf("speedup: fast worst %.3f ms, direct worst %.3f ms, ratio %.3f (%d runs)\n",
                rep.fast_worst * 1e3, rep.direct_worst * 1e3, rep.ratio, rep.trials);
  } else if (suite == "v0") {
    const auto field = estop::generate_brownian(42, 100, 800, 0.1, 0.25, 8);
    rows = estop::run_v0_sweep(field, params, {2, 10, 20, 30, 40}, {100, 200}, trials);
    for (const auto& r : rows)
      std::printf("v0=%4.1f cap=%5.1f %7s: median %.3f ms (|A|=%d)\n", r.v0, r.cap,
                  r.solver.c_str(), r.median_s * 1e3, r.n_candidates);
  } else if (suite == "scaling") {
    const auto field = estop::generate_brownian(42, 100, 800, 0.1, 0.25, 8);
    params.v0 = 30.0;
    const auto res = estop::run_scaling(field, params, trials);
    rows = res.rows;
    std::printf("precompute flat across |A|: %s; direct log-log slope %.2f; ds scaling %s\n",
                res.precompute_flat ? "yes" : "NO", res.direct_loglog_slope,
                res.ds_scaling_ok ? "ok" : "NOT ok");
  } else {
    throw estop::ParamError("unknown bench suite: " + suite);
  }
  estop::write_bench_csv(rows, out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preset emergency-stop deceleration planner"};
  app.require_subcommand(1);

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "compute the optimal preset deceleration");
  PlanFlags plan_flags;
  plan_flags.attach(plan_cmd);
  std::string solver = "fast";
  std::string plan_out = "plan.json";
  plan_cmd->add_option("--solver", solver, "fast|direct")
      ->check(CLI::IsMember({"fast", "direct"}));
  plan_cmd->add_option("--out", plan_out, "result JSON path")->required();

  // compare
  auto* cmp_cmd = app.add_subcommand("compare", "run both solvers and diff the results");
  PlanFlags cmp_flags;
  cmp_flags.attach(cmp_cmd);
  std::string cmp_out = "compare.json";
  cmp_cmd->add_option("--out", cmp_out, "report JSON path")->required();

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate a penalty field CSV");
  bool gen_brownian = false;
  std::string gen_scenario;
  std::uint64_t gen_seed = 1;
  int gen_nt = 100, gen_ns = 800, gen_smooth = 8;
  double gen_dt = 0.1, gen_ds = 0.25;
  std::string gen_out;
  gen_cmd->add_flag("--brownian", gen_brownian, "Brownian noise field");
  gen_cmd->add_option("--scenario", gen_scenario, "scenario spec JSON");
  gen_cmd->add_option("--seed", gen_seed, "RNG seed");
  gen_cmd->add_option("--nt", gen_nt, "rows");
  gen_cmd->add_option("--ns", gen_ns, "columns");
  gen_cmd->add_option("--dt", gen_dt, "row spacing [s]");
  gen_cmd->add_option("--ds", gen_ds, "column spacing [m]");
  gen_cmd->add_option("--smoothness", gen_smooth, "box window [cells]");
  gen_cmd->add_option("--out", gen_out, "output CSV path")->required();

  // render
  auto* render_cmd = app.add_subcommand("render", "render a field (plus plan fan) to PGM");
  std::string render_field, render_plan, render_out;
  render_cmd->add_option("--field", render_field, "penalty field CSV")->required();
  render_cmd->add_option("--plan", render_plan, "plan result JSON to overlay");
  render_cmd->add_option("--out", render_out, "output PGM path")->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "timing suites");
  std::string bench_suite, bench_out = "bench.csv";
  int bench_trials = 10;
  bench_cmd->add_option("--suite", bench_suite, "speedup|v0|scaling")
      ->required()
      ->check(CLI::IsMember({"speedup", "v0", "scaling"}));
  bench_cmd->add_option("--out", bench_out, "report CSV path")->required();
  bench_cmd->add_option("--trials", bench_trials, "timed runs per configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (plan_cmd->parsed()) return cmd_plan(plan_flags, solver, plan_out);
    if (cmp_cmd->parsed()) return cmd_compare(cmp_flags, cmp_out);
    if (gen_cmd->parsed()) {
      if (gen_brownian == !gen_scenario.empty())
        throw estop::ParamError("pick exactly one of --brownian / --scenario");
      estop::PenaltyField field;
      if (gen_brownian) {
        field = estop::generate_brownian(gen_seed, gen_nt, gen_ns, gen_dt, gen_ds, gen_smooth);
      } else {
        field = estop::generate_scenario(
            scenario_from_json(gen_scenario, gen_nt, gen_ns, gen_dt, gen_ds));
      }
      estop::write_field_csv(field, gen_out);
      std::printf("wrote %dx%d field to %s\n", field.n_t, field.n_s, gen_out.c_str());
      return kExitOk;
    }
    if (render_cmd->parsed()) {
      const auto field = estop::read_field_csv(render_field);
      if (render_plan.empty()) {
        estop::render_pgm(field, nullptr, render_out);
      } else {
        std::ifstream in(render_plan);
        if (!in) throw estop::FormatError("cannot open plan file: " + render_plan);
        json j;
        try {
          in >> j;
        } catch (const json::exception& e) {
          throw estop::FormatError(std::string("plan JSON: ") + e.what());
        }
        estop::PlanParams p;
        try {
          const auto& pj = j.at("params");
          p.v0 = pj.at("v0").get<double>();
          p.a_prev = pj.at("a_prev").get<double>();
          p.a_min = pj.at("a_min").get<double>();
          p.a_max = pj.at("a_max").get<double>();
          p.dt_plan = pj.at("dt_plan").get<double>();
          p.t_hzn = pj.at("t_hzn").get<double>();
          p.kappa_mag = pj.at("kappa").get<double>();
          const auto fan = fan_for_plan(field, p, j.at("a_star").get<double>());
          estop::render_pgm(field, &fan, render_out);
        } catch (const json::exception& e) {
          throw estop::FormatError(std::string("plan JSON: ") + e.what());
        }
      }
      std::printf("wrote %s\n", render_out.c_str());
      return kExitOk;
    }
    if (bench_cmd->parsed()) return cmd_bench(bench_suite, bench_out, bench_trials);
  } catch (const estop::FormatError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const estop::ParamError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const estop::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
