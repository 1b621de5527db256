#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "estop/direct_solver.hpp"
#include "estop/errors.hpp"
#include "estop/fast_solver.hpp"
#include "estop/field.hpp"
#include "estop/kinematics.hpp"

namespace py = pybind11;
using namespace estop;

namespace {

PenaltyField field_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                              double dt_grid, double ds_grid, double t0) {
  if (arr.ndim() != 2) throw ParamError("expected a 2-D array (time rows x arc-length columns)");
  PenaltyField f;
  f.t0 = t0;
  f.dt_grid = dt_grid;
  f.ds_grid = ds_grid;
  f.n_t = static_cast<int>(arr.shape(0));
  f.n_s = static_cast<int>(arr.shape(1));
  f.values.assign(arr.data(), arr.data() + arr.size());
  f.validate();
  return f;
}

py::array_t<double> field_values(const PenaltyField& f) {
  py::array_t<double> arr({f.n_t, f.n_s});
  std::copy(f.values.begin(), f.values.end(), arr.mutable_data());
  return arr;
}

}  // namespace

PYBIND11_MODULE(_estop, m) {
  m.doc() = "Globally optimal preset braking deceleration for a fail-safe "
            "hydraulic emergency stop, with a brute-force reference solver.";

  py::register_exception<ParamError>(m, "ParamError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<PenaltyField>(m, "PenaltyField")
      .def(py::init(&field_from_array), py::arg("values"), py::arg("dt") = 0.1,
           py::arg("ds") = 0.25, py::arg("t0") = 0.0)
      .def_readonly("t0", &PenaltyField::t0)
      .def_readonly("dt", &PenaltyField::dt_grid)
      .def_readonly("ds", &PenaltyField::ds_grid)
      .def_readonly("n_t", &PenaltyField::n_t)
      .def_readonly("n_s", &PenaltyField::n_s)
      .def_property_readonly("values", &field_values)
      .def("sample", &PenaltyField::sample, py::arg("row"), py::arg("s"));

  py::class_<PlanParams>(m, "PlanParams")
      .def(py::init([](double v0, double a_prev, double a_min, double a_max, double dt_plan,
                       double t_hzn, double kappa, double da, std::optional<double> s_cap) {
             PlanParams p;
             p.v0 = v0;
             p.a_prev = a_prev;
             p.a_min = a_min;
             p.a_max = a_max;
             p.dt_plan = dt_plan;
             p.t_hzn = t_hzn;
             p.kappa_mag = kappa;
             p.da = da;
             p.s_cap = s_cap;
             p.validate();
             return p;
           }),
           py::arg("v0"), py::arg("a_prev"), py::arg("a_min") = -9.0, py::arg("a_max") = -1.0,
           py::arg("dt_plan") = 0.25, py::arg("t_hzn") = 10.0, py::arg("kappa") = 100.0,
           py::arg("da") = 0.1, py::arg("s_cap") = std::nullopt)
      .def_readwrite("v0", &PlanParams::v0)
      .def_readwrite("a_prev", &PlanParams::a_prev)
      .def_readwrite("a_min", &PlanParams::a_min)
      .def_readwrite("a_max", &PlanParams::a_max)
      .def_readwrite("dt_plan", &PlanParams::dt_plan)
      .def_readwrite("t_hzn", &PlanParams::t_hzn)
      .def_readwrite("kappa", &PlanParams::kappa_mag)
      .def_readwrite("da", &PlanParams::da)
      .def_readwrite("s_cap", &PlanParams::s_cap);

  py::class_<CandidateEvaluation>(m, "CandidateEvaluation")
      .def_readonly("a_next", &CandidateEvaluation::a_next)
      .def_readonly("p_b", &CandidateEvaluation::p_b)
      .def_readonly("p_c", &CandidateEvaluation::p_c)
      .def_readonly("total", &CandidateEvaluation::total)
      .def_readonly("t_valve", &CandidateEvaluation::t_valve)
      .def("__repr__", [](const CandidateEvaluation& ev) {
        return "<CandidateEvaluation a_next=" + std::to_string(ev.a_next) +
               " total=" + std::to_string(ev.total) + ">";
      });

  py::class_<PlanResult>(m, "PlanResult")
      .def_readonly("a_star", &PlanResult::a_star)
      .def_readonly("evaluations", &PlanResult::evaluations)
      .def_readonly("tie_break_applied", &PlanResult::tie_break_applied)
      .def_readonly("precompute_time", &PlanResult::precompute_time)
      .def_readonly("evaluate_time", &PlanResult::evaluate_time);

  m.def(
      "generate_brownian",
      [](std::uint64_t seed, int n_t, int n_s, double dt, double ds, int smoothness) {
        return generate_brownian(seed, n_t, n_s, dt, ds, smoothness);
      },
      py::arg("seed"), py::arg("n_t"), py::arg("n_s"), py::arg("dt") = 0.1,
      py::arg("ds") = 0.25, py::arg("smoothness") = 8);

  m.def("read_field_csv", &read_field_csv, py::arg("path"));
  m.def("write_field_csv", &write_field_csv, py::arg("field"), py::arg("path"));

  m.def("candidate_set", &candidate_set, py::arg("params"));

  m.def(
      "plan",
      [](const PenaltyField& field, const PlanParams& params, double ds, int threads) {
        return plan(field, params, {ds, threads});
      },
      py::arg("field"), py::arg("params"), py::arg("ds") = 0.25, py::arg("threads") = 1,
      "Prefix-antiderivative solver");

  m.def(
      "plan_direct",
      [](const PenaltyField& field, const PlanParams& params, double ds) {
        return plan_direct(field, params, {ds, 1});
      },
      py::arg("field"), py::arg("params"), py::arg("ds") = 0.25,
      "Brute-force reference solver");

  m.def(
      "expected_penalty",
      [](const PenaltyField& field, const PlanParams& params, double a_next, double ds) {
        const auto split = expected_penalty(field, params, a_next, ds);
        return py::make_tuple(split.pre_fail, split.post_fail);
      },
      py::arg("field"), py::arg("params"), py::arg("a_next"), py::arg("ds") = 0.25,
      "Per-candidate (pre_fail, post_fail) expected penalties");
}
