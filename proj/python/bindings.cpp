#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mobisim/analysis.hpp"
#include "mobisim/error.hpp"
#include "mobisim/model.hpp"
#include "mobisim/report.hpp"
#include "mobisim/scenario.hpp"
#include "mobisim/scenario_io.hpp"

namespace py = pybind11;
using namespace mobisim;

namespace {

std::string repr_params(const ModelParams& p) {
    std::ostringstream s;
    s.precision(17);
    s << "ModelParams(k1=" << p.k1 << ", k2=" << p.k2 << ", k3=" << p.k3 << ", k4=" << p.k4 << ", a_max=" << p.a_max
      << ")";
    return s.str();
}

std::vector<double> component(const Trajectory& t, bool congestion) {
    std::vector<double> out;
    out.reserve(t.states.size());
    for (const auto& s : t.states) out.push_back(congestion ? s.congestion : s.adoption);
    return out;
}

} // namespace

PYBIND11_MODULE(_mobisim, m) {
    m.doc() = "AI adoption and traffic congestion scenario simulator";
    m.attr("__version__") = std::string(version());

    auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
    py::register_exception<DomainError>(m, "DomainError", error.ptr());
    py::register_exception<DegenerateModelError>(m, "DegenerateModelError", error.ptr());
    py::register_exception<ParseError>(m, "ParseError", error.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
    py::register_exception<RangeError>(m, "RangeError", error.ptr());
    py::register_exception<IoError>(m, "IoError", error.ptr());
    auto cal_error = py::register_exception<CalibrationError>(m, "CalibrationError", error.ptr());
    py::register_exception<CalibrationStartError>(m, "CalibrationStartError", cal_error.ptr());

    py::class_<MobilityState>(m, "MobilityState")
        .def(py::init<>())
        .def(py::init([](double c, double a) { return MobilityState{c, a}; }), py::arg("congestion"),
             py::arg("adoption"))
        .def_readwrite("congestion", &MobilityState::congestion)
        .def_readwrite("adoption", &MobilityState::adoption)
        .def(py::self == py::self)
        .def("__repr__", [](const MobilityState& s) {
            std::ostringstream o;
            o.precision(17);
            o << "MobilityState(congestion=" << s.congestion << ", adoption=" << s.adoption << ")";
            return o.str();
        });

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](double k1, double k2, double k3, double k4, double a_max) {
                 return ModelParams{k1, k2, k3, k4, a_max};
             }),
             py::arg("k1") = 0.0, py::arg("k2") = 0.0, py::arg("k3") = 0.0, py::arg("k4") = 0.0,
             py::arg("a_max") = 100.0)
        .def_readwrite("k1", &ModelParams::k1)
        .def_readwrite("k2", &ModelParams::k2)
        .def_readwrite("k3", &ModelParams::k3)
        .def_readwrite("k4", &ModelParams::k4)
        .def_readwrite("a_max", &ModelParams::a_max)
        .def("validate", &ModelParams::validate)
        .def(py::self == py::self)
        .def("__repr__", &repr_params);

    py::enum_<Method>(m, "Method").value("FIXED_RK4", Method::FixedRk4).value("ADAPTIVE_RK45", Method::AdaptiveRk45);

    py::class_<IntegratorConfig>(m, "IntegratorConfig")
        .def(py::init<>())
        .def_readwrite("method", &IntegratorConfig::method)
        .def_readwrite("step", &IntegratorConfig::step)
        .def_readwrite("rtol", &IntegratorConfig::rtol)
        .def_readwrite("atol", &IntegratorConfig::atol)
        .def_readwrite("max_steps", &IntegratorConfig::max_steps);

    py::class_<Horizon>(m, "Horizon")
        .def(py::init([](double t0, double t_end, std::int64_t n) { return Horizon{t0, t_end, n}; }),
             py::arg("t0") = 0.0, py::arg("t_end") = 100.0, py::arg("output_points") = 1001)
        .def_readwrite("t0", &Horizon::t0)
        .def_readwrite("t_end", &Horizon::t_end)
        .def_readwrite("output_points", &Horizon::output_points)
        .def("grid", &Horizon::grid);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("name", &ScenarioSpec::name)
        .def_readwrite("description", &ScenarioSpec::description)
        .def_readwrite("params", &ScenarioSpec::params)
        .def_readwrite("initial", &ScenarioSpec::initial)
        .def_readwrite("horizon", &ScenarioSpec::horizon)
        .def_readwrite("integrator", &ScenarioSpec::integrator)
        .def("validate", &ScenarioSpec::validate)
        .def(py::self == py::self)
        .def("to_json", &serialize_scenario)
        .def_static("from_json", &parse_scenario, py::arg("text"));

    py::class_<Diagnostics>(m, "Diagnostics")
        .def_readonly("adoption_went_negative", &Diagnostics::adoption_went_negative)
        .def_readonly("congestion_went_negative", &Diagnostics::congestion_went_negative)
        .def_readonly("steps", &Diagnostics::steps)
        .def_readonly("rejected_steps", &Diagnostics::rejected_steps);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_property_readonly("congestion", [](const Trajectory& t) { return component(t, true); })
        .def_property_readonly("adoption", [](const Trajectory& t) { return component(t, false); })
        .def_readonly("states", &Trajectory::states)
        .def_readonly("scenario_name", &Trajectory::scenario_name)
        .def_readonly("params", &Trajectory::params)
        .def_readonly("diagnostics", &Trajectory::diagnostics)
        .def("__len__", [](const Trajectory& t) { return t.times.size(); })
        .def("at", &evaluate_trajectory, py::arg("t"))
        .def("to_csv", &trajectory_csv)
        .def("to_svg", [](const Trajectory& t, const std::string& title) { return render_svg(trajectory_plot(t, title)); },
             py::arg("title") = "");

    py::enum_<Stability>(m, "Stability")
        .value("STABLE_NODE", Stability::StableNode)
        .value("STABLE_SPIRAL", Stability::StableSpiral)
        .value("SADDLE", Stability::Saddle)
        .value("UNSTABLE_NODE", Stability::UnstableNode)
        .value("UNSTABLE_SPIRAL", Stability::UnstableSpiral)
        .value("MARGINAL", Stability::Marginal);

    py::class_<FixedPoint>(m, "FixedPoint")
        .def_readonly("state", &FixedPoint::state)
        .def_readonly("classification", &FixedPoint::classification)
        .def_readonly("eigenvalues", &FixedPoint::eigenvalues)
        .def_readonly("residual", &FixedPoint::residual);

    py::enum_<Variable>(m, "Variable").value("CONGESTION", Variable::Congestion).value("ADOPTION", Variable::Adoption);
    py::enum_<Direction>(m, "Direction")
        .value("UP", Direction::Upward)
        .value("DOWN", Direction::Downward)
        .value("ANY", Direction::Any);

    py::class_<EventHit>(m, "EventHit")
        .def_readonly("t", &EventHit::t)
        .def_readonly("state", &EventHit::state)
        .def_readonly("direction", &EventHit::direction);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("value", &SweepRow::value)
        .def_property_readonly("ok", [](const SweepRow& r) { return r.status == SweepRow::Status::Ok; })
        .def_property_readonly("metric",
                               [](const SweepRow& r) -> std::optional<double> {
                                   if (r.status != SweepRow::Status::Ok) return std::nullopt;
                                   return r.metric;
                               })
        .def_readonly("message", &SweepRow::message);

    py::class_<SensitivityRow>(m, "SensitivityRow")
        .def_property_readonly("parameter", [](const SensitivityRow& r) { return std::string(to_string(r.parameter)); })
        .def_readonly("value", &SensitivityRow::value)
        .def_readonly("step", &SensitivityRow::step)
        .def_readonly("derivative", &SensitivityRow::derivative)
        .def_readonly("message", &SensitivityRow::message);

    py::class_<CalibrationResult>(m, "CalibrationResult")
        .def_readonly("params", &CalibrationResult::params)
        .def_readonly("objective", &CalibrationResult::objective)
        .def_readonly("iterations", &CalibrationResult::iterations)
        .def_readonly("evaluations", &CalibrationResult::evaluations)
        .def_readonly("converged", &CalibrationResult::converged);

    m.def("presets", &presets);
    m.def("preset", [](const std::string& name) { return preset(name); }, py::arg("name"));
    m.def("simulate", &simulate, py::arg("spec"), py::call_guard<py::gil_scoped_release>());
    m.def("rhs", [](const MobilityState& s, const ModelParams& p) {
        const Derivative d = rhs(s, p);
        return std::pair{d.d_congestion, d.d_adoption};
    });
    m.def("jacobian", &jacobian, py::arg("state"), py::arg("params"));
    m.def("equilibria", &equilibria, py::arg("params"));

    m.def(
        "find_events",
        [](const Trajectory& t, Variable v, double level, Direction d, bool first) {
            return find_events(t, EventSpec{v, level, d, first ? Which::First : Which::All});
        },
        py::arg("trajectory"), py::arg("variable"), py::arg("level"), py::arg("direction") = Direction::Any,
        py::arg("first") = false);

    m.def(
        "sweep",
        [](const ScenarioSpec& base, const std::string& param, std::vector<double> values, const std::string& metric,
           double level, unsigned threads) {
            SweepSpec spec{parse_sweep_parameter(param), std::move(values), parse_metric(metric, level)};
            py::gil_scoped_release release;
            return sweep(base, spec, threads == 0 ? default_thread_count() : threads);
        },
        py::arg("base"), py::arg("param"), py::arg("values"), py::arg("metric") = "final-congestion",
        py::arg("level") = 0.0, py::arg("threads") = 0);

    m.def(
        "sensitivity",
        [](const ScenarioSpec& base, const std::vector<std::string>& params, const std::string& metric, double level,
           double rel_step) {
            std::vector<SweepParameter> which;
            for (const auto& p : params) which.push_back(parse_sweep_parameter(p));
            const Metric mt = parse_metric(metric, level);
            py::gil_scoped_release release;
            return sensitivity(base, mt, which, rel_step, default_thread_count());
        },
        py::arg("base"), py::arg("params") = std::vector<std::string>{"k1", "k2", "k3", "k4", "a_max"},
        py::arg("metric") = "final-congestion", py::arg("level") = 0.0, py::arg("rel_step") = 1e-4);

    m.def(
        "calibrate",
        [](const Trajectory& data, const ModelParams& guess, const std::vector<std::string>& free,
           const IntegratorConfig& integrator, std::int64_t max_iterations) {
            CalibrationProblem prob;
            prob.observations = observations_from(data);
            for (const auto& f : free) prob.free.push_back(parse_param_id(f));
            prob.initial_guess = guess;
            prob.initial = data.states.at(0);
            prob.t0 = data.times.at(0);
            prob.integrator = integrator;
            prob.max_iterations = max_iterations;
            py::gil_scoped_release release;
            return calibrate(prob);
        },
        py::arg("data"), py::arg("guess"), py::arg("free") = std::vector<std::string>{"k1", "k2", "k3", "k4"},
        py::arg("integrator") = IntegratorConfig{}, py::arg("max_iterations") = 10000);

    m.def("load_scenario", &load_scenario_file, py::arg("path"));
    m.def("read_trajectory", [](const std::filesystem::path& p) { return read_trajectory(p); }, py::arg("path"));
    m.def(
        "write_trajectory",
        [](const Trajectory& t, const std::filesystem::path& p) {
            return write_trajectory(t, format_for_path(p), p);
        },
        py::arg("trajectory"), py::arg("path"));
}
