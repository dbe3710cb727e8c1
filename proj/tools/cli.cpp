#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mobisim/analysis.hpp"
#include "mobisim/error.hpp"
#include "mobisim/model.hpp"
#include "mobisim/numfmt.hpp"
#include "mobisim/report.hpp"
#include "mobisim/scenario.hpp"
#include "mobisim/scenario_io.hpp"
#include "../src/parallel.hpp"

namespace mobisim::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) { return format_double(v); }

// Numeric flags are parsed with from_chars so the C locale never leaks in.
CLI::Option* add_real(CLI::App* app, const std::string& name, std::optional<double>& target,
                      const std::string& description) {
    return app
        ->add_option_function<std::string>(
            name,
            [&target, name](const std::string& text) {
                const auto v = parse_double(text);
                if (!v || !std::isfinite(*v)) throw CLI::ValidationError(name, "expected a number, got '" + text + "'");
                target = *v;
            },
            description)
        ->type_name("NUM");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) {
        const auto v = parse_double(item);
        if (!v || !std::isfinite(*v)) throw ValidationError(flag, "expects comma-separated numbers (got '" + item + "')");
        out.push_back(*v);
    }
    if (out.empty()) throw ValidationError(flag, "must list at least one number");
    return out;
}

// Scenario selection shared by most commands:
//   preset/config < --set key=value < integrator flags
struct ScenarioOptions {
    std::string scenario;
    std::string config;
    std::vector<std::string> sets;
    std::string method;
    std::optional<double> step;
    std::optional<double> rtol;
    std::optional<double> atol;
    std::optional<std::int64_t> max_steps;

    void attach(CLI::App* app) {
        auto* s = app->add_option("--scenario", scenario, "Preset name (scenario-1 .. scenario-4)");
        auto* c = app->add_option("--config", config, "Scenario config JSON file");
        s->excludes(c);
        c->excludes(s);
        app->add_option("--set", sets,
                        "Override key=value; keys: k1 k2 k3 k4 a_max c0 a0 t0 t_end output_points (repeatable)")
            ->type_name("KEY=VALUE");
        app->add_option("--method", method, "Integrator method")
            ->check(CLI::IsMember({"fixed-rk4", "adaptive-rk45"}));
        add_real(app, "--step", step, "Fixed RK4 step size");
        add_real(app, "--rtol", rtol, "Adaptive relative tolerance");
        add_real(app, "--atol", atol, "Adaptive absolute tolerance");
        app->add_option_function<std::int64_t>(
               "--max-steps", [this](std::int64_t v) { max_steps = v; }, "Integrator step budget")
            ->type_name("INT");
    }

    bool given() const { return !scenario.empty() || !config.empty(); }

    ScenarioSpec resolve(const std::string& fallback = {}) const {
        ScenarioSpec spec;
        if (!scenario.empty()) {
            spec = preset(scenario);
        } else if (!config.empty()) {
            spec = load_scenario_file(config);
        } else if (!fallback.empty()) {
            spec = preset(fallback);
        } else {
            throw ValidationError("--scenario/--config", "exactly one is required");
        }
        for (const auto& kv : sets) apply_set(spec, kv);
        if (!method.empty()) spec.integrator.method = parse_method(method);
        if (step) spec.integrator.step = *step;
        if (rtol) spec.integrator.rtol = *rtol;
        if (atol) spec.integrator.atol = *atol;
        if (max_steps) spec.integrator.max_steps = *max_steps;
        spec.validate();
        return spec;
    }

    static void apply_set(ScenarioSpec& spec, const std::string& kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ValidationError("--set", "expects key=value (got '" + kv + "')");
        const std::string key = kv.substr(0, eq);
        const auto value = parse_double(kv.substr(eq + 1));
        if (!value || !std::isfinite(*value)) {
            throw ValidationError("--set " + key, "expects a number (got '" + kv.substr(eq + 1) + "')");
        }
        if (key == "t0") {
            spec.horizon.t0 = *value;
        } else if (key == "t_end") {
            spec.horizon.t_end = *value;
        } else if (key == "output_points") {
            if (*value != std::floor(*value)) throw ValidationError("--set output_points", "must be an integer");
            spec.horizon.output_points = static_cast<std::int64_t>(*value);
        } else {
            set_parameter(spec, parse_sweep_parameter(key), *value);
        }
    }
};

void print_fixed_point(std::ostream& out, const FixedPoint& fp) {
    out << "C=" << fmt(fp.state.congestion) << " A=" << fmt(fp.state.adoption) << " " << to_string(fp.classification)
        << " eigenvalues=";
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& l = fp.eigenvalues[i];
        out << (i ? "," : "") << fmt(l.real());
        if (l.imag() != 0.0) out << (l.imag() > 0 ? "+" : "") << fmt(l.imag()) << "i";
    }
    out << " residual=" << fmt(fp.residual) << "\n";
}

nlohmann::ordered_json fixed_point_json(const FixedPoint& fp) {
    nlohmann::ordered_json j;
    j["congestion"] = fp.state.congestion;
    j["adoption"] = fp.state.adoption;
    j["classification"] = std::string(to_string(fp.classification));
    j["eigenvalues"] = nlohmann::ordered_json::array();
    for (const auto& l : fp.eigenvalues) j["eigenvalues"].push_back({{"re", l.real()}, {"im", l.imag()}});
    j["residual"] = fp.residual;
    return j;
}

std::string summary_line(const ScenarioSpec& spec, const Trajectory& traj) {
    const auto& last = traj.states.back();
    std::ostringstream s;
    s << spec.name << ": C(" << fmt(traj.times.back()) << ")=" << fmt(last.congestion) << " A("
      << fmt(traj.times.back()) << ")=" << fmt(last.adoption) << " steps=" << traj.diagnostics.steps;
    if (spec.integrator.method == Method::AdaptiveRk45) s << " rejected=" << traj.diagnostics.rejected_steps;
    if (traj.diagnostics.adoption_went_negative || traj.diagnostics.congestion_went_negative) {
        s << " warning:";
        if (traj.diagnostics.congestion_went_negative) s << " congestion-went-negative";
        if (traj.diagnostics.adoption_went_negative) s << " adoption-went-negative";
    } else {
        s << " diagnostics=clean";
    }
    return s.str();
}

void write_run(const ScenarioSpec& spec, const Trajectory& traj, const fs::path& out_path) {
    const RunManifest manifest = make_manifest(spec, traj);
    write_trajectory(traj, format_for_path(out_path), out_path, &manifest);
    fs::path sidecar = out_path;
    sidecar += ".manifest.json";
    write_file_atomic(sidecar, manifest_to_json(manifest).dump(2) + "\n");
}

// ---- commands -----------------------------------------------------------------

int cmd_scenarios(const std::string& format, std::ostream& out) {
    const auto all = presets();
    if (format == "json") {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& s : all) arr.push_back(scenario_to_json(s));
        out << arr.dump(2) << "\n";
        return kSuccess;
    }
    for (const auto& s : all) {
        out << std::left << std::setw(12) << s.name << " k1=" << fmt(s.params.k1) << " k2=" << fmt(s.params.k2)
            << " k3=" << fmt(s.params.k3) << " k4=" << fmt(s.params.k4) << " a_max=" << fmt(s.params.a_max)
            << "  " << s.description << "\n";
    }
    return kSuccess;
}

int cmd_simulate(const ScenarioOptions& opts, const std::string& out_path, const std::string& plot_path,
                 std::ostream& out) {
    if (!opts.given()) throw ValidationError("--scenario/--config", "exactly one is required");
    const ScenarioSpec spec = opts.resolve();
    const Trajectory traj = simulate(spec);
    if (!out_path.empty()) write_run(spec, traj, out_path);
    if (!plot_path.empty()) write_file_atomic(plot_path, render_svg(trajectory_plot(traj, spec.name)));
    out << summary_line(spec, traj) << "\n";
    return kSuccess;
}

int cmd_figure(const std::string& dir, std::ostream& out) {
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec || !fs::is_directory(root)) throw IoError("cannot create output directory " + dir);

    const auto specs = presets();
    std::vector<Trajectory> trajs(specs.size());
    detail::parallel_for(specs.size(), default_thread_count(), [&](std::size_t i) {
        trajs[i] = simulate(specs[i]);
        write_run(specs[i], trajs[i], root / (specs[i].name + ".csv"));
        write_file_atomic(root / (specs[i].name + ".svg"), render_svg(trajectory_plot(trajs[i], specs[i].name)));
    });

    PlotSpec overlay;
    overlay.title = "Traffic congestion and AI adoption over time";
    overlay.y_label = "index";
    nlohmann::ordered_json summary;
    summary["scenarios"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const Trajectory& t = trajs[i];
        PlotSeries c{specs[i].name + " congestion", t.times, {}, static_cast<int>(2 * i)};
        PlotSeries a{specs[i].name + " adoption", t.times, {}, static_cast<int>(2 * i + 1)};
        for (const auto& s : t.states) {
            c.values.push_back(s.congestion);
            a.values.push_back(s.adoption);
        }
        overlay.series.push_back(std::move(c));
        overlay.series.push_back(std::move(a));
        summary["scenarios"].push_back({{"name", specs[i].name},
                                        {"t_end", t.times.back()},
                                        {"final_congestion", t.states.back().congestion},
                                        {"final_adoption", t.states.back().adoption}});
        out << summary_line(specs[i], t) << "\n";
    }
    write_file_atomic(root / "overlay.svg", render_svg(overlay));
    write_file_atomic(root / "summary.json", summary.dump(2) + "\n");
    out << "wrote " << specs.size() << " scenarios to " << root.string() << "\n";
    return kSuccess;
}

int cmd_equilibria(const ScenarioOptions& opts, const std::string& format, std::ostream& out) {
    if (!opts.given()) throw ValidationError("--scenario/--config", "exactly one is required");
    const ScenarioSpec spec = opts.resolve();
    const auto points = equilibria(spec.params);
    if (format == "json") {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& fp : points) arr.push_back(fixed_point_json(fp));
        out << arr.dump(2) << "\n";
    } else {
        out << spec.name << ": " << points.size() << " fixed point(s)\n";
        for (const auto& fp : points) print_fixed_point(out, fp);
    }
    if (points.empty()) {
        if (format != "json") out << "no real equilibria\n";
        return kNoResult;
    }
    return kSuccess;
}

int cmd_threshold(const ScenarioOptions& opts, const std::string& variable, double level, bool percent,
                  const std::string& direction, bool first, std::ostream& out) {
    if (!opts.given()) throw ValidationError("--scenario/--config", "exactly one is required");
    const ScenarioSpec spec = opts.resolve();
    EventSpec ev;
    ev.variable = variable == "congestion" ? Variable::Congestion : Variable::Adoption;
    ev.level = percent ? level / 100.0 * spec.params.a_max : level;
    ev.direction = direction == "up" ? Direction::Upward : direction == "down" ? Direction::Downward : Direction::Any;
    ev.which = first ? Which::First : Which::All;

    const Trajectory traj = simulate(spec);
    const auto hits = find_events(traj, ev);
    if (hits.empty()) {
        out << spec.name << ": no crossing of " << to_string(ev.variable) << " = " << fmt(ev.level) << "\n";
        return kNoResult;
    }
    out << spec.name << ": " << hits.size() << " crossing(s) of " << to_string(ev.variable) << " = " << fmt(ev.level)
        << "\n";
    for (const auto& h : hits) {
        const Derivative d = rhs(h.state, spec.params);
        out << "t=" << fmt(h.t) << " direction=" << to_string(h.direction) << " congestion=" << fmt(h.state.congestion)
            << " adoption=" << fmt(h.state.adoption) << " dC/dt=" << fmt(d.d_congestion) << "\n";
    }
    return kSuccess;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        write_file_atomic(path, text);
    }
}

int cmd_sweep(const ScenarioOptions& opts, const std::string& param, const std::string& values,
              std::optional<double> from, std::optional<double> to, std::optional<std::int64_t> steps,
              const std::string& metric_name, std::optional<double> level, const std::string& out_path,
              std::ostream& out) {
    if (!opts.given()) throw ValidationError("--scenario/--config", "exactly one is required");
    const ScenarioSpec base = opts.resolve();
    SweepSpec spec;
    spec.parameter = parse_sweep_parameter(param);
    spec.metric = parse_metric(metric_name, level.value_or(0.0));
    if (spec.metric.kind == Metric::Kind::TimeToAdoptionLevel && !level) {
        throw ValidationError("--level", "is required for time-to-adoption");
    }
    if (!values.empty()) {
        if (from || to || steps) throw ValidationError("--values", "cannot be combined with --from/--to/--steps");
        spec.values = parse_number_list(values, "--values");
    } else {
        if (!from || !to || !steps) throw ValidationError("--from/--to/--steps", "are required without --values");
        spec.values = linspace(*from, *to, *steps);
    }

    const auto rows = sweep(base, spec, default_thread_count());
    std::string csv = std::string(to_string(spec.parameter)) + "," + to_string(spec.metric) + ",status\n";
    for (const auto& r : rows) {
        csv += fmt(r.value) + ",";
        switch (r.status) {
        case SweepRow::Status::Ok: csv += fmt(r.metric) + ",ok\n"; break;
        case SweepRow::Status::NoEvent: csv += ",no-event\n"; break;
        case SweepRow::Status::Failed: {
            std::string msg = r.message;
            std::replace(msg.begin(), msg.end(), ',', ';');
            csv += ",failed: " + msg + "\n";
            break;
        }
        }
    }
    emit(csv, out_path, out);
    if (!out_path.empty()) out << "wrote " << rows.size() << " rows to " << out_path << "\n";
    return kSuccess;
}

int cmd_sensitivity(const ScenarioOptions& opts, const std::string& metric_name, std::optional<double> level,
                    const std::string& params, std::optional<double> rel_step, const std::string& out_path,
                    std::ostream& out) {
    if (!opts.given()) throw ValidationError("--scenario/--config", "exactly one is required");
    const ScenarioSpec base = opts.resolve();
    const Metric metric = parse_metric(metric_name, level.value_or(0.0));
    if (metric.kind == Metric::Kind::TimeToAdoptionLevel && !level) {
        throw ValidationError("--level", "is required for time-to-adoption");
    }
    std::vector<SweepParameter> which;
    for (const auto& p : split_list(params)) which.push_back(parse_sweep_parameter(p));
    if (which.empty()) throw ValidationError("--params", "must list at least one parameter");

    const auto rows = sensitivity(base, metric, which, rel_step.value_or(1e-4), default_thread_count());
    std::string csv = "parameter,value,step,derivative,note\n";
    bool any = false;
    for (const auto& r : rows) {
        csv += std::string(to_string(r.parameter)) + "," + fmt(r.value) + "," + fmt(r.step) + ",";
        if (r.derivative) {
            csv += fmt(*r.derivative);
            any = true;
        }
        std::string note = r.message;
        std::replace(note.begin(), note.end(), ',', ';');
        csv += "," + note + "\n";
    }
    emit(csv, out_path, out);
    return any ? kSuccess : kNoResult;
}

int cmd_calibrate(const ScenarioOptions& opts, const std::string& data, const std::string& free_list,
                  const std::string& guess_list, std::int64_t max_iter, const std::string& out_path,
                  std::ostream& out, std::ostream& err) {
    const ScenarioSpec base = opts.resolve("scenario-1");
    std::vector<std::string> warnings;
    const Trajectory observed = read_trajectory(fs::path(data), &warnings);
    for (const auto& w : warnings) err << "warning: " << data << ": " << w << "\n";
    if (observed.times.empty()) throw CalibrationError("no observations in " + data);

    CalibrationProblem problem;
    problem.observations = observations_from(observed);
    for (const auto& name : split_list(free_list)) problem.free.push_back(parse_param_id(name));
    problem.initial_guess = base.params;
    if (!guess_list.empty()) {
        const auto guess = parse_number_list(guess_list, "--guess");
        if (guess.size() != problem.free.size()) {
            throw ValidationError("--guess", "must have one value per --free parameter");
        }
        for (std::size_t i = 0; i < guess.size(); ++i) set_param(problem.initial_guess, problem.free[i], guess[i]);
    }
    problem.initial = observed.states.front();
    problem.t0 = observed.times.front();
    problem.integrator = base.integrator;
    problem.max_iterations = max_iter;

    const CalibrationResult result = calibrate(problem);
    out << "converged=" << (result.converged ? "yes" : "no") << " iterations=" << result.iterations
        << " evaluations=" << result.evaluations << " objective=" << fmt(result.objective) << "\n";
    for (ParamId p : problem.free) out << to_string(p) << "=" << fmt(get_param(result.params, p)) << "\n";

    if (!out_path.empty()) {
        ScenarioSpec fitted = base;
        fitted.name = base.name + "-fitted";
        fitted.description = "Calibrated against " + fs::path(data).filename().string();
        fitted.params = result.params;
        fitted.initial = problem.initial;
        fitted.horizon.t0 = observed.times.front();
        fitted.horizon.t_end = observed.times.back();
        write_file_atomic(out_path, serialize_scenario(fitted));
    }
    return kSuccess;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"mobisim: AI adoption and traffic congestion scenario simulator", "mobisim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version()));

    // scenarios [list]
    std::string list_format = "text";
    auto* scenarios = app.add_subcommand("scenarios", "List the preset scenarios");
    scenarios->add_option("--format", list_format, "Output format")->check(CLI::IsMember({"text", "json"}));
    auto* scenarios_list = scenarios->add_subcommand("list", "List the preset scenarios (same as bare 'scenarios')");
    scenarios_list->add_option("--format", list_format, "Output format")->check(CLI::IsMember({"text", "json"}));
    scenarios->require_subcommand(0, 1);

    // simulate
    ScenarioOptions sim_opts;
    std::string sim_out, sim_plot;
    auto* simulate_cmd = app.add_subcommand("simulate", "Integrate one scenario and write its trajectory");
    sim_opts.attach(simulate_cmd);
    simulate_cmd->add_option("--out", sim_out, "Trajectory output (.csv or .json); writes <out>.manifest.json too");
    simulate_cmd->add_option("--plot", sim_plot, "SVG plot output");

    // figure
    std::string fig_dir;
    auto* figure = app.add_subcommand("figure", "Run all four presets and write CSVs, SVGs and a summary");
    figure->add_option("--out", fig_dir, "Output directory")->required();

    // equilibria
    ScenarioOptions eq_opts;
    std::string eq_format = "text";
    auto* eq = app.add_subcommand("equilibria", "Fixed points and their stability");
    eq_opts.attach(eq);
    eq->add_option("--format", eq_format, "Output format")->check(CLI::IsMember({"text", "json"}));

    // threshold
    ScenarioOptions th_opts;
    std::string th_variable;
    std::optional<double> th_level;
    bool th_percent = false;
    bool th_first = false;
    std::string th_direction = "any";
    auto* threshold = app.add_subcommand("threshold", "Times at which a variable crosses a level");
    th_opts.attach(threshold);
    threshold->add_option("--variable", th_variable, "congestion or adoption")
        ->required()
        ->check(CLI::IsMember({"congestion", "adoption"}));
    add_real(threshold, "--level", th_level, "Crossing level")->required();
    threshold->add_flag("--percent-of-amax", th_percent, "Interpret --level as a percentage of a_max");
    threshold->add_option("--direction", th_direction, "Crossing direction")
        ->check(CLI::IsMember({"up", "down", "any"}));
    threshold->add_flag("--first", th_first, "Report only the first crossing");

    // sweep
    ScenarioOptions sw_opts;
    std::string sw_param, sw_values, sw_metric = "final-congestion", sw_out;
    std::optional<double> sw_from, sw_to, sw_level;
    std::optional<std::int64_t> sw_steps;
    auto* sweep_cmd = app.add_subcommand("sweep", "Vary one parameter and tabulate a metric (CSV)");
    sw_opts.attach(sweep_cmd);
    sweep_cmd->add_option("--param", sw_param, "Parameter: k1 k2 k3 k4 a_max c0 a0")->required();
    sweep_cmd->add_option("--values", sw_values, "Comma-separated values")->type_name("LIST");
    add_real(sweep_cmd, "--from", sw_from, "First value of an evenly spaced range");
    add_real(sweep_cmd, "--to", sw_to, "Last value of an evenly spaced range");
    sweep_cmd->add_option_function<std::int64_t>(
                 "--steps", [&](std::int64_t v) { sw_steps = v; }, "Number of values in the range")
        ->type_name("INT");
    sweep_cmd->add_option("--metric", sw_metric,
                          "final-congestion, final-adoption, min-congestion, peak-congestion, time-to-adoption");
    add_real(sweep_cmd, "--level", sw_level, "Adoption level for time-to-adoption");
    sweep_cmd->add_option("--out", sw_out, "CSV output file (default: stdout)");

    // sensitivity
    ScenarioOptions se_opts;
    std::string se_metric = "final-congestion", se_params = "k1,k2,k3,k4,a_max", se_out;
    std::optional<double> se_level, se_rel;
    auto* sens = app.add_subcommand("sensitivity", "Finite-difference derivatives of a metric (CSV)");
    se_opts.attach(sens);
    sens->add_option("--metric", se_metric,
                     "final-congestion, final-adoption, min-congestion, peak-congestion, time-to-adoption");
    add_real(sens, "--level", se_level, "Adoption level for time-to-adoption");
    sens->add_option("--params", se_params, "Comma-separated parameters")->type_name("LIST");
    add_real(sens, "--rel-step", se_rel, "Relative finite-difference step (default 1e-4)");
    sens->add_option("--out", se_out, "CSV output file (default: stdout)");

    // calibrate
    ScenarioOptions ca_opts;
    std::string ca_data, ca_free = "k1,k2,k3,k4", ca_guess, ca_out;
    std::int64_t ca_max_iter = 10'000;
    auto* cal = app.add_subcommand("calibrate", "Fit parameters to trajectory data (Nelder-Mead)");
    ca_opts.attach(cal);
    cal->add_option("--data", ca_data, "Observations: trajectory CSV or JSON")->required();
    cal->add_option("--free", ca_free, "Comma-separated parameters to fit")->type_name("LIST");
    cal->add_option("--guess", ca_guess, "Initial values for the --free parameters")->type_name("LIST");
    cal->add_option("--max-iter", ca_max_iter, "Iteration cap");
    cal->add_option("--out", ca_out, "Write the fitted scenario config here");
    cal->footer("Fixed parameters and integrator settings come from --scenario/--config (default scenario-1).\n"
                "The first observation supplies the initial state and time.");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        if (scenarios->parsed()) return cmd_scenarios(list_format, out);
        if (simulate_cmd->parsed()) return cmd_simulate(sim_opts, sim_out, sim_plot, out);
        if (figure->parsed()) return cmd_figure(fig_dir, out);
        if (eq->parsed()) return cmd_equilibria(eq_opts, eq_format, out);
        if (threshold->parsed()) {
            return cmd_threshold(th_opts, th_variable, *th_level, th_percent, th_direction, th_first, out);
        }
        if (sweep_cmd->parsed()) {
            return cmd_sweep(sw_opts, sw_param, sw_values, sw_from, sw_to, sw_steps, sw_metric, sw_level, sw_out,
                             out);
        }
        if (sens->parsed()) return cmd_sensitivity(se_opts, se_metric, se_level, se_params, se_rel, se_out, out);
        if (cal->parsed()) return cmd_calibrate(ca_opts, ca_data, ca_free, ca_guess, ca_max_iter, ca_out, out, err);
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const CalibrationStartError& e) {
        err << "calibration failed: " << e.what() << "\n";
        return kNumericalError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    err << app.help();
    return kUsageError;
}

} // namespace mobisim::cli
