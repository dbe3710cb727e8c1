#include "mobisim/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "mobisim/error.hpp"
#include "mobisim/numfmt.hpp"
#include "parallel.hpp"

namespace mobisim {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

// Lower bound of the valid range; k's may be zero, a_max must stay positive.
bool within_range(SweepParameter p, double v) {
    switch (p) {
    case SweepParameter::K1:
    case SweepParameter::K2:
    case SweepParameter::K3:
    case SweepParameter::K4: return v >= 0.0;
    case SweepParameter::AMax: return v > 0.0;
    case SweepParameter::C0:
    case SweepParameter::A0: return true;
    }
    return true;
}

} // namespace

// ---- parameters and metrics -------------------------------------------------

std::string_view to_string(SweepParameter p) {
    switch (p) {
    case SweepParameter::K1: return "k1";
    case SweepParameter::K2: return "k2";
    case SweepParameter::K3: return "k3";
    case SweepParameter::K4: return "k4";
    case SweepParameter::AMax: return "a_max";
    case SweepParameter::C0: return "c0";
    case SweepParameter::A0: return "a0";
    }
    return "?";
}

SweepParameter parse_sweep_parameter(std::string_view text) {
    const std::string t = lower(text);
    for (auto p : {SweepParameter::K1, SweepParameter::K2, SweepParameter::K3, SweepParameter::K4, SweepParameter::AMax,
                   SweepParameter::C0, SweepParameter::A0}) {
        if (t == to_string(p)) return p;
    }
    throw ValidationError("parameter", "must be one of k1, k2, k3, k4, a_max, c0, a0 (got \"" + std::string(text) + "\")");
}

double get_parameter(const ScenarioSpec& spec, SweepParameter p) {
    switch (p) {
    case SweepParameter::K1: return spec.params.k1;
    case SweepParameter::K2: return spec.params.k2;
    case SweepParameter::K3: return spec.params.k3;
    case SweepParameter::K4: return spec.params.k4;
    case SweepParameter::AMax: return spec.params.a_max;
    case SweepParameter::C0: return spec.initial.congestion;
    case SweepParameter::A0: return spec.initial.adoption;
    }
    return 0.0;
}

void set_parameter(ScenarioSpec& spec, SweepParameter p, double value) {
    switch (p) {
    case SweepParameter::K1: spec.params.k1 = value; break;
    case SweepParameter::K2: spec.params.k2 = value; break;
    case SweepParameter::K3: spec.params.k3 = value; break;
    case SweepParameter::K4: spec.params.k4 = value; break;
    case SweepParameter::AMax: spec.params.a_max = value; break;
    case SweepParameter::C0: spec.initial.congestion = value; break;
    case SweepParameter::A0: spec.initial.adoption = value; break;
    }
}

std::string to_string(const Metric& m) {
    switch (m.kind) {
    case Metric::Kind::FinalCongestion: return "final-congestion";
    case Metric::Kind::FinalAdoption: return "final-adoption";
    case Metric::Kind::MinCongestion: return "min-congestion";
    case Metric::Kind::PeakCongestion: return "peak-congestion";
    case Metric::Kind::TimeToAdoptionLevel: return "time-to-adoption(" + format_double(m.level) + ")";
    }
    return "?";
}

Metric parse_metric(std::string_view text, double level) {
    const std::string t = lower(text);
    if (t == "final-congestion") return {Metric::Kind::FinalCongestion, 0.0};
    if (t == "final-adoption") return {Metric::Kind::FinalAdoption, 0.0};
    if (t == "min-congestion") return {Metric::Kind::MinCongestion, 0.0};
    if (t == "peak-congestion") return {Metric::Kind::PeakCongestion, 0.0};
    if (t == "time-to-adoption") {
        if (!std::isfinite(level)) throw ValidationError("level", "must be finite");
        return {Metric::Kind::TimeToAdoptionLevel, level};
    }
    throw ValidationError("metric", "must be one of final-congestion, final-adoption, min-congestion, "
                                    "peak-congestion, time-to-adoption (got \"" + std::string(text) + "\")");
}

std::optional<double> metric_value(const Trajectory& traj, const Metric& metric) {
    if (traj.states.empty()) throw ValidationError("trajectory", "is empty");
    switch (metric.kind) {
    case Metric::Kind::FinalCongestion: return traj.states.back().congestion;
    case Metric::Kind::FinalAdoption: return traj.states.back().adoption;
    case Metric::Kind::MinCongestion: {
        double m = traj.states.front().congestion;
        for (const auto& s : traj.states) m = std::min(m, s.congestion);
        return m;
    }
    case Metric::Kind::PeakCongestion: {
        double m = traj.states.front().congestion;
        for (const auto& s : traj.states) m = std::max(m, s.congestion);
        return m;
    }
    case Metric::Kind::TimeToAdoptionLevel: {
        const auto hits = find_events(traj, {Variable::Adoption, metric.level, Direction::Upward, Which::First});
        if (hits.empty()) return std::nullopt;
        return hits.front().t;
    }
    }
    return std::nullopt;
}

std::optional<double> evaluate_metric(const ScenarioSpec& spec, const Metric& metric) {
    return metric_value(simulate(spec), metric);
}

// ---- sweep ------------------------------------------------------------------

std::vector<double> linspace(double from, double to, std::int64_t steps) {
    if (!std::isfinite(from) || !std::isfinite(to)) throw ValidationError("range", "bounds must be finite");
    if (steps < 1) throw ValidationError("steps", "must be ≥ 1");
    if (steps == 1) return {from};
    std::vector<double> out(static_cast<std::size_t>(steps));
    for (std::int64_t i = 0; i < steps; ++i) {
        out[static_cast<std::size_t>(i)] = from + static_cast<double>(i) * (to - from) / static_cast<double>(steps - 1);
    }
    out.back() = to;
    return out;
}

std::vector<SweepRow> sweep(const ScenarioSpec& base, const SweepSpec& spec, unsigned threads) {
    if (spec.values.empty()) throw ValidationError("values", "must be non-empty");
    for (double v : spec.values) {
        if (!std::isfinite(v)) throw ValidationError("values", "must be finite");
    }
    std::vector<SweepRow> rows(spec.values.size());
    detail::parallel_for(rows.size(), threads, [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.value = spec.values[i];
        try {
            ScenarioSpec s = base;
            set_parameter(s, spec.parameter, row.value);
            const auto m = evaluate_metric(s, spec.metric);
            if (m) {
                row.metric = *m;
            } else {
                row.status = SweepRow::Status::NoEvent;
                row.message = "no event";
            }
        } catch (const Error& e) {
            row.status = SweepRow::Status::Failed;
            row.message = e.what();
        }
    });
    return rows;
}

// ---- sensitivity --------------------------------------------------------------

std::vector<SensitivityRow> sensitivity(const ScenarioSpec& base, const Metric& metric,
                                        std::span<const SweepParameter> parameters, double rel_step,
                                        unsigned threads) {
    if (!(rel_step > 0.0) || !std::isfinite(rel_step)) throw ValidationError("rel_step", "must be positive");
    base.validate();
    const auto base_metric = evaluate_metric(base, metric);

    std::vector<SensitivityRow> rows(parameters.size());
    detail::parallel_for(rows.size(), threads, [&](std::size_t i) {
        SensitivityRow& row = rows[i];
        row.parameter = parameters[i];
        row.value = get_parameter(base, row.parameter);
        row.step = rel_step * std::max(std::abs(row.value), 1e-6);
        auto at = [&](double v) {
            ScenarioSpec s = base;
            set_parameter(s, row.parameter, v);
            return evaluate_metric(s, metric);
        };
        try {
            const auto plus = at(row.value + row.step);
            if (within_range(row.parameter, row.value - row.step)) {
                const auto minus = at(row.value - row.step);
                if (plus && minus) row.derivative = (*plus - *minus) / (2.0 * row.step);
            } else if (plus && base_metric) {
                row.derivative = (*plus - *base_metric) / row.step;
                row.message = "forward difference";
            }
            if (!row.derivative) row.message = "metric undefined at perturbed point";
        } catch (const Error& e) {
            row.message = e.what();
        }
    });
    return rows;
}

// ---- calibration -----------------------------------------------------------------

std::string_view to_string(ParamId p) {
    switch (p) {
    case ParamId::K1: return "k1";
    case ParamId::K2: return "k2";
    case ParamId::K3: return "k3";
    case ParamId::K4: return "k4";
    case ParamId::AMax: return "a_max";
    }
    return "?";
}

ParamId parse_param_id(std::string_view text) {
    const std::string t = lower(text);
    for (auto p : {ParamId::K1, ParamId::K2, ParamId::K3, ParamId::K4, ParamId::AMax}) {
        if (t == to_string(p)) return p;
    }
    throw ValidationError("parameter", "must be one of k1, k2, k3, k4, a_max (got \"" + std::string(text) + "\")");
}

double get_param(const ModelParams& p, ParamId id) {
    switch (id) {
    case ParamId::K1: return p.k1;
    case ParamId::K2: return p.k2;
    case ParamId::K3: return p.k3;
    case ParamId::K4: return p.k4;
    case ParamId::AMax: return p.a_max;
    }
    return 0.0;
}

void set_param(ModelParams& p, ParamId id, double value) {
    switch (id) {
    case ParamId::K1: p.k1 = value; break;
    case ParamId::K2: p.k2 = value; break;
    case ParamId::K3: p.k3 = value; break;
    case ParamId::K4: p.k4 = value; break;
    case ParamId::AMax: p.a_max = value; break;
    }
}

std::vector<Observation> observations_from(const Trajectory& traj) {
    std::vector<Observation> out;
    out.reserve(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out.push_back({traj.times[i], traj.states[i].congestion, traj.states[i].adoption});
    }
    return out;
}

void CalibrationProblem::validate() const {
    if (observations.size() < 3) {
        throw CalibrationError("calibration needs at least 3 observations (got " + std::to_string(observations.size()) +
                               ")");
    }
    if (free.empty()) throw CalibrationError("calibration needs at least one free parameter");
    if (2 * observations.size() < free.size()) {
        throw CalibrationError("fewer residuals than free parameters");
    }
    for (std::size_t i = 0; i < free.size(); ++i) {
        for (std::size_t j = i + 1; j < free.size(); ++j) {
            if (free[i] == free[j]) {
                throw CalibrationError("free parameter " + std::string(to_string(free[i])) + " listed twice");
            }
        }
    }
    try {
        initial_guess.validate();
        integrator.validate();
    } catch (const ValidationError& e) {
        throw CalibrationError(std::string("invalid calibration setup: ") + e.what());
    }
    for (ParamId p : free) {
        if (!(get_param(initial_guess, p) > 0.0)) {
            throw CalibrationError("initial guess for free parameter " + std::string(to_string(p)) +
                                   " must be > 0 (fitting runs in log space)");
        }
    }
    if (!std::isfinite(t0) || !std::isfinite(initial.congestion) || !std::isfinite(initial.adoption)) {
        throw CalibrationError("initial time and state must be finite");
    }
    double prev = t0;
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        if (!std::isfinite(o.t) || !std::isfinite(o.congestion) || !std::isfinite(o.adoption)) {
            throw CalibrationError("observation " + std::to_string(i) + " is not finite");
        }
        const bool ok = i == 0 ? o.t >= t0 : o.t > prev;
        if (!ok) throw CalibrationError("observation times must be strictly increasing and ≥ t0");
        prev = o.t;
    }
    if (max_iterations < 1) throw CalibrationError("max_iterations must be ≥ 1");
}

double calibration_objective(const CalibrationProblem& problem, const ModelParams& params) {
    std::vector<double> times;
    times.reserve(problem.observations.size() + 1);
    const bool starts_at_t0 = problem.observations.front().t == problem.t0;
    if (!starts_at_t0) times.push_back(problem.t0);
    for (const auto& o : problem.observations) times.push_back(o.t);
    try {
        const Trajectory traj = integrate_at(problem.initial, params, times, problem.integrator);
        double sum = 0.0;
        const std::size_t offset = starts_at_t0 ? 0 : 1;
        for (std::size_t i = 0; i < problem.observations.size(); ++i) {
            const auto& o = problem.observations[i];
            const auto& s = traj.states[i + offset];
            const double dc = s.congestion - o.congestion;
            const double da = s.adoption - o.adoption;
            sum += dc * dc + da * da;
        }
        return std::isfinite(sum) ? sum : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

CalibrationResult calibrate(const CalibrationProblem& problem) {
    problem.validate();
    const std::size_t n = problem.free.size();

    CalibrationResult result;
    auto to_params = [&](const std::vector<double>& x) {
        ModelParams p = problem.initial_guess;
        for (std::size_t i = 0; i < n; ++i) set_param(p, problem.free[i], std::exp(x[i]));
        return p;
    };
    auto objective = [&](const std::vector<double>& x) {
        ++result.evaluations;
        for (double v : x) {
            if (!std::isfinite(v) || std::abs(v) > 700.0) return std::numeric_limits<double>::infinity();
        }
        return calibration_objective(problem, to_params(x));
    };

    struct Vertex {
        std::vector<double> x;
        double f;
    };
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    std::vector<double> x0(n);
    for (std::size_t i = 0; i < n; ++i) x0[i] = std::log(get_param(problem.initial_guess, problem.free[i]));
    simplex.push_back({x0, objective(x0)});
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x = x0;
        x[i] += 0.05;
        simplex.push_back({x, objective(x)});
    }
    if (std::all_of(simplex.begin(), simplex.end(), [](const Vertex& v) { return !std::isfinite(v.f); })) {
        throw CalibrationStartError("calibration cannot start: every integration in the initial simplex failed");
    }

    auto by_f = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    auto affine = [&](const std::vector<double>& base, const std::vector<double>& dir_from, double coef) {
        // base + coef * (base - dir_from)
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = base[i] + coef * (base[i] - dir_from[i]);
        return x;
    };

    while (true) {
        std::stable_sort(simplex.begin(), simplex.end(), by_f);
        const Vertex& best = simplex.front();
        double diameter = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t i = 0; i < n; ++i) diameter = std::max(diameter, std::abs(simplex[k].x[i] - best.x[i]));
        }
        const double spread = simplex.back().f - best.f;
        // An exact zero cannot be improved on since the objective is a sum of squares.
        if (best.f == 0.0 || diameter < 1e-10 || spread < 1e-14 * (1.0 + best.f)) {
            result.converged = true;
            break;
        }
        if (result.iterations >= problem.max_iterations) break;
        ++result.iterations;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k].x[i] / static_cast<double>(n);
        }
        Vertex& worst = simplex.back();
        const double f_second = simplex[n - 1].f;

        const std::vector<double> xr = affine(centroid, worst.x, 1.0);
        const double fr = objective(xr);
        if (fr < best.f) {
            const std::vector<double> xe = affine(centroid, worst.x, 2.0);
            const double fe = objective(xe);
            worst = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
            continue;
        }
        if (fr < f_second) {
            worst = {xr, fr};
            continue;
        }
        bool shrink = false;
        if (fr < worst.f) {
            const std::vector<double> xc = affine(centroid, worst.x, 0.5);  // outside contraction
            const double fc = objective(xc);
            if (fc <= fr) {
                worst = {xc, fc};
            } else {
                shrink = true;
            }
        } else {
            const std::vector<double> xc = affine(centroid, worst.x, -0.5);  // inside contraction
            const double fc = objective(xc);
            if (fc < worst.f) {
                worst = {xc, fc};
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            const std::vector<double> anchor = simplex.front().x;
            for (std::size_t k = 1; k <= n; ++k) {
                for (std::size_t i = 0; i < n; ++i) simplex[k].x[i] = anchor[i] + 0.5 * (simplex[k].x[i] - anchor[i]);
                simplex[k].f = objective(simplex[k].x);
            }
        }
    }

    std::stable_sort(simplex.begin(), simplex.end(), by_f);
    result.params = to_params(simplex.front().x);
    result.objective = simplex.front().f;
    return result;
}

// ---- threads -----------------------------------------------------------------------

unsigned default_thread_count() {
    if (const char* env = std::getenv("MOBISIM_THREADS"); env && *env) {
        const auto v = parse_double(env);
        if (!v || *v < 1.0 || *v != std::floor(*v) || *v > 4096.0) {
            throw ValidationError("MOBISIM_THREADS", "must be an integer ≥ 1 (got \"" + std::string(env) + "\")");
        }
        return static_cast<unsigned>(*v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace mobisim
