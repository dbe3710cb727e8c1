#include "mobisim/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mobisim/dormand_prince.hpp"
#include "mobisim/error.hpp"
#include "mobisim/numfmt.hpp"

namespace mobisim {

namespace {

using Vec = std::array<double, 2>;

Vec to_vec(const MobilityState& s) { return {s.congestion, s.adoption}; }
MobilityState to_state(const Vec& v) { return {v[0], v[1]}; }

bool finite(const Vec& v) { return std::isfinite(v[0]) && std::isfinite(v[1]); }

std::string where(double t, double h) {
    return " at t=" + format_double(t) + " (h=" + format_double(h) + ")";
}

// Right-hand side for a stage value. Non-finite stages surface as NumericalError.
Vec stage(const Vec& y, const ModelParams& p, double t, double h) {
    if (!finite(y)) throw NumericalError("non-finite stage value" + where(t, h), t, h);
    const Derivative d = rhs(to_state(y), p);
    const Vec out{d.d_congestion, d.d_adoption};
    if (!finite(out)) throw NumericalError("non-finite derivative" + where(t, h), t, h);
    return out;
}

Vec axpy(const Vec& y, double h, const Vec& k) { return {y[0] + h * k[0], y[1] + h * k[1]}; }

void note_negatives(const Vec& y, Diagnostics& diag) {
    if (y[0] < 0.0) diag.congestion_went_negative = true;
    if (y[1] < 0.0) diag.adoption_went_negative = true;
}

void check_times(std::span<const double> times) {
    if (times.size() < 2) throw ValidationError("times", "must contain at least 2 entries");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i])) throw ValidationError("times", "must be finite");
        if (i > 0 && !(times[i] > times[i - 1])) throw ValidationError("times", "must be strictly increasing");
    }
}

Trajectory make_trajectory(std::span<const double> times, const ModelParams& params, const IntegratorConfig& config,
                           std::string name) {
    Trajectory traj;
    traj.times.assign(times.begin(), times.end());
    traj.states.reserve(times.size());
    traj.scenario_name = std::move(name);
    traj.params = params;
    traj.integrator = config;
    return traj;
}

void run_fixed(const MobilityState& initial, std::span<const double> times, const IntegratorConfig& config,
               Trajectory& traj) {
    const ModelParams& params = traj.params;
    Diagnostics& diag = traj.diagnostics;
    MobilityState y = initial;
    traj.states.push_back(y);
    note_negatives(to_vec(y), diag);

    for (std::size_t i = 1; i < times.size(); ++i) {
        const double a = times[i - 1];
        const double b = times[i];
        // Number of substeps: configured step h, the final one adjusted to land on b.
        const double ratio = (b - a) / config.step;
        const auto n = static_cast<std::int64_t>(std::max(1.0, std::ceil(ratio - 1e-9)));
        if (diag.steps + n > config.max_steps) {
            throw NumericalError("maximum step count " + std::to_string(config.max_steps) + " exceeded" +
                                     where(a, config.step),
                                 a, config.step);
        }
        for (std::int64_t j = 0; j < n; ++j) {
            const double t = a + static_cast<double>(j) * config.step;
            const double h = (j + 1 == n) ? b - t : config.step;
            y = step_rk4(y, t, h, params);
            note_negatives(to_vec(y), diag);
        }
        diag.steps += n;
        traj.states.push_back(y);
    }
}

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, const IntegratorConfig& config) {
    double sum = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double scale = config.atol + config.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / scale;
        sum += r * r;
    }
    return std::sqrt(sum / 2.0);
}

void run_adaptive(const MobilityState& initial, std::span<const double> times, const IntegratorConfig& config,
                  Trajectory& traj) {
    namespace dp = dopri;
    const ModelParams& params = traj.params;
    Diagnostics& diag = traj.diagnostics;

    const double t0 = times.front();
    const double t_end = times.back();
    const double span = t_end - t0;

    Vec y = to_vec(initial);
    double t = t0;
    double h = 1e-3 * span;
    Vec k1 = stage(y, params, t, h);
    note_negatives(y, diag);
    traj.states.push_back(initial);
    std::size_t next_out = 1;

    std::int64_t attempts = 0;
    bool done = false;
    while (!done) {
        if (attempts >= config.max_steps) {
            throw NumericalError("maximum step count " + std::to_string(config.max_steps) + " exceeded" + where(t, h),
                                 t, h);
        }
        ++attempts;

        bool last = false;
        if (t + 1.01 * h >= t_end) {
            h = t_end - t;
            last = true;
        }
        if (h < 1e-14 * span) {
            throw NumericalError("step size underflow, problem may be stiff" + where(t, h), t, h);
        }

        std::array<Vec, 7> k;
        k[0] = k1;
        Vec y_new{};
        bool stage_failed = false;
        try {
            for (std::size_t s = 1; s < 7; ++s) {
                Vec ys = y;
                for (std::size_t j = 0; j < s; ++j) {
                    ys[0] += h * dp::a[s][j] * k[j][0];
                    ys[1] += h * dp::a[s][j] * k[j][1];
                }
                if (s == 6) y_new = ys;
                k[s] = stage(ys, params, t + dp::c[s] * h, h);
            }
        } catch (const NumericalError&) {
            stage_failed = true;
        }

        double err = std::numeric_limits<double>::infinity();
        if (!stage_failed) {
            Vec e{0.0, 0.0};
            for (std::size_t s = 0; s < 7; ++s) {
                e[0] += dp::e[s] * k[s][0];
                e[1] += dp::e[s] * k[s][1];
            }
            e = {h * e[0], h * e[1]};
            err = error_norm(e, y, y_new, config);
        }

        if (!(err <= 1.0)) {
            ++diag.rejected_steps;
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= std::min(1.0, fac);
            continue;
        }

        const double t_new = last ? t_end : t + h;
        DenseSegment seg;
        seg.t_left = t;
        seg.t_right = t_new;
        seg.left = to_state(y);
        seg.right = to_state(y_new);
        for (int i = 0; i < 2; ++i) {
            const double r1 = y_new[i] - y[i];
            const double r2 = h * k[0][i] - r1;
            const double r3 = r1 - h * k[6][i] - r2;
            double dsum = 0.0;
            for (std::size_t s = 0; s < 7; ++s) dsum += dp::d[s] * k[s][i];
            seg.coeffs[i] = {r1, r2, r3, h * dsum};
        }
        traj.dense.push_back(seg);

        ++diag.steps;
        note_negatives(y_new, diag);
        y = y_new;
        k1 = k[6];
        t = t_new;

        while (next_out + 1 < times.size() && times[next_out] <= t) {
            traj.states.push_back(seg.evaluate(times[next_out]));
            ++next_out;
        }

        if (last) {
            done = true;
        } else {
            const double fac = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
            h *= fac;
        }
    }
    traj.states.push_back(to_state(y));
}

} // namespace

std::string_view to_string(Method m) {
    switch (m) {
    case Method::FixedRk4: return "fixed-rk4";
    case Method::AdaptiveRk45: return "adaptive-rk45";
    }
    return "unknown";
}

Method parse_method(std::string_view text) {
    if (text == "fixed-rk4") return Method::FixedRk4;
    if (text == "adaptive-rk45") return Method::AdaptiveRk45;
    throw ValidationError("integrator.method", "must be one of fixed-rk4, adaptive-rk45 (got \"" + std::string(text) + "\")");
}

void IntegratorConfig::validate() const {
    auto positive = [](double v, const char* field) {
        if (!std::isfinite(v) || !(v > 0.0)) {
            throw ValidationError(field, "must be a positive finite number (got " + format_double(v) + ")");
        }
    };
    positive(step, "integrator.step");
    positive(rtol, "integrator.rtol");
    positive(atol, "integrator.atol");
    if (rtol < 1e-14) throw ValidationError("integrator.rtol", "must be ≥ 1e-14 (got " + format_double(rtol) + ")");
    if (max_steps <= 0) throw ValidationError("integrator.max_steps", "must be > 0");
}

void Horizon::validate() const {
    if (!std::isfinite(t0)) throw ValidationError("horizon.t0", "must be finite");
    if (!std::isfinite(t_end)) throw ValidationError("horizon.t_end", "must be finite");
    if (!(t_end > t0)) {
        throw ValidationError("horizon.t_end", "must be > t0 (got t0=" + format_double(t0) + ", t_end=" +
                                                   format_double(t_end) + ")");
    }
    if (output_points < 2) throw ValidationError("horizon.output_points", "must be ≥ 2");
}

std::vector<double> Horizon::grid() const {
    validate();
    const auto n = static_cast<std::size_t>(output_points);
    std::vector<double> out(n);
    const double span = t_end - t0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = t0 + static_cast<double>(i) * span / static_cast<double>(n - 1);
    }
    out.back() = t_end;
    return out;
}

MobilityState DenseSegment::evaluate(double t) const {
    if (t == t_left) return left;
    if (t == t_right) return right;
    const double theta = (t - t_left) / (t_right - t_left);
    const double theta1 = 1.0 - theta;
    const double y0[2] = {left.congestion, left.adoption};
    double y[2];
    for (int i = 0; i < 2; ++i) {
        const auto& r = coeffs[i];
        y[i] = y0[i] + theta * (r[0] + theta1 * (r[1] + theta * (r[2] + theta1 * r[3])));
    }
    return {y[0], y[1]};
}

MobilityState step_rk4(const MobilityState& state, double t, double h, const ModelParams& params) {
    if (!std::isfinite(h) || !(h > 0.0)) throw ValidationError("h", "must be a positive finite number");
    if (!std::isfinite(t)) throw ValidationError("t", "must be finite");
    const Vec y = to_vec(state);
    const Vec k1 = stage(y, params, t, h);
    const Vec k2 = stage(axpy(y, 0.5 * h, k1), params, t, h);
    const Vec k3 = stage(axpy(y, 0.5 * h, k2), params, t, h);
    const Vec k4 = stage(axpy(y, h, k3), params, t, h);
    Vec out;
    for (int i = 0; i < 2; ++i) {
        out[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (!finite(out)) throw NumericalError("non-finite RK4 result" + where(t, h), t, h);
    return to_state(out);
}

Trajectory integrate(const MobilityState& initial, const ModelParams& params, const Horizon& horizon,
                     const IntegratorConfig& config, std::string scenario_name) {
    horizon.validate();
    const std::vector<double> grid = horizon.grid();
    return integrate_at(initial, params, grid, config, std::move(scenario_name));
}

Trajectory integrate_at(const MobilityState& initial, const ModelParams& params, std::span<const double> times,
                        const IntegratorConfig& config, std::string scenario_name) {
    params.validate();
    config.validate();
    check_times(times);
    if (!std::isfinite(initial.congestion)) throw ValidationError("initial.congestion", "must be finite");
    if (!std::isfinite(initial.adoption)) throw ValidationError("initial.adoption", "must be finite");

    Trajectory traj = make_trajectory(times, params, config, std::move(scenario_name));
    if (config.method == Method::FixedRk4) {
        run_fixed(initial, times, config, traj);
    } else {
        run_adaptive(initial, times, config, traj);
    }
    return traj;
}

MobilityState evaluate_dense(std::span<const DenseSegment> segments, double t) {
    if (segments.empty()) throw RangeError("no dense output available");
    if (!(t >= segments.front().t_left && t <= segments.back().t_right)) {
        throw RangeError("t=" + format_double(t) + " outside dense span [" + format_double(segments.front().t_left) +
                         ", " + format_double(segments.back().t_right) + "]");
    }
    auto it = std::lower_bound(segments.begin(), segments.end(), t,
                               [](const DenseSegment& s, double v) { return s.t_right < v; });
    if (it == segments.end()) it = std::prev(segments.end());
    return it->evaluate(t);
}

} // namespace mobisim
