#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobisim/integrate.hpp"
#include "mobisim/scenario.hpp"

namespace mobisim {

// ---- threshold events ------------------------------------------------------

enum class Variable { Congestion, Adoption };
enum class Direction { Upward, Downward, Any };
enum class Which { First, All };

std::string_view to_string(Variable v);
std::string_view to_string(Direction d);

struct EventSpec {
    Variable variable = Variable::Adoption;
    double level = 0.0;
    Direction direction = Direction::Any;
    Which which = Which::All;
};

struct EventHit {
    double t = 0.0;
    MobilityState state;
    Direction direction = Direction::Upward;  ///< Upward or Downward only
};

/// Value tolerance a hit must meet: 1e-9 max(1, |level|).
double event_value_tolerance(double level);

/// Locates crossings of `spec.level` between consecutive samples and refines
/// each by bisection to 1e-9 (t_end - t0) in time. Adaptive trajectories are
/// refined on their dense output. Fixed-step trajectories re-integrate the
/// bracketing interval at step h/100 and bisect on the RK4 step from the
/// nearest fine point. A sample lying exactly on the level is reported once,
/// at the sample time. Throws ValidationError for unordered trajectories.
std::vector<EventHit> find_events(const Trajectory& traj, const EventSpec& spec);

/// State at t in the trajectory's span using the same local interpolant
/// find_events bisects on.
MobilityState evaluate_trajectory(const Trajectory& traj, double t);

// ---- metrics, sweeps, sensitivities -----------------------------------------

enum class SweepParameter { K1, K2, K3, K4, AMax, C0, A0 };

std::string_view to_string(SweepParameter p);
/// Accepts k1..k4, a_max, c0, a0 (case-insensitive).
SweepParameter parse_sweep_parameter(std::string_view text);

double get_parameter(const ScenarioSpec& spec, SweepParameter p);
void set_parameter(ScenarioSpec& spec, SweepParameter p, double value);

struct Metric {
    enum class Kind { FinalCongestion, FinalAdoption, TimeToAdoptionLevel, MinCongestion, PeakCongestion };
    Kind kind = Kind::FinalCongestion;
    double level = 0.0;  ///< TimeToAdoptionLevel only
};

std::string to_string(const Metric& m);
/// final-congestion, final-adoption, min-congestion, peak-congestion,
/// time-to-adoption (uses `level`).
Metric parse_metric(std::string_view text, double level = 0.0);

/// Metric of a trajectory; nullopt when TimeToAdoptionLevel never crosses upward.
std::optional<double> metric_value(const Trajectory& traj, const Metric& metric);

/// Fresh integration of `spec`, then metric_value.
std::optional<double> evaluate_metric(const ScenarioSpec& spec, const Metric& metric);

struct SweepSpec {
    SweepParameter parameter = SweepParameter::K1;
    std::vector<double> values;
    Metric metric;
};

struct SweepRow {
    enum class Status { Ok, NoEvent, Failed };
    double value = 0.0;
    Status status = Status::Ok;
    double metric = 0.0;  ///< valid when status == Ok
    std::string message;  ///< failure reason
};

/// One fresh integration per value, rows in input order. Failures are
/// recorded per row. Rows run on up to `threads` worker threads.
std::vector<SweepRow> sweep(const ScenarioSpec& base, const SweepSpec& spec, unsigned threads = 1);

/// `steps` evenly spaced values from `from` to `to` inclusive, last forced to `to`.
std::vector<double> linspace(double from, double to, std::int64_t steps);

struct SensitivityRow {
    SweepParameter parameter = SweepParameter::K1;
    double value = 0.0;
    double step = 0.0;
    std::optional<double> derivative;  ///< nullopt when the metric is undefined nearby
    std::string message;
};

/// Central differences with step rel_step * max(|p|, 1e-6). Falls back to a
/// forward difference when p - step would leave the parameter's valid range.
std::vector<SensitivityRow> sensitivity(const ScenarioSpec& base, const Metric& metric,
                                        std::span<const SweepParameter> parameters, double rel_step = 1e-4,
                                        unsigned threads = 1);

// ---- calibration -------------------------------------------------------------

enum class ParamId { K1, K2, K3, K4, AMax };

std::string_view to_string(ParamId p);
ParamId parse_param_id(std::string_view text);
double get_param(const ModelParams& p, ParamId id);
void set_param(ModelParams& p, ParamId id, double value);

struct Observation {
    double t = 0.0;
    double congestion = 0.0;
    double adoption = 0.0;
};

std::vector<Observation> observations_from(const Trajectory& traj);

struct CalibrationProblem {
    std::vector<Observation> observations;
    std::vector<ParamId> free;  ///< parameters fitted; others stay at initial_guess
    ModelParams initial_guess;
    MobilityState initial;      ///< state at t0
    double t0 = 0.0;
    IntegratorConfig integrator;
    std::int64_t max_iterations = 10'000;

    /// Throws CalibrationError when the problem is ill-posed.
    void validate() const;
};

struct CalibrationResult {
    ModelParams params;
    double objective = 0.0;
    std::int64_t iterations = 0;
    std::int64_t evaluations = 0;
    bool converged = false;
};

/// Sum over observations of squared congestion and adoption residuals.
/// Returns +inf if the integration fails.
double calibration_objective(const CalibrationProblem& problem, const ModelParams& params);

/// Nelder-Mead in log-parameter space (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5; initial simplex offsets 0.05). Converges when
/// the simplex diameter drops below 1e-10 or the objective spread below
/// 1e-14 (1 + best objective).
CalibrationResult calibrate(const CalibrationProblem& problem);

// ---- parallel helper ------------------------------------------------------------

/// MOBISIM_THREADS if set to an integer >= 1, else hardware concurrency.
unsigned default_thread_count();

} // namespace mobisim
