#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mobisim/model.hpp"

namespace mobisim {

enum class Method { FixedRk4, AdaptiveRk45 };

std::string_view to_string(Method m);
/// Accepts "fixed-rk4" and "adaptive-rk45". Throws ValidationError otherwise.
Method parse_method(std::string_view text);

struct IntegratorConfig {
    Method method = Method::FixedRk4;
    double step = 0.01;        ///< FixedRk4 only
    double rtol = 1e-8;        ///< AdaptiveRk45 only
    double atol = 1e-10;       ///< AdaptiveRk45 only
    std::int64_t max_steps = 10'000'000;

    void validate() const;

    friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

struct Horizon {
    double t0 = 0.0;
    double t_end = 100.0;
    std::int64_t output_points = 1001;

    void validate() const;

    /// t0 + i (t_end - t0) / (n - 1), with the last point set to t_end exactly.
    std::vector<double> grid() const;

    friend bool operator==(const Horizon&, const Horizon&) = default;
};

struct Diagnostics {
    bool adoption_went_negative = false;
    bool congestion_went_negative = false;
    std::int64_t steps = 0;           ///< accepted steps
    std::int64_t rejected_steps = 0;  ///< AdaptiveRk45 only

    friend bool operator==(const Diagnostics&, const Diagnostics&) = default;
};

/// Continuous extension of one accepted Dormand-Prince step.
struct DenseSegment {
    double t_left = 0.0;
    double t_right = 0.0;
    MobilityState left;
    MobilityState right;
    /// Per component (congestion, adoption): the four correction terms of the
    /// 4th-order continuous extension. Evaluation is
    ///   y(theta) = y0 + theta (r1 + (1-theta) (r2 + theta (r3 + (1-theta) r4)))
    std::array<std::array<double, 4>, 2> coeffs{};

    /// Returns the stored endpoint states exactly at t_left and t_right.
    MobilityState evaluate(double t) const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<MobilityState> states;
    std::string scenario_name;
    ModelParams params;
    IntegratorConfig integrator;
    Diagnostics diagnostics;
    /// Populated by AdaptiveRk45 runs; empty for FixedRk4.
    std::vector<DenseSegment> dense;
};

/// One classical RK4 step. Throws NumericalError if any stage is non-finite.
MobilityState step_rk4(const MobilityState& state, double t, double h, const ModelParams& params);

/// Integrates over the horizon and samples the evenly spaced output grid.
Trajectory integrate(const MobilityState& initial, const ModelParams& params, const Horizon& horizon,
                     const IntegratorConfig& config, std::string scenario_name = {});

/// Integrates from times.front() and samples exactly at `times`, which must be
/// strictly increasing with at least two entries. FixedRk4 shortens steps to
/// land on every requested time; AdaptiveRk45 lands on the last time and
/// fills interior samples from the dense output.
Trajectory integrate_at(const MobilityState& initial, const ModelParams& params, std::span<const double> times,
                        const IntegratorConfig& config, std::string scenario_name = {});

/// State at t from a set of contiguous dense segments. Throws RangeError if
/// t is outside the covered span.
MobilityState evaluate_dense(std::span<const DenseSegment> segments, double t);

} // namespace mobisim
