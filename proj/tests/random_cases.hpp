#pragma once

// Random scenario and trajectory generators for serialization round trips.

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mobisim/integrate.hpp"
#include "mobisim/scenario.hpp"

namespace random_cases {

using namespace mobisim;

// Finite doubles spread over the whole exponent range, with random mantissa bits.
inline double any_finite(std::mt19937_64& rng) {
    while (true) {
        const double v = std::bit_cast<double>(rng());
        if (std::isfinite(v)) return v;
    }
}

inline double any_positive(std::mt19937_64& rng) { return std::abs(any_finite(rng)) + 0.0; }

inline double scaled_positive(std::mt19937_64& rng, double lo_exp, double hi_exp) {
    std::uniform_real_distribution<double> e(lo_exp, hi_exp);
    // Scramble the low mantissa bits so values are not short decimals.
    const double v = std::pow(10.0, e(rng));
    return std::bit_cast<double>(std::bit_cast<std::uint64_t>(v) ^ (rng() & 0xFFFFFu));
}

inline std::string any_name(std::mt19937_64& rng) {
    static const std::vector<std::string> pieces = {"a", "Z", "-", "_", " ", "\"", "\\", "/", "é", "漢", "\t", "9"};
    std::string s = "s";
    const auto n = rng() % 12;
    for (std::uint64_t i = 0; i < n; ++i) s += pieces[rng() % pieces.size()];
    return s;
}

inline ScenarioSpec random_spec(std::mt19937_64& rng) {
    ScenarioSpec s;
    s.name = any_name(rng);
    s.description = (rng() % 3 == 0) ? std::string() : any_name(rng);
    s.params = {any_positive(rng), any_positive(rng), any_positive(rng), any_positive(rng), 0.0};
    s.params.a_max = scaled_positive(rng, -3, 5);
    if (rng() % 5 == 0) s.params.k2 = 0.0;
    s.initial = {any_finite(rng), any_finite(rng)};
    s.horizon.t0 = any_finite(rng) * 1e-300;
    s.horizon.t_end = s.horizon.t0 + scaled_positive(rng, -2, 4);
    s.horizon.output_points = static_cast<std::int64_t>(2 + rng() % 100000);
    s.integrator.method = (rng() % 2) ? Method::FixedRk4 : Method::AdaptiveRk45;
    s.integrator.step = scaled_positive(rng, -6, 0);
    s.integrator.rtol = scaled_positive(rng, -13, -2);
    s.integrator.atol = scaled_positive(rng, -16, -2);
    s.integrator.max_steps = static_cast<std::int64_t>(1 + rng() % 100000000);
    s.validate();
    return s;
}

inline Trajectory random_trajectory(std::mt19937_64& rng) {
    Trajectory tr;
    const std::size_t n = 2 + rng() % 40;
    double t = ((rng() & 1) ? -1.0 : 1.0) * scaled_positive(rng, -300, 6);
    for (std::size_t i = 0; i < n; ++i) {
        tr.times.push_back(t);
        tr.states.push_back({any_finite(rng), any_finite(rng)});
        t += scaled_positive(rng, -3, 3);
    }
    return tr;
}

inline bool bit_equal(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

inline bool same_samples(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size() || a.states.size() != b.states.size()) return false;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        if (!bit_equal(a.times[i], b.times[i]) || !bit_equal(a.states[i].congestion, b.states[i].congestion) ||
            !bit_equal(a.states[i].adoption, b.states[i].adoption)) {
            return false;
        }
    }
    return true;
}

} // namespace random_cases
