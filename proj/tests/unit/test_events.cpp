#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "mobisim/analysis.hpp"
#include "mobisim/error.hpp"
#include "mobisim/scenario.hpp"
#include "oracles.hpp"

using namespace mobisim;

namespace {

Trajectory run(const std::string& name, Method m) {
    ScenarioSpec spec = preset(name);
    spec.integrator.method = m;
    return simulate(spec);
}

EventSpec adoption_at(double level, Which which = Which::All, Direction dir = Direction::Any) {
    return EventSpec{Variable::Adoption, level, dir, which};
}

} // namespace

TEST_CASE("scenario 1 crosses 60% adoption between 7.5 and 9.5") {
    for (Method m : {Method::FixedRk4, Method::AdaptiveRk45}) {
        const Trajectory tr = run("scenario-1", m);
        const auto hits = find_events(tr, adoption_at(60.0));
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].t > 7.5);
        CHECK(hits[0].t < 9.5);
        CHECK(hits[0].direction == Direction::Upward);
        CHECK(std::abs(hits[0].t - oracle::kReference[0].crossings[2]) < 1e-6);
    }
}

TEST_CASE("crossing times match the reference for every preset and level") {
    const double levels[4] = {30, 50, 60, 75};
    for (std::size_t i = 0; i < 4; ++i) {
        for (Method m : {Method::FixedRk4, Method::AdaptiveRk45}) {
            const Trajectory tr = run("scenario-" + std::to_string(i + 1), m);
            for (std::size_t l = 0; l < 4; ++l) {
                const auto hits = find_events(tr, adoption_at(levels[l], Which::First, Direction::Upward));
                REQUIRE(hits.size() == 1);
                CHECK(std::abs(hits[0].t - oracle::kReference[i].crossings[l]) < 1e-6);
                CHECK(std::abs(hits[0].state.adoption - levels[l]) <= event_value_tolerance(levels[l]));
            }
        }
    }
}

TEST_CASE("no crossing yields an empty result") {
    const Trajectory tr = run("scenario-1", Method::FixedRk4);
    CHECK(find_events(tr, adoption_at(99.995)).empty());
    CHECK(find_events(tr, adoption_at(200.0)).empty());
    CHECK(find_events(tr, adoption_at(60.0, Which::All, Direction::Downward)).empty());

    ScenarioSpec still = preset("scenario-1");
    still.params = ModelParams{0, 0, 0, 0, 100};
    const Trajectory flat = simulate(still);
    CHECK(find_events(flat, adoption_at(10.0)).empty());
    CHECK(find_events(flat, EventSpec{Variable::Congestion, 50.0, Direction::Any, Which::All}).empty());
}

TEST_CASE("congestion falls through levels downward") {
    const Trajectory tr = run("scenario-2", Method::AdaptiveRk45);
    const auto hits = find_events(tr, EventSpec{Variable::Congestion, 10.0, Direction::Any, Which::All});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].direction == Direction::Downward);
    CHECK(std::abs(hits[0].state.congestion - 10.0) <= event_value_tolerance(10.0));
}

TEST_CASE("First is the earliest of All") {
    // Scenario 4 adoption dips before rising, so a low level is crossed twice.
    const Trajectory tr = run("scenario-4", Method::FixedRk4);
    double lo = tr.states[0].adoption;
    for (const auto& s : tr.states) lo = std::min(lo, s.adoption);
    const double level = 0.5 * (lo + tr.states[0].adoption);
    const auto all = find_events(tr, adoption_at(level));
    REQUIRE(all.size() == 2);
    CHECK(all[0].direction == Direction::Downward);
    CHECK(all[1].direction == Direction::Upward);
    CHECK(all[0].t < all[1].t);
    const auto first = find_events(tr, adoption_at(level, Which::First));
    REQUIRE(first.size() == 1);
    CHECK(first[0].t == all[0].t);
    const auto up = find_events(tr, adoption_at(level, Which::All, Direction::Upward));
    REQUIRE(up.size() == 1);
    CHECK(up[0].t == all[1].t);
}

TEST_CASE("a sample exactly on the level is reported once at the sample time") {
    const Trajectory tr = run("scenario-1", Method::FixedRk4);
    const double level = tr.states[50].adoption;
    const auto hits = find_events(tr, adoption_at(level));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].t == tr.times[50]);
    CHECK(hits[0].state == tr.states[50]);
    CHECK(hits[0].direction == Direction::Upward);
}

TEST_CASE("the initial sample on the level is not a crossing") {
    const Trajectory tr = run("scenario-1", Method::FixedRk4);
    CHECK(find_events(tr, adoption_at(10.0)).empty());
}

TEST_CASE("evaluate_trajectory reproduces samples and interpolates") {
    for (Method m : {Method::FixedRk4, Method::AdaptiveRk45}) {
        const Trajectory tr = run("scenario-3", m);
        CHECK(evaluate_trajectory(tr, tr.times[17]) == tr.states[17]);
        const double t = 0.5 * (tr.times[17] + tr.times[18]);
        const MobilityState s = evaluate_trajectory(tr, t);
        CHECK(s.adoption > tr.states[17].adoption);
        CHECK(s.adoption < tr.states[18].adoption);
        CHECK_THROWS_AS(evaluate_trajectory(tr, 101.0), RangeError);
    }
}

TEST_CASE("unordered trajectories are rejected") {
    Trajectory tr = run("scenario-1", Method::FixedRk4);
    std::swap(tr.times[3], tr.times[4]);
    CHECK_THROWS_AS(find_events(tr, adoption_at(60.0)), ValidationError);
}

TEST_CASE("event value tolerance") {
    CHECK(event_value_tolerance(0.5) == 1e-9);
    CHECK(event_value_tolerance(-300.0) == doctest::Approx(3e-7));
}
