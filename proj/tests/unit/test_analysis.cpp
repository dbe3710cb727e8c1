#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "mobisim/analysis.hpp"
#include "mobisim/error.hpp"
#include "mobisim/scenario.hpp"

using namespace mobisim;

namespace {

const Metric kFinalC{Metric::Kind::FinalCongestion, 0.0};

} // namespace

TEST_CASE("linspace") {
    const auto v = linspace(0.01, 0.05, 5);
    REQUIRE(v.size() == 5);
    CHECK(v.front() == 0.01);
    CHECK(v.back() == 0.05);
    CHECK(v[2] == doctest::Approx(0.03));
    CHECK(linspace(2.0, 2.0, 1) == std::vector<double>{2.0});
    CHECK_THROWS_AS(linspace(0, 1, 0), ValidationError);
}

TEST_CASE("parameter names") {
    CHECK(parse_sweep_parameter("k3") == SweepParameter::K3);
    CHECK(parse_sweep_parameter("A_MAX") == SweepParameter::AMax);
    CHECK(parse_sweep_parameter("c0") == SweepParameter::C0);
    CHECK_THROWS_AS(parse_sweep_parameter("k5"), ValidationError);
    CHECK(parse_metric("final-adoption").kind == Metric::Kind::FinalAdoption);
    CHECK(parse_metric("time-to-adoption", 60).level == 60);
    CHECK_THROWS_AS(parse_metric("median"), ValidationError);

    ScenarioSpec s = preset("scenario-2");
    for (auto p : {SweepParameter::K1, SweepParameter::K2, SweepParameter::K3, SweepParameter::K4,
                   SweepParameter::AMax, SweepParameter::C0, SweepParameter::A0}) {
        set_parameter(s, p, 0.125);
        CHECK(get_parameter(s, p) == 0.125);
    }
}

TEST_CASE("more adoption growth means less final congestion") {
    const ScenarioSpec base = preset("scenario-3");
    SweepSpec spec{SweepParameter::K3, linspace(0.01, 0.05, 5), kFinalC};
    const auto rows = sweep(base, spec, 1);
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].status == SweepRow::Status::Ok);
        CHECK(rows[i].value == spec.values[i]);
        if (i > 0) CHECK(rows[i].metric < rows[i - 1].metric);
    }
}

TEST_CASE("more inflow means more final congestion") {
    const ScenarioSpec base = preset("scenario-1");
    SweepSpec spec{SweepParameter::K2, {0.1, 0.3, 0.9, 2.7}, kFinalC};
    const auto rows = sweep(base, spec, 2);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].metric > rows[i - 1].metric);
}

TEST_CASE("a single-value sweep equals a direct run") {
    const ScenarioSpec base = preset("scenario-2");
    const auto rows = sweep(base, SweepSpec{SweepParameter::K1, {base.params.k1}, kFinalC});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].metric == simulate(base).states.back().congestion);
}

TEST_CASE("sweeps leave the base untouched and do not depend on thread count") {
    const ScenarioSpec base = preset("scenario-4");
    const ScenarioSpec copy = base;
    const SweepSpec spec{SweepParameter::A0, linspace(1, 50, 7), Metric{Metric::Kind::TimeToAdoptionLevel, 50}};
    const auto one = sweep(base, spec, 1);
    const auto four = sweep(base, spec, 4);
    CHECK(base == copy);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].status == four[i].status);
        CHECK(one[i].metric == four[i].metric);
    }
}

TEST_CASE("sweep rows record failures and missing events") {
    const ScenarioSpec base = preset("scenario-1");
    SUBCASE("invalid value") {
        const auto rows = sweep(base, SweepSpec{SweepParameter::K1, {0.05, -1.0}, kFinalC});
        CHECK(rows[0].status == SweepRow::Status::Ok);
        CHECK(rows[1].status == SweepRow::Status::Failed);
        CHECK_FALSE(rows[1].message.empty());
    }
    SUBCASE("level never reached") {
        const auto rows =
            sweep(base, SweepSpec{SweepParameter::AMax, {50.0, 100.0}, Metric{Metric::Kind::TimeToAdoptionLevel, 75}});
        CHECK(rows[0].status == SweepRow::Status::NoEvent);
        CHECK(rows[1].status == SweepRow::Status::Ok);
    }
}

TEST_CASE("metrics") {
    const ScenarioSpec s = preset("scenario-1");
    const Trajectory tr = simulate(s);
    CHECK(*metric_value(tr, kFinalC) == tr.states.back().congestion);
    CHECK(*metric_value(tr, Metric{Metric::Kind::FinalAdoption, 0}) == tr.states.back().adoption);
    CHECK(*metric_value(tr, Metric{Metric::Kind::PeakCongestion, 0}) == 100.0);
    CHECK(*metric_value(tr, Metric{Metric::Kind::MinCongestion, 0}) <= tr.states.back().congestion);
    const auto t60 = metric_value(tr, Metric{Metric::Kind::TimeToAdoptionLevel, 60});
    REQUIRE(t60);
    CHECK(*t60 > 7.5);
    CHECK(*t60 < 9.5);
    CHECK_FALSE(metric_value(tr, Metric{Metric::Kind::TimeToAdoptionLevel, 150}));
}

TEST_CASE("sensitivity signs") {
    const ScenarioSpec base = preset("scenario-1");
    const SweepParameter ps[] = {SweepParameter::K1, SweepParameter::K2};
    const auto rows = sensitivity(base, kFinalC, ps, 1e-4, 2);
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].derivative);
    REQUIRE(rows[1].derivative);
    CHECK(*rows[0].derivative < 0);
    CHECK(*rows[1].derivative > 0);
    // Near equilibrium C ~ k2 / (k1 a_max): dC/dk2 ~ 1 / (k1 a_max) = 0.2
    CHECK(*rows[1].derivative == doctest::Approx(0.2).epsilon(0.02));
}

TEST_CASE("a_max has no influence when adoption dynamics are switched off") {
    ScenarioSpec base = preset("scenario-2");
    base.params.k3 = 0.0;
    base.params.k4 = 0.0;
    const SweepParameter ps[] = {SweepParameter::AMax};
    const auto rows = sensitivity(base, kFinalC, ps);
    REQUIRE(rows[0].derivative);
    CHECK(*rows[0].derivative == 0.0);
}

TEST_CASE("sensitivity is stable under step halving") {
    const ScenarioSpec base = preset("scenario-3");
    const SweepParameter ps[] = {SweepParameter::K1, SweepParameter::K2, SweepParameter::K3, SweepParameter::K4};
    const auto a = sensitivity(base, kFinalC, ps, 1e-4);
    const auto b = sensitivity(base, kFinalC, ps, 5e-5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].derivative);
        REQUIRE(b[i].derivative);
        CHECK(std::abs(*a[i].derivative - *b[i].derivative) < 0.05 * std::abs(*a[i].derivative));
    }
}

TEST_CASE("sensitivity falls back to a forward difference at the boundary") {
    ScenarioSpec base = preset("scenario-1");
    base.params.k4 = 0.0;
    const SweepParameter ps[] = {SweepParameter::K4};
    const auto rows = sensitivity(base, kFinalC, ps);
    REQUIRE(rows[0].derivative);
    CHECK(rows[0].step == doctest::Approx(1e-10));
    CHECK(*rows[0].derivative > 0);
}

TEST_CASE("sensitivity of a missing event is undefined") {
    const ScenarioSpec base = preset("scenario-1");
    const SweepParameter ps[] = {SweepParameter::K2};
    const auto rows = sensitivity(base, Metric{Metric::Kind::TimeToAdoptionLevel, 150}, ps);
    CHECK_FALSE(rows[0].derivative);
    CHECK_FALSE(rows[0].message.empty());
}

TEST_CASE("thread count from the environment") {
    ::setenv("MOBISIM_THREADS", "3", 1);
    CHECK(default_thread_count() == 3);
    ::setenv("MOBISIM_THREADS", "0", 1);
    CHECK_THROWS_AS(default_thread_count(), ValidationError);
    ::setenv("MOBISIM_THREADS", "two", 1);
    CHECK_THROWS_AS(default_thread_count(), ValidationError);
    ::unsetenv("MOBISIM_THREADS");
    CHECK(default_thread_count() >= 1);
}
