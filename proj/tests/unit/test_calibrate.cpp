#include <cmath>
#include <random>

#include "doctest.h"
#include "mobisim/analysis.hpp"
#include "mobisim/error.hpp"
#include "mobisim/scenario.hpp"
#include "oracles.hpp"

using namespace mobisim;

namespace {

const std::vector<ParamId> kAllK{ParamId::K1, ParamId::K2, ParamId::K3, ParamId::K4};

CalibrationProblem synthetic(const std::string& name, double horizon = 100.0, int points = 21) {
    ScenarioSpec spec = preset(name);
    spec.horizon = Horizon{0.0, horizon, points};
    const Trajectory tr = simulate(spec);
    CalibrationProblem p;
    p.observations = observations_from(tr);
    p.free = kAllK;
    p.initial_guess = spec.params;
    p.initial = spec.initial;
    p.t0 = 0.0;
    p.integrator = spec.integrator;
    return p;
}

ModelParams scaled(ModelParams p, double f1, double f2, double f3, double f4) {
    p.k1 *= f1;
    p.k2 *= f2;
    p.k3 *= f3;
    p.k4 *= f4;
    return p;
}

} // namespace

TEST_CASE("round trip from 1.5x the true parameters") {
    CalibrationProblem prob = synthetic("scenario-2");
    const ModelParams truth = prob.initial_guess;
    prob.initial_guess = scaled(truth, 1.5, 1.5, 1.5, 1.5);
    const CalibrationResult r = calibrate(prob);
    CHECK(r.converged);
    CHECK(oracle::rel_err(r.params.k1, truth.k1) < 0.01);
    CHECK(oracle::rel_err(r.params.k2, truth.k2) < 0.01);
    CHECK(oracle::rel_err(r.params.k3, truth.k3) < 0.01);
    CHECK(oracle::rel_err(r.params.k4, truth.k4) < 0.01);
    CHECK(r.params.a_max == truth.a_max);
    CHECK(r.objective < 1e-8);
    CHECK(r.evaluations >= r.iterations);
}

TEST_CASE("starting at the truth stays there") {
    const CalibrationProblem prob = synthetic("scenario-1");
    CHECK(calibration_objective(prob, prob.initial_guess) == 0.0);
    const CalibrationResult r = calibrate(prob);
    CHECK(r.converged);
    CHECK(r.objective < 1e-12);
    CHECK(oracle::rel_err(r.params.k2, prob.initial_guess.k2) < 1e-6);
}

TEST_CASE("fixed parameters are not touched") {
    CalibrationProblem prob = synthetic("scenario-3");
    const ModelParams truth = prob.initial_guess;
    prob.free = {ParamId::K2, ParamId::K3};
    prob.initial_guess = scaled(truth, 1.0, 1.3, 0.8, 1.0);
    const CalibrationResult r = calibrate(prob);
    CHECK(r.params.k1 == truth.k1);
    CHECK(r.params.k4 == truth.k4);
    CHECK(oracle::rel_err(r.params.k2, truth.k2) < 1e-3);
    CHECK(oracle::rel_err(r.params.k3, truth.k3) < 1e-3);
}

TEST_CASE("ill-posed problems are rejected") {
    CalibrationProblem prob = synthetic("scenario-1");
    SUBCASE("too few observations") {
        prob.observations.resize(1);
        CHECK_THROWS_AS(calibrate(prob), CalibrationError);
    }
    SUBCASE("non-positive guess") {
        prob.initial_guess.k3 = 0.0;
        CHECK_THROWS_AS(calibrate(prob), CalibrationError);
    }
    SUBCASE("no free parameters") {
        prob.free.clear();
        CHECK_THROWS_AS(calibrate(prob), CalibrationError);
    }
    SUBCASE("unordered observations") {
        std::swap(prob.observations[2], prob.observations[3]);
        CHECK_THROWS_AS(calibrate(prob), CalibrationError);
    }
}

TEST_CASE("a start where every simplex vertex fails") {
    CalibrationProblem prob = synthetic("scenario-1");
    prob.integrator.max_steps = 2;
    CHECK(std::isinf(calibration_objective(prob, prob.initial_guess)));
    CHECK_THROWS_AS(calibrate(prob), CalibrationStartError);
}

TEST_CASE("random starts within a factor of two mostly succeed") {
    CalibrationProblem base = synthetic("scenario-2");
    const ModelParams truth = base.initial_guess;
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> logf(std::log(0.5), std::log(2.0));
    int ok = 0;
    for (int i = 0; i < 10; ++i) {
        CalibrationProblem prob = base;
        prob.initial_guess = scaled(truth, std::exp(logf(rng)), std::exp(logf(rng)), std::exp(logf(rng)),
                                    std::exp(logf(rng)));
        const CalibrationResult r = calibrate(prob);
        const bool within = oracle::rel_err(r.params.k1, truth.k1) < 0.01 &&
                            oracle::rel_err(r.params.k2, truth.k2) < 0.01 &&
                            oracle::rel_err(r.params.k3, truth.k3) < 0.01 &&
                            oracle::rel_err(r.params.k4, truth.k4) < 0.01;
        ok += within ? 1 : 0;
    }
    CHECK(ok >= 8);
}

TEST_CASE("parameter ids") {
    CHECK(parse_param_id("k4") == ParamId::K4);
    CHECK(parse_param_id("a_max") == ParamId::AMax);
    CHECK_THROWS_AS(parse_param_id("k0"), ValidationError);
    ModelParams p;
    set_param(p, ParamId::K3, 0.7);
    CHECK(get_param(p, ParamId::K3) == 0.7);
    CHECK(to_string(ParamId::K1) == "k1");
}
