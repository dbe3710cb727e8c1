#include "mobisim/scenario.hpp"

#include <cmath>

#include "mobisim/error.hpp"

namespace mobisim {

namespace {

ScenarioSpec make_preset(std::string name, std::string description, double k1, double k2, double k3, double k4) {
    ScenarioSpec s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.params = ModelParams{k1, k2, k3, k4, 100.0};
    return s;
}

} // namespace

void ScenarioSpec::validate() const {
    if (name.empty()) throw ValidationError("name", "must be non-empty");
    params.validate();
    if (!std::isfinite(initial.congestion)) throw ValidationError("initial.congestion", "must be finite");
    if (!std::isfinite(initial.adoption)) throw ValidationError("initial.adoption", "must be finite");
    horizon.validate();
    integrator.validate();
}

std::vector<ScenarioSpec> presets() {
    return {
        make_preset("scenario-1", "High AI adoption with strong regulatory support", 0.05, 0.3, 0.1, 0.01),
        make_preset("scenario-2", "High AI adoption with weak regulatory support", 0.03, 1.2, 0.08, 0.02),
        make_preset("scenario-3", "Low AI adoption with strong regulatory support", 0.02, 0.4, 0.03, 0.02),
        make_preset("scenario-4", "Low AI adoption with weak regulatory support", 0.01, 1.5, 0.02, 0.03),
    };
}

ScenarioSpec preset(std::string_view name) {
    for (auto& s : presets()) {
        if (s.name == name) return s;
    }
    throw ValidationError("scenario", "unknown preset \"" + std::string(name) +
                                          "\"; available presets: scenario-1, scenario-2, scenario-3, scenario-4");
}

Trajectory simulate(const ScenarioSpec& spec) {
    spec.validate();
    return integrate(spec.initial, spec.params, spec.horizon, spec.integrator, spec.name);
}

} // namespace mobisim
