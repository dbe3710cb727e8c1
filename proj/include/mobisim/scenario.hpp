#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mobisim/integrate.hpp"
#include "mobisim/model.hpp"

namespace mobisim {

struct ScenarioSpec {
    std::string name;
    std::string description;
    ModelParams params;
    MobilityState initial{100.0, 10.0};
    Horizon horizon;
    IntegratorConfig integrator;

    /// Checks every nested invariant; throws ValidationError naming the field.
    void validate() const;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// The four preset futures: scenario-1 .. scenario-4.
std::vector<ScenarioSpec> presets();

/// Throws ValidationError listing the valid names when `name` is unknown.
ScenarioSpec preset(std::string_view name);

/// Integrates a scenario with its own settings.
Trajectory simulate(const ScenarioSpec& spec);

} // namespace mobisim
