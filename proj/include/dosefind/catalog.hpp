#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "dosefind/scenario.hpp"

namespace dosefind {

/// The built-in scenarios: main-setting, setting-2, zang-1..zang-6, neurodeg,
/// ibscovars, and model-consistent (true toxicities equal to the skeleton at the
/// reference parameter, used for the unsafe-allocation bound check).
const std::vector<Scenario>& builtin_scenarios();
std::optional<Scenario> find_scenario(std::string_view name);

/// Emax dose-response curve E0 + Emax * dose / (ED50 + dose).
struct EmaxModel {
    double E0 = 0.0;
    double Emax = 0.0;
    double ED50 = 1.0;
};

// Fitted coefficients for the two real-data scenarios. The mapping from
// response to a Bernoulli efficacy probability is not part of the model, so the
// catalog uses the tabulated probabilities and ships these for reference.
inline constexpr EmaxModel kNeurodegEmax{169.94, 12.95, 1.85};
inline constexpr EmaxModel kIbscovarsEmax{0.26, 0.68, 4.01};

double emax_response(double dose, double E0, double Emax, double ED50);
inline double emax_response(double dose, const EmaxModel& m) {
    return emax_response(dose, m.E0, m.Emax, m.ED50);
}

}  // namespace dosefind
