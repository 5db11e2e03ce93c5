#include "dosefind/catalog.hpp"

#include <cmath>

#include "dosefind/errors.hpp"

namespace dosefind {

const std::vector<Scenario>& builtin_scenarios() {
    static const std::vector<Scenario> catalog = [] {
        std::vector<Scenario> c;
        c.push_back(Scenario::make("main-setting", {0.01, 0.05, 0.15, 0.20, 0.45, 0.60},
                                   {0.10, 0.35, 0.60, 0.60, 0.60, 0.60}));
        c.push_back(Scenario::make("setting-2", {0.10, 0.20, 0.25, 0.40, 0.50, 0.60},
                                   {0.30, 0.40, 0.50, 0.70, 0.70, 0.70}));
        c.push_back(Scenario::make("zang-1", {0.08, 0.12, 0.20, 0.30, 0.40},
                                   {0.20, 0.40, 0.60, 0.80, 0.55}));
        c.push_back(Scenario::make("zang-2", {0.01, 0.05, 0.10, 0.15, 0.30},
                                   {0.60, 0.80, 0.50, 0.40, 0.20}));
        c.push_back(Scenario::make("zang-3", {0.06, 0.08, 0.14, 0.20, 0.30},
                                   {0.20, 0.40, 0.60, 0.80, 0.55}));
        c.push_back(Scenario::make("zang-4", {0.05, 0.10, 0.25, 0.50, 0.60},
                                   {0.20, 0.40, 0.60, 0.80, 0.55}));
        c.push_back(Scenario::make("zang-5", {0.10, 0.20, 0.40, 0.50, 0.60},
                                   {0.10, 0.30, 0.50, 0.50, 0.50}));
        c.push_back(Scenario::make("zang-6", {0.01, 0.03, 0.05, 0.10, 0.20},
                                   {0.10, 0.30, 0.45, 0.60, 0.60}));
        c.push_back(Scenario::make("neurodeg", {0.01, 0.08, 0.30, 0.60, 0.80},
                                   {0.01, 0.35, 0.45, 0.52, 0.57}));
        c.push_back(Scenario::make("ibscovars", {0.01, 0.10, 0.30, 0.70, 0.95},
                                   {0.01, 0.20, 0.27, 0.33, 0.43}));
        c.push_back(Scenario::make("model-consistent", kDefaultPriorTox,
                                   {0.10, 0.35, 0.60, 0.60, 0.60, 0.60}));
        return c;
    }();
    return catalog;
}

std::optional<Scenario> find_scenario(std::string_view name) {
    for (const Scenario& s : builtin_scenarios())
        if (s.name == name) return s;
    return std::nullopt;
}

double emax_response(double dose, double E0, double Emax, double ED50) {
    if (std::isnan(dose) || dose < 0.0) throw DomainError("dose must be nonnegative");
    if (!(ED50 > 0.0)) throw DomainError("ED50 must be positive");
    if (std::isinf(dose)) return E0 + Emax;
    return E0 + Emax * dose / (ED50 + dose);
}

}  // namespace dosefind
