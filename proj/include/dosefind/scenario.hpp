#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dosefind/dose_model.hpp"

namespace dosefind {

/// Prior toxicity and efficacy guesses shared by the model-based designs.
inline const std::vector<double> kDefaultPriorTox{0.02, 0.06, 0.12, 0.20, 0.30, 0.40};
inline const std::vector<double> kDefaultPriorEff{0.12, 0.20, 0.30, 0.40, 0.50, 0.59};

/// Lowest safe dose attaining the maximum efficacy among safe doses; -1 when
/// no dose satisfies p_k <= theta.
int optimal_dose(const std::vector<double>& true_tox, const std::vector<double>& true_eff,
                 double theta);

/// Start of the trailing run of equal efficacies when it spans at least two
/// doses, i.e. q_N = ... = q_K.
std::optional<int> plateau_start(const std::vector<double>& true_eff);

/// A simulation scenario. Indices are zero-based; `grid` is the skeleton solved
/// from `prior_tox` at the truncated prior mean.
struct Scenario {
    std::string name;
    double theta = 0.35;
    std::vector<double> true_tox;
    std::vector<double> true_eff;
    std::vector<double> prior_tox;
    std::vector<double> prior_eff;
    DoseGrid grid{std::vector<double>{0.0}};
    int optimal = 0;
    std::optional<int> plateau;

    int num_doses() const { return static_cast<int>(true_tox.size()); }
    /// M, the number of doses with p_k <= theta.
    int safe_count() const;
    double optimal_efficacy() const { return true_eff.at(static_cast<std::size_t>(optimal)); }

    /// Validates the lists and derives grid, optimal dose and plateau.
    /// Empty priors default to the leading K entries of the shared priors.
    static Scenario make(std::string name, std::vector<double> true_tox,
                         std::vector<double> true_eff, double theta = 0.35,
                         std::vector<double> prior_tox = {}, std::vector<double> prior_eff = {});

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

}  // namespace dosefind
