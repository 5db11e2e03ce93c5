#pragma once
// Closed-form quantities from the regret and safety analysis, evaluated as
// diagnostics for a concrete scenario.

#include <optional>
#include <vector>

#include "dosefind/dose_model.hpp"
#include "dosefind/scenario.hpp"

namespace dosefind {

/// Least-squares fit of p_k(a) to the scenario's true toxicities over the domain.
double fit_reference_parameter(const Scenario& scenario,
                               const ParameterDomain& domain = kDefaultDomain);

struct BoundInputs {
    double a_star = 0.0;
    std::vector<double> gaps;  // Delta_k = |a* - log(theta) / log(b_k)|
    double Delta = 0.0;        // min_k Delta_k
    double epsilon = 0.0;
    double Q = 0.0;            // max_i |q_i - q_{k*}|
    int M = 0;                 // safe doses
    double t1 = 0.0;
    double delta = 0.0;
};

struct TheoryBounds {
    BoundInputs inputs;
    double regret = 0.0;        // SEEDA regret upper bound at n
    double unsafe = 0.0;        // unsafe-allocation bound, t1 + (K - M) / (2 eps^2)
    double delta1 = 0.0;        // 2K exp(-2 (Delta_M / (C1_bar K))^(2 gamma1) n)
    std::optional<double> plateau_regret;  // c log n / (q* - q_{N-1}); needs a plateau
    double misrecommend = 0.0;  // 3 / n^c + delta1
};

/// t1 = (1/2) (C1_bar K / |Delta - eps|)^(2 / gamma1_bar) log(2K / delta); infinite
/// when Delta = eps.
double lemma_t1(double Delta, double epsilon, int K, double delta, const RegularityParams& params);

TheoryBounds theory_bounds(const Scenario& scenario, const RegularityParams& params, double c,
                           double delta, double epsilon, int n,
                           const ParameterDomain& domain = kDefaultDomain);

}  // namespace dosefind
