#pragma once
// Per-trace statistics and their across-replication aggregates.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dosefind/engine.hpp"
#include "dosefind/scenario.hpp"

namespace dosefind {

struct TypeErrors {
    int type1 = 0;  // safe doses estimated unsafe
    int type2 = 0;  // unsafe doses estimated safe
};

/// Counts misclassified doses; an empty estimate vector yields (0, 0).
TypeErrors type_errors(std::span<const double> estimates, const Scenario& scenario);

/// R(t) = q* t - sum_{s<=t} q_{I(s)} for t = 1..n.
std::vector<double> regret_curve(const TrialTrace& trace, const Scenario& scenario);

/// (1/t) sum_{s<=t} q_{I(s)} for t = 1..n.
std::vector<double> efficacy_curve(const TrialTrace& trace, const Scenario& scenario);

struct SafetyStats {
    std::vector<char> violation;  // 1 iff (1/t) sum_{s<=t} p_{I(s)} > theta
    int unsafe_allocations = 0;
};
SafetyStats safety_stats(const TrialTrace& trace, const Scenario& scenario);

/// Per-policy aggregates. Percentages are in [0, 100]; curves are sampled at
/// the cohort boundaries listed in `checkpoints`.
struct PolicyReport {
    std::string policy;
    std::vector<double> rec_mean, rec_std;
    std::vector<double> alloc_mean, alloc_std;
    std::vector<int> checkpoints;
    std::vector<double> regret;              // mean R(t)
    std::vector<double> efficacy_per_patient;
    std::vector<double> violation_pct;       // 100 * mean violation indicator
    std::vector<double> type1, type2;        // mean counts at each checkpoint
    std::vector<double> accuracy;            // fraction recommending k*
    double unsafe_allocations = 0.0;         // mean count at n
    int no_safe_dose = 0;                    // replications ending with the flag

    friend bool operator==(const PolicyReport&, const PolicyReport&) = default;
};

struct MetricsReport {
    std::vector<PolicyReport> policies;

    const PolicyReport* find(std::string_view policy) const;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

PolicyReport summarize_policy(std::string policy, std::span<const TrialTrace> traces,
                              const Scenario& scenario);
MetricsReport summarize(const BatchResult& batch);

/// Smallest checkpoint with at least six patients at which the fraction of
/// replications recommending k* reaches `target`; nullopt when never reached.
std::optional<int> min_sample_size(std::span<const TrialTrace> traces, const Scenario& scenario,
                                   double target);
std::optional<int> min_sample_size(const PolicyReport& report, double target);

}  // namespace dosefind
