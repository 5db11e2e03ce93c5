#pragma once
// Monte Carlo trial engine. A trial is driven cohort by cohort: the policy picks
// a dose, outcomes are drawn from the scenario's true probabilities, the policy
// ingests the cohort and an interim recommendation is recorded.
//
// Replication r of a policy draws from StreamId{seed, r, stable_hash(label)}, so
// a policy's traces do not depend on which other policies share the batch.

#include <cstdint>
#include <vector>

#include "dosefind/policies.hpp"
#include "dosefind/rng.hpp"
#include "dosefind/scenario.hpp"

namespace dosefind {

/// X ~ Bernoulli(q) then Y ~ Bernoulli(p), two consecutive draws.
Outcome sample_outcome(RngStream& rng, double q, double p);

struct TrialOptions {
    int n_patients = 300;
    int cohort_size = 3;

    void validate() const;
    int cohorts() const { return (n_patients + cohort_size - 1) / cohort_size; }
};

struct PatientRecord {
    int dose = 0;
    Outcome outcome;

    friend bool operator==(const PatientRecord&, const PatientRecord&) = default;
};

/// The policy's decision for one cohort, kept for diagnostics.
struct CohortRecord {
    int dose = 0;
    int size = 0;
    std::uint32_t flags = kFlagNone;
    int admissible_size = -1;
    int leader = -1;

    friend bool operator==(const CohortRecord&, const CohortRecord&) = default;
};

/// Interim recommendation after a cohort boundary.
struct Checkpoint {
    int patients = 0;
    int recommended = 0;
    int type1 = 0;
    int type2 = 0;
    std::uint32_t flags = kFlagNone;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct TrialTrace {
    std::vector<PatientRecord> patients;
    std::vector<CohortRecord> cohorts;
    std::vector<Checkpoint> checkpoints;
    Recommendation final_recommendation;
    std::vector<int> allocations;  // N_k(n)

    int n() const { return static_cast<int>(patients.size()); }
    std::uint32_t flags() const;

    friend bool operator==(const TrialTrace&, const TrialTrace&) = default;
};

/// Stream id used for replication `rep` of `cfg`.
StreamId trial_stream(std::uint64_t seed, std::uint64_t rep, const PolicyConfig& cfg);

TrialTrace run_trial(const Scenario& scenario, const PolicyConfig& cfg,
                     const TrialOptions& options, const StreamId& stream);

struct BatchResult {
    Scenario scenario;
    TrialOptions options;
    std::uint64_t seed = 0;
    int replications = 0;
    std::vector<PolicyConfig> configs;
    std::vector<std::vector<TrialTrace>> traces;  // [policy][replication]
};

/// Replications run in parallel with OpenMP.
BatchResult run_batch(const Scenario& scenario, const std::vector<PolicyConfig>& configs,
                      int replications, const TrialOptions& options, std::uint64_t seed);

/// Single-threaded reference with identical output.
BatchResult run_batch_serial(const Scenario& scenario, const std::vector<PolicyConfig>& configs,
                             int replications, const TrialOptions& options, std::uint64_t seed);

}  // namespace dosefind
