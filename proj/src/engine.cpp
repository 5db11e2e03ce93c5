#include "dosefind/engine.hpp"

#include <algorithm>
#include <exception>

#include "dosefind/errors.hpp"
#include "dosefind/metrics.hpp"

namespace dosefind {

Outcome sample_outcome(RngStream& rng, double q, double p) {
    Outcome o;
    o.efficacy = rng.bernoulli(q);
    o.toxicity = rng.bernoulli(p);
    return o;
}

void TrialOptions::validate() const {
    if (n_patients < 1) throw ValidationError("must be at least 1", "n");
    if (cohort_size < 1) throw ValidationError("must be at least 1", "cohort");
}

std::uint32_t TrialTrace::flags() const {
    std::uint32_t f = final_recommendation.flags;
    for (const CohortRecord& c : cohorts) f |= c.flags;
    return f;
}

StreamId trial_stream(std::uint64_t seed, std::uint64_t rep, const PolicyConfig& cfg) {
    return StreamId{seed, rep, stable_hash(cfg.display_name().c_str())};
}

TrialTrace run_trial(const Scenario& scenario, const PolicyConfig& cfg,
                     const TrialOptions& options, const StreamId& stream) {
    options.validate();
    PolicyConfig effective = cfg;
    effective.theta = scenario.theta;
    auto policy = make_policy(effective, scenario.grid);

    RngStream outcomes(stream, Substream::Outcomes);
    RngStream allocation(stream, Substream::Allocation);
    RngStream recommendation(stream, Substream::Recommendation);

    TrialTrace trace;
    trace.patients.reserve(static_cast<std::size_t>(options.n_patients));
    trace.cohorts.reserve(static_cast<std::size_t>(options.cohorts()));
    trace.checkpoints.reserve(static_cast<std::size_t>(options.cohorts()));

    std::vector<Outcome> cohort;
    int treated = 0;
    while (treated < options.n_patients) {
        const int size = std::min(options.cohort_size, options.n_patients - treated);
        PolicyDecision decision = policy->select(allocation);
        if (size < options.cohort_size) decision.flags |= kFlagTruncatedCohort;
        const auto k = static_cast<std::size_t>(decision.dose);

        cohort.clear();
        for (int i = 0; i < size; ++i) {
            cohort.push_back(sample_outcome(outcomes, scenario.true_eff[k], scenario.true_tox[k]));
            trace.patients.push_back({decision.dose, cohort.back()});
        }
        policy->observe(decision.dose, cohort);
        treated += size;
        trace.cohorts.push_back(
            {decision.dose, size, decision.flags, decision.admissible_size, decision.leader});

        Recommendation interim = policy->recommend(recommendation);
        const TypeErrors errors = type_errors(interim.toxicity_estimates, scenario);
        trace.checkpoints.push_back(
            {treated, interim.dose, errors.type1, errors.type2, interim.flags});
        trace.final_recommendation = std::move(interim);
    }
    trace.allocations = policy->state().allocations;
    return trace;
}

namespace {

BatchResult empty_batch(const Scenario& scenario, const std::vector<PolicyConfig>& configs,
                        int replications, const TrialOptions& options, std::uint64_t seed) {
    if (replications < 1) throw ValidationError("must be at least 1", "reps");
    if (configs.empty()) throw ValidationError("at least one policy is required", "policy");
    options.validate();
    for (const PolicyConfig& cfg : configs) cfg.validate();
    BatchResult batch;
    batch.scenario = scenario;
    batch.options = options;
    batch.seed = seed;
    batch.replications = replications;
    batch.configs = configs;
    batch.traces.assign(configs.size(),
                        std::vector<TrialTrace>(static_cast<std::size_t>(replications)));
    return batch;
}

}  // namespace

BatchResult run_batch(const Scenario& scenario, const std::vector<PolicyConfig>& configs,
                      int replications, const TrialOptions& options, std::uint64_t seed) {
    BatchResult batch = empty_batch(scenario, configs, replications, options, seed);
    const long total = static_cast<long>(configs.size()) * replications;
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (long job = 0; job < total; ++job) {
        const auto p = static_cast<std::size_t>(job / replications);
        const auto r = static_cast<std::size_t>(job % replications);
        try {
            batch.traces[p][r] =
                run_trial(scenario, configs[p], options, trial_stream(seed, r, configs[p]));
        } catch (...) {
#pragma omp critical(dosefind_batch_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return batch;
}

BatchResult run_batch_serial(const Scenario& scenario, const std::vector<PolicyConfig>& configs,
                             int replications, const TrialOptions& options, std::uint64_t seed) {
    BatchResult batch = empty_batch(scenario, configs, replications, options, seed);
    for (std::size_t p = 0; p < configs.size(); ++p)
        for (std::size_t r = 0; r < static_cast<std::size_t>(replications); ++r)
            batch.traces[p][r] =
                run_trial(scenario, configs[p], options, trial_stream(seed, r, configs[p]));
    return batch;
}

}  // namespace dosefind
