#include "dosefind/trial_state.hpp"

#include <cmath>

#include "dosefind/errors.hpp"

namespace dosefind {

TrialState::TrialState(int num_doses)
    : allocations(static_cast<std::size_t>(num_doses), 0),
      efficacy_successes(static_cast<std::size_t>(num_doses), 0),
      toxicity_events(static_cast<std::size_t>(num_doses), 0),
      leader_counts(static_cast<std::size_t>(num_doses), 0) {}

double TrialState::efficacy_mean(int k) const {
    const auto i = static_cast<std::size_t>(k);
    return allocations.at(i) > 0 ? static_cast<double>(efficacy_successes[i]) / allocations[i]
                                 : 0.0;
}

double TrialState::toxicity_mean(int k) const {
    const auto i = static_cast<std::size_t>(k);
    return allocations.at(i) > 0 ? static_cast<double>(toxicity_events[i]) / allocations[i] : 0.0;
}

std::vector<double> TrialState::efficacy_means() const {
    std::vector<double> out(allocations.size());
    for (int k = 0; k < num_doses(); ++k) out[static_cast<std::size_t>(k)] = efficacy_mean(k);
    return out;
}

std::vector<double> TrialState::toxicity_means() const {
    std::vector<double> out(allocations.size());
    for (int k = 0; k < num_doses(); ++k) out[static_cast<std::size_t>(k)] = toxicity_mean(k);
    return out;
}

int TrialState::first_unsampled() const {
    for (int k = 0; k < num_doses(); ++k)
        if (allocations[static_cast<std::size_t>(k)] == 0) return k;
    return -1;
}

void TrialState::record(int dose, std::span<const Outcome> cohort) {
    if (dose < 0 || dose >= num_doses()) throw ValidationError("dose index out of range", "dose");
    const auto i = static_cast<std::size_t>(dose);
    for (const Outcome& o : cohort) {
        ++allocations[i];
        efficacy_successes[i] += o.efficacy ? 1 : 0;
        toxicity_events[i] += o.toxicity ? 1 : 0;
    }
    patients += static_cast<int>(cohort.size());
}

std::string_view policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Seeda: return "seeda";
        case PolicyKind::SeedaPlateau: return "seeda-plateau";
        case PolicyKind::Ucb1: return "ucb1";
        case PolicyKind::KlUcb: return "kl-ucb";
        case PolicyKind::IndependentTs: return "independent-ts";
        case PolicyKind::Crm: return "crm";
        case PolicyKind::ThreePlusThree: return "3+3";
        case PolicyKind::Mcrm: return "mcrm";
        case PolicyKind::ParetoTs: return "pareto-ts";
    }
    return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
    for (PolicyKind kind : kAllPolicyKinds)
        if (policy_name(kind) == name) return kind;
    if (name == "ucb" || name == "ucb-1") return PolicyKind::Ucb1;
    if (name == "klucb") return PolicyKind::KlUcb;
    if (name == "ts") return PolicyKind::IndependentTs;
    if (name == "three-plus-three") return PolicyKind::ThreePlusThree;
    if (name == "multi-obj") return PolicyKind::ParetoTs;
    return std::nullopt;
}

std::string_view rule_name(RecommendationRule rule) {
    return rule == RecommendationRule::Model ? "model" : "empirical";
}

std::optional<RecommendationRule> parse_recommendation_rule(std::string_view name) {
    if (name == "model") return RecommendationRule::Model;
    if (name == "empirical") return RecommendationRule::Empirical;
    return std::nullopt;
}

bool uses_forced_initialization(PolicyKind kind) {
    return kind == PolicyKind::Seeda || kind == PolicyKind::SeedaPlateau ||
           kind == PolicyKind::Ucb1 || kind == PolicyKind::KlUcb;
}

bool is_randomized(PolicyKind kind) {
    return kind == PolicyKind::IndependentTs || kind == PolicyKind::ParetoTs;
}

std::string PolicyConfig::display_name() const {
    return label.empty() ? std::string(policy_name(kind)) : label;
}

void PolicyConfig::validate() const {
    if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("must lie in (0,1)", "theta");
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("must be positive", "c");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("must lie in (0,1)", "delta");
    if (eta < 1) throw ValidationError("must be a positive integer", "eta");
    if (!(mcrm_bands.under > 0.0 && mcrm_bands.under < mcrm_bands.targeted &&
          mcrm_bands.targeted < mcrm_bands.excessive && mcrm_bands.excessive < 1.0))
        throw ValidationError("band boundaries must partition (0,1]", "mcrm_bands");
    if (!(mcrm_p_threshold > 0.0 && mcrm_p_threshold < 1.0))
        throw ValidationError("must lie in (0,1)", "mcrm_p_threshold");
    if (!(crm_prior_rate > 0.0)) throw ValidationError("must be positive", "crm_prior_rate");
    if (!(domain.lower > 0.0 && domain.upper > domain.lower))
        throw ValidationError("must be a positive interval", "domain");
    if (regularity) regularity->validate();
}

RegularityParams default_regularity() {
    return RegularityParams::from_radius(kDefaultRadiusConstant, 2.0 / 3.0);
}

std::vector<std::string> flag_names(std::uint32_t flags) {
    static constexpr std::pair<std::uint32_t, const char*> kNames[] = {
        {kFlagForcedInit, "forced-init"},
        {kFlagEmptyAdmissible, "empty-admissible"},
        {kFlagNoSafeDose, "no-safe-dose"},
        {kFlagPosteriorDegenerate, "posterior-degenerate"},
        {kFlagCapUnmet, "cap-unmet"},
        {kFlagStopped, "stopped"},
        {kFlagTruncatedCohort, "truncated-cohort"},
        {kFlagDoseOverride, "dose-override"},
    };
    std::vector<std::string> out;
    for (auto [bit, name] : kNames)
        if (flags & bit) out.emplace_back(name);
    return out;
}

}  // namespace dosefind
