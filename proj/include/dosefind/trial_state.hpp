#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dosefind/dose_model.hpp"

namespace dosefind {

/// One patient's binary outcome: efficacy X and toxicity (DLT) Y.
struct Outcome {
    bool efficacy = false;
    bool toxicity = false;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Counts every allocation design reads and writes. Dose indices are zero-based.
struct TrialState {
    int patients = 0;
    std::vector<int> allocations;         // N_k
    std::vector<int> efficacy_successes;  // S^q_k
    std::vector<int> toxicity_events;     // S^p_k
    std::vector<int> leader_counts;       // l_k, SEEDA-Plateau only

    TrialState() = default;
    explicit TrialState(int num_doses);

    int num_doses() const noexcept { return static_cast<int>(allocations.size()); }
    double efficacy_mean(int k) const;  // 0 when N_k = 0
    double toxicity_mean(int k) const;  // 0 when N_k = 0
    std::vector<double> efficacy_means() const;
    std::vector<double> toxicity_means() const;
    int first_unsampled() const;  // -1 when every dose has been given

    void record(int dose, std::span<const Outcome> cohort);

    friend bool operator==(const TrialState&, const TrialState&) = default;
};

enum class PolicyKind : std::uint8_t {
    Seeda,
    SeedaPlateau,
    Ucb1,
    KlUcb,
    IndependentTs,
    Crm,
    ThreePlusThree,
    Mcrm,
    ParetoTs,
};

inline constexpr PolicyKind kAllPolicyKinds[] = {
    PolicyKind::Seeda,         PolicyKind::SeedaPlateau, PolicyKind::IndependentTs,
    PolicyKind::KlUcb,         PolicyKind::Ucb1,         PolicyKind::ThreePlusThree,
    PolicyKind::Crm,           PolicyKind::Mcrm,         PolicyKind::ParetoTs,
};

/// Canonical CLI/report names: seeda, seeda-plateau, ucb1, kl-ucb, independent-ts,
/// crm, 3+3, mcrm, pareto-ts.
std::string_view policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

/// Designs whose allocation index is undefined before every dose is tried.
bool uses_forced_initialization(PolicyKind kind);
bool is_randomized(PolicyKind kind);

struct McrmBands {
    double under = 0.20;     // (0, under]
    double targeted = 0.35;  // (under, targeted]
    double excessive = 0.60; // (targeted, excessive]; above is unacceptable

    friend bool operator==(const McrmBands&, const McrmBands&) = default;
};

/// Final-recommendation rule for SEEDA and the L2 estimate of SEEDA-Plateau.
/// Model: highest dose with p_k(a_hat) <= theta. Empirical: argmax of q_hat over
/// doses with p_hat <= theta, the rule the simulation tables apply to every design.
enum class RecommendationRule : std::uint8_t { Model, Empirical };

std::string_view rule_name(RecommendationRule rule);
std::optional<RecommendationRule> parse_recommendation_rule(std::string_view name);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::Seeda;
    std::string label;  // empty means policy_name(kind)
    double theta = 0.35;
    double c = 2.2;
    double delta = 0.05;
    int eta = 2;
    std::vector<double> prior_tox;
    std::vector<double> prior_eff;
    McrmBands mcrm_bands;
    double mcrm_p_threshold = 0.25;
    double crm_prior_rate = 0.5;
    ParameterDomain domain = kDefaultDomain;
    RecommendationRule recommendation = RecommendationRule::Model;
    RateEstimator rate = RateEstimator::Corrected;
    /// Radius constants for the model-based designs; see default_regularity().
    std::optional<RegularityParams> regularity;

    std::string display_name() const;
    /// Throws ValidationError naming the offending field.
    void validate() const;

    friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

/// C1_bar chosen so that alpha(t) covers |a_hat(t) - a*| with probability
/// 1 - delta along SEEDA trajectories on a model-consistent scenario.
inline constexpr double kDefaultRadiusConstant = 0.3;

/// Radius constants used by SEEDA and SEEDA-Plateau when a config leaves them unset.
RegularityParams default_regularity();

enum StepFlag : std::uint32_t {
    kFlagNone = 0,
    kFlagForcedInit = 1u << 0,
    kFlagEmptyAdmissible = 1u << 1,
    kFlagNoSafeDose = 1u << 2,
    kFlagPosteriorDegenerate = 1u << 3,
    kFlagCapUnmet = 1u << 4,
    kFlagStopped = 1u << 5,
    kFlagTruncatedCohort = 1u << 6,
    kFlagDoseOverride = 1u << 7,
};

std::vector<std::string> flag_names(std::uint32_t flags);

struct PolicyDecision {
    int dose = 0;
    std::uint32_t flags = kFlagNone;
    int admissible_size = -1;         // -1 when the design has no admissible set
    std::vector<double> index_values;  // per-dose index (UCB, KL-UCB, sample, ...)
    int leader = -1;
    double a_hat = 0.0;
    double alpha = 0.0;

    friend bool operator==(const PolicyDecision&, const PolicyDecision&) = default;
};

/// A final or interim recommendation together with the per-dose toxicity
/// estimates it was based on (used for type I/II error counts).
struct Recommendation {
    int dose = 0;
    std::uint32_t flags = kFlagNone;
    std::vector<double> toxicity_estimates;

    friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

}  // namespace dosefind
