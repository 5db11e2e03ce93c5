#pragma once
// The nine allocation designs. Each design is exposed twice: as free functions
// computing one decision from a state (the units the tests and oracles check),
// and as a Policy state machine driven by the trial engine and the live
// session service.

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dosefind/dose_model.hpp"
#include "dosefind/posterior.hpp"
#include "dosefind/rng.hpp"
#include "dosefind/trial_state.hpp"

namespace dosefind {

// ---------------------------------------------------------------------------
// Indices

/// q_hat + sqrt(c log t / N); +infinity when N = 0.
double ucb1_index(double q_hat, int N, int t, double c);

/// Bernoulli KL divergence with 0 log 0 = 0; +infinity when q leaves (0,1)
/// with p inside it.
double bernoulli_kl(double p, double q);

/// max{q in [q_hat, 1] : N kl(q_hat, q) <= log t} by bisection to 1e-9.
double klucb_index(double q_hat, int N, int t);

/// Lowest-index argmax over `candidates`; -1 when empty.
int argmax_lowest(std::span<const double> values, std::span<const int> candidates);

// ---------------------------------------------------------------------------
// SEEDA family

const RegularityParams& regularity_of(const PolicyConfig& cfg);

/// Model estimate a_hat(t), alpha(t) and the admissible prefix size.
struct SafetyView {
    ToxicityEstimate estimate;
    int admissible = 0;
};
SafetyView safety_view(const TrialState& state, const DoseGrid& grid, const PolicyConfig& cfg,
                       const RegularityParams& params);

PolicyDecision seeda_select(const TrialState& state, const DoseGrid& grid,
                            const PolicyConfig& cfg, const RegularityParams& params);

/// Highest dose with p_k(a_hat(n)) <= theta; dose 0 flagged when none.
Recommendation seeda_recommend(const TrialState& state, const DoseGrid& grid,
                               const PolicyConfig& cfg);

/// Increments the leader counter in `state`.
PolicyDecision plateau_select(TrialState& state, const DoseGrid& grid, const PolicyConfig& cfg,
                              const RegularityParams& params);

/// Turning-point estimate L1 over the final admissible prefix; K - 1 when none.
int plateau_turning_point(const TrialState& state, const DoseGrid& grid, const PolicyConfig& cfg,
                          const RegularityParams& params);

/// L2 under cfg.recommendation; toxicity estimates are p_k(a_hat) either way.
Recommendation seeda_family_recommend(const TrialState& state, const DoseGrid& grid,
                                      const PolicyConfig& cfg);

/// min(L1, L2) with L2 from seeda_family_recommend.
Recommendation plateau_recommend(const TrialState& state, const DoseGrid& grid,
                                 const PolicyConfig& cfg, const RegularityParams& params);

// ---------------------------------------------------------------------------
// Unconstrained bandits

PolicyDecision ucb1_select(const TrialState& state, double c);
PolicyDecision klucb_select(const TrialState& state);

/// argmax_{k : p_hat_k <= theta} q_hat_k, lowest index on ties.
Recommendation constrained_recommend(const TrialState& state, double theta);

// ---------------------------------------------------------------------------
// Thompson sampling designs

struct PosteriorDraw {
    std::vector<double> toxicity;
    std::vector<double> efficacy;
};

/// p~_k ~ Beta(S^p_k + 1, N_k - S^p_k + 1), q~_k ~ Beta(S^q_k + 1, N_k - S^q_k + 1).
PosteriorDraw draw_beta_posteriors(const TrialState& state, RngStream& rng);

PolicyDecision independent_ts_select(const TrialState& state, RngStream& rng);

/// Shared by both sampling designs: argmax_{p~ <= theta} q~ on a fresh draw.
Recommendation sampled_recommend(const TrialState& state, double theta, RngStream& rng);

/// Non-dominated doses: no other dose has p~ <= and q~ >= with one strict.
std::vector<int> pareto_front(std::span<const double> toxicity, std::span<const double> efficacy);

PolicyDecision pareto_ts_select(const TrialState& state, RngStream& rng);

// ---------------------------------------------------------------------------
// Posterior designs

/// argmin_k |theta - p_k(a_hat)| with a_hat the posterior mean.
PolicyDecision crm_select(const DoseGrid& grid, const PolicyConfig& cfg,
                          const ToxicityPosterior& posterior);
Recommendation crm_recommend(const DoseGrid& grid, const PolicyConfig& cfg,
                             const ToxicityPosterior& posterior);

struct BandMasses {
    std::vector<double> targeted;   // P^t_k
    std::vector<double> overdose;   // P^e_k, excessive + unacceptable
};
BandMasses mcrm_band_masses(const DoseGrid& grid, const McrmBands& bands,
                            const ToxicityPosterior& posterior);

/// argmax P^t subject to P^e <= cap; argmin P^e (flagged) when no dose qualifies.
PolicyDecision mcrm_select(const DoseGrid& grid, const PolicyConfig& cfg,
                           const ToxicityPosterior& posterior);

// ---------------------------------------------------------------------------
// Rule-based 3+3

class ThreePlusThree {
public:
    explicit ThreePlusThree(int num_doses) : num_doses_(num_doses) {}

    /// Dose for the next cohort; after stopping, the recommended dose.
    PolicyDecision step() const;
    void observe(int dose, int cohort_size, int toxicities);

    bool stopped() const { return stopped_; }
    /// Final recommendation once stopped; otherwise the last cleared dose.
    Recommendation recommendation() const;

private:
    int num_doses_;
    int current_ = 0;
    int cohorts_at_current_ = 0;
    int toxicities_at_current_ = 0;
    bool stopped_ = false;
    int recommended_ = 0;
    std::uint32_t stop_flags_ = kFlagNone;
};

// ---------------------------------------------------------------------------
// State machines

class Policy {
public:
    Policy(PolicyConfig cfg, DoseGrid grid);
    virtual ~Policy() = default;

    Policy(const Policy&) = default;
    Policy& operator=(const Policy&) = delete;

    /// Dose for the next cohort. May advance internal counters (leader tallies).
    virtual PolicyDecision select(RngStream& rng) = 0;
    /// The recommendation the design would make from the current state.
    virtual Recommendation recommend(RngStream& rng) const = 0;

    void observe(int dose, std::span<const Outcome> cohort);

    const TrialState& state() const { return state_; }
    const PolicyConfig& config() const { return cfg_; }
    const DoseGrid& grid() const { return grid_; }

    virtual std::unique_ptr<Policy> clone() const = 0;

protected:
    virtual void on_observe(int /*dose*/, std::span<const Outcome> /*cohort*/) {}

    PolicyConfig cfg_;
    DoseGrid grid_;
    TrialState state_;
};

/// Validates `cfg` against the grid and constructs the matching design.
std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg, const DoseGrid& grid);

}  // namespace dosefind
