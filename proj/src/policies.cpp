#include "dosefind/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/random/beta_distribution.hpp>

#include "dosefind/errors.hpp"

namespace dosefind {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> iota_indices(int n) {
    std::vector<int> out(static_cast<std::size_t>(std::max(n, 0)));
    std::iota(out.begin(), out.end(), 0);
    return out;
}

PolicyDecision forced_decision(int dose) {
    PolicyDecision d;
    d.dose = dose;
    d.flags = kFlagForcedInit;
    return d;
}

std::vector<double> model_toxicities(const DoseGrid& grid, double a) {
    std::vector<double> out(static_cast<std::size_t>(grid.size()));
    for (int k = 0; k < grid.size(); ++k) out[static_cast<std::size_t>(k)] = grid.toxicity(k, a);
    return out;
}

std::vector<double> ucb_values(const TrialState& state, double c) {
    std::vector<double> out(static_cast<std::size_t>(state.num_doses()));
    for (int k = 0; k < state.num_doses(); ++k)
        out[static_cast<std::size_t>(k)] = ucb1_index(
            state.efficacy_mean(k), state.allocations[static_cast<std::size_t>(k)],
            std::max(state.patients, 1), c);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Indices

double ucb1_index(double q_hat, int N, int t, double c) {
    if (N <= 0) return kInf;
    if (t < 1) throw DomainError("ucb1_index: t must be at least 1");
    return q_hat + std::sqrt(c * std::log(static_cast<double>(t)) / N);
}

double bernoulli_kl(double p, double q) {
    auto term = [](double x, double y) {
        if (x == 0.0) return 0.0;
        if (y == 0.0) return kInf;
        return x * std::log(x / y);
    };
    return term(p, q) + term(1.0 - p, 1.0 - q);
}

double klucb_index(double q_hat, int N, int t) {
    if (N <= 0) return kInf;
    if (t < 1) throw DomainError("klucb_index: t must be at least 1");
    if (q_hat >= 1.0) return 1.0;
    const double budget = std::log(static_cast<double>(t)) / N;
    if (budget <= 0.0) return q_hat;
    if (bernoulli_kl(q_hat, 1.0) <= budget) return 1.0;
    double lo = q_hat;
    double hi = 1.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (bernoulli_kl(q_hat, mid) <= budget)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

int argmax_lowest(std::span<const double> values, std::span<const int> candidates) {
    int best = -1;
    double best_value = -kInf;
    for (int k : candidates) {
        const double v = values[static_cast<std::size_t>(k)];
        if (best < 0 || v > best_value) {
            best = k;
            best_value = v;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// SEEDA family

const RegularityParams& regularity_of(const PolicyConfig& cfg) {
    static const RegularityParams fallback = default_regularity();
    return cfg.regularity ? *cfg.regularity : fallback;
}

SafetyView safety_view(const TrialState& state, const DoseGrid& grid, const PolicyConfig& cfg,
                       const RegularityParams& params) {
    SafetyView view;
    view.estimate =
        estimate_toxicity(state.allocations, state.toxicity_events, grid, cfg.domain, cfg.rate);
    view.estimate.alpha =
        confidence_radius(std::max(state.patients, 1), grid.size(), cfg.delta, params);
    view.admissible = admissible_prefix(view.estimate.a_hat, view.estimate.alpha, cfg.theta, grid);
    return view;
}

PolicyDecision seeda_select(const TrialState& state, const DoseGrid& grid,
                            const PolicyConfig& cfg, const RegularityParams& params) {
    if (const int u = state.first_unsampled(); u >= 0) return forced_decision(u);
    const SafetyView view = safety_view(state, grid, cfg, params);
    PolicyDecision d;
    d.a_hat = view.estimate.a_hat;
    d.alpha = view.estimate.alpha;
    d.admissible_size = view.admissible;
    d.index_values = ucb_values(state, cfg.c);
    if (view.admissible == 0) {
        d.dose = 0;
        d.flags |= kFlagEmptyAdmissible;
        return d;
    }
    const auto prefix = iota_indices(view.admissible);
    d.dose = argmax_lowest(d.index_values, prefix);
    return d;
}

Recommendation seeda_recommend(const TrialState& state, const DoseGrid& grid,
                               const PolicyConfig& cfg) {
    const ToxicityEstimate est =
        estimate_toxicity(state.allocations, state.toxicity_events, grid, cfg.domain, cfg.rate);
    Recommendation r;
    r.toxicity_estimates = model_toxicities(grid, est.a_hat);
    r.dose = -1;
    for (int k = 0; k < grid.size(); ++k)
        if (r.toxicity_estimates[static_cast<std::size_t>(k)] <= cfg.theta) r.dose = k;
    if (r.dose < 0) {
        r.dose = 0;
        r.flags |= kFlagNoSafeDose;
    }
    return r;
}

Recommendation seeda_family_recommend(const TrialState& state, const DoseGrid& grid,
                                      const PolicyConfig& cfg) {
    Recommendation r = seeda_recommend(state, grid, cfg);
    if (cfg.recommendation == RecommendationRule::Empirical) {
        const Recommendation e = constrained_recommend(state, cfg.theta);
        r.dose = e.dose;
        r.flags = e.flags;
    }
    return r;
}

PolicyDecision plateau_select(TrialState& state, const DoseGrid& grid, const PolicyConfig& cfg,
                              const RegularityParams& params) {
    if (const int u = state.first_unsampled(); u >= 0) return forced_decision(u);
    const SafetyView view = safety_view(state, grid, cfg, params);
    PolicyDecision d;
    d.a_hat = view.estimate.a_hat;
    d.alpha = view.estimate.alpha;
    d.admissible_size = view.admissible;
    d.index_values = ucb_values(state, cfg.c);
    if (view.admissible == 0) {
        d.dose = 0;
        d.flags |= kFlagEmptyAdmissible;
        return d;
    }
    const auto q_hat = state.efficacy_means();
    const int leader = argmax_lowest(q_hat, iota_indices(view.admissible));
    d.leader = leader;
    const int visits = ++state.leader_counts[static_cast<std::size_t>(leader)];
    if ((visits - 1) % (cfg.eta + 1) == 0) {
        d.dose = leader;
        return d;
    }
    std::vector<int> neighbourhood;
    for (int k = leader - 1; k <= leader + 1; ++k)
        if (k >= 0 && k < view.admissible) neighbourhood.push_back(k);
    d.dose = argmax_lowest(d.index_values, neighbourhood);
    return d;
}

int plateau_turning_point(const TrialState& state, const DoseGrid& grid, const PolicyConfig& cfg,
                          const RegularityParams& params) {
    const int K = grid.size();
    const SafetyView view = safety_view(state, grid, cfg, params);
    const double log_n = std::log(static_cast<double>(std::max(state.patients, 1)));
    auto width = [&](int k) {
        const int N = state.allocations[static_cast<std::size_t>(k)];
        return N > 0 ? std::sqrt(cfg.c * log_n / N) : kInf;
    };
    for (int m = 0; m < view.admissible && m + 1 < K; ++m) {
        const double here = state.efficacy_mean(m);
        const double next = state.efficacy_mean(m + 1);
        if (std::abs(here - next) <= width(m) + width(m + 1) && here <= next) return m;
    }
    return K - 1;
}

Recommendation plateau_recommend(const TrialState& state, const DoseGrid& grid,
                                 const PolicyConfig& cfg, const RegularityParams& params) {
    Recommendation r = seeda_family_recommend(state, grid, cfg);
    r.dose = std::min(r.dose, plateau_turning_point(state, grid, cfg, params));
    return r;
}

// ---------------------------------------------------------------------------
// Unconstrained bandits

PolicyDecision ucb1_select(const TrialState& state, double c) {
    if (const int u = state.first_unsampled(); u >= 0) return forced_decision(u);
    PolicyDecision d;
    d.index_values = ucb_values(state, c);
    d.dose = argmax_lowest(d.index_values, iota_indices(state.num_doses()));
    return d;
}

PolicyDecision klucb_select(const TrialState& state) {
    if (const int u = state.first_unsampled(); u >= 0) return forced_decision(u);
    PolicyDecision d;
    d.index_values.resize(static_cast<std::size_t>(state.num_doses()));
    for (int k = 0; k < state.num_doses(); ++k)
        d.index_values[static_cast<std::size_t>(k)] =
            klucb_index(state.efficacy_mean(k), state.allocations[static_cast<std::size_t>(k)],
                        std::max(state.patients, 1));
    d.dose = argmax_lowest(d.index_values, iota_indices(state.num_doses()));
    return d;
}

Recommendation constrained_recommend(const TrialState& state, double theta) {
    Recommendation r;
    r.toxicity_estimates = state.toxicity_means();
    std::vector<int> safe;
    for (int k = 0; k < state.num_doses(); ++k)
        if (r.toxicity_estimates[static_cast<std::size_t>(k)] <= theta) safe.push_back(k);
    if (safe.empty()) {
        r.dose = 0;
        r.flags |= kFlagNoSafeDose;
        return r;
    }
    r.dose = argmax_lowest(state.efficacy_means(), safe);
    return r;
}

// ---------------------------------------------------------------------------
// Thompson sampling designs

PosteriorDraw draw_beta_posteriors(const TrialState& state, RngStream& rng) {
    PosteriorDraw draw;
    const auto K = static_cast<std::size_t>(state.num_doses());
    draw.toxicity.resize(K);
    draw.efficacy.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const int n = state.allocations[k];
        const int sp = state.toxicity_events[k];
        const int sq = state.efficacy_successes[k];
        boost::random::beta_distribution<double> tox(sp + 1.0, n - sp + 1.0);
        boost::random::beta_distribution<double> eff(sq + 1.0, n - sq + 1.0);
        draw.toxicity[k] = tox(rng);
        draw.efficacy[k] = eff(rng);
    }
    return draw;
}

PolicyDecision independent_ts_select(const TrialState& state, RngStream& rng) {
    PosteriorDraw draw = draw_beta_posteriors(state, rng);
    PolicyDecision d;
    d.dose = argmax_lowest(draw.efficacy, iota_indices(state.num_doses()));
    d.index_values = std::move(draw.efficacy);
    return d;
}

Recommendation sampled_recommend(const TrialState& state, double theta, RngStream& rng) {
    PosteriorDraw draw = draw_beta_posteriors(state, rng);
    Recommendation r;
    std::vector<int> safe;
    for (int k = 0; k < state.num_doses(); ++k)
        if (draw.toxicity[static_cast<std::size_t>(k)] <= theta) safe.push_back(k);
    if (safe.empty()) {
        r.dose = 0;
        r.flags |= kFlagNoSafeDose;
    } else {
        r.dose = argmax_lowest(draw.efficacy, safe);
    }
    r.toxicity_estimates = std::move(draw.toxicity);
    return r;
}

std::vector<int> pareto_front(std::span<const double> toxicity, std::span<const double> efficacy) {
    const int K = static_cast<int>(toxicity.size());
    std::vector<int> order = iota_indices(K);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto ia = static_cast<std::size_t>(a);
        const auto ib = static_cast<std::size_t>(b);
        if (toxicity[ia] != toxicity[ib]) return toxicity[ia] < toxicity[ib];
        return efficacy[ia] > efficacy[ib];
    });
    // Sweep in increasing toxicity; equal-toxicity doses form a group whose
    // first member carries the group's best efficacy.
    std::vector<int> front;
    double best_lower = -kInf;
    std::size_t g = 0;
    while (g < order.size()) {
        const double tox = toxicity[static_cast<std::size_t>(order[g])];
        const double group_best = efficacy[static_cast<std::size_t>(order[g])];
        std::size_t end = g;
        while (end < order.size() && toxicity[static_cast<std::size_t>(order[end])] == tox) ++end;
        for (std::size_t i = g; i < end; ++i) {
            const double eff = efficacy[static_cast<std::size_t>(order[i])];
            if (!(best_lower >= eff) && !(group_best > eff)) front.push_back(order[i]);
        }
        best_lower = std::max(best_lower, group_best);
        g = end;
    }
    std::sort(front.begin(), front.end());
    return front;
}

PolicyDecision pareto_ts_select(const TrialState& state, RngStream& rng) {
    PosteriorDraw draw = draw_beta_posteriors(state, rng);
    const std::vector<int> front = pareto_front(draw.toxicity, draw.efficacy);
    PolicyDecision d;
    auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(front.size()));
    d.dose = front[std::min(pick, front.size() - 1)];
    d.index_values = std::move(draw.efficacy);
    return d;
}

// ---------------------------------------------------------------------------
// Posterior designs

PolicyDecision crm_select(const DoseGrid& grid, const PolicyConfig& cfg,
                          const ToxicityPosterior& posterior) {
    PolicyDecision d;
    d.a_hat = posterior.mean();
    d.index_values = model_toxicities(grid, d.a_hat);
    std::vector<double> distance(d.index_values.size());
    for (std::size_t k = 0; k < distance.size(); ++k)
        distance[k] = -std::abs(cfg.theta - d.index_values[k]);
    d.dose = argmax_lowest(distance, iota_indices(grid.size()));
    if (posterior.degenerate()) d.flags |= kFlagPosteriorDegenerate;
    return d;
}

Recommendation crm_recommend(const DoseGrid& grid, const PolicyConfig& cfg,
                             const ToxicityPosterior& posterior) {
    const PolicyDecision d = crm_select(grid, cfg, posterior);
    Recommendation r;
    r.dose = d.dose;
    r.flags = d.flags;
    r.toxicity_estimates = d.index_values;
    return r;
}

BandMasses mcrm_band_masses(const DoseGrid& grid, const McrmBands& bands,
                            const ToxicityPosterior& posterior) {
    BandMasses m;
    m.targeted.resize(static_cast<std::size_t>(grid.size()));
    m.overdose.resize(static_cast<std::size_t>(grid.size()));
    for (int k = 0; k < grid.size(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        m.targeted[i] = posterior.toxicity_band_mass(k, bands.under, bands.targeted);
        m.overdose[i] = posterior.toxicity_band_mass(k, bands.targeted, 1.0);
    }
    return m;
}

PolicyDecision mcrm_select(const DoseGrid& grid, const PolicyConfig& cfg,
                           const ToxicityPosterior& posterior) {
    const BandMasses masses = mcrm_band_masses(grid, cfg.mcrm_bands, posterior);
    PolicyDecision d;
    d.a_hat = posterior.mean();
    d.index_values = masses.targeted;
    std::vector<int> feasible;
    for (int k = 0; k < grid.size(); ++k)
        if (masses.overdose[static_cast<std::size_t>(k)] <= cfg.mcrm_p_threshold)
            feasible.push_back(k);
    if (feasible.empty()) {
        std::vector<double> negated(masses.overdose.size());
        for (std::size_t k = 0; k < negated.size(); ++k) negated[k] = -masses.overdose[k];
        d.dose = argmax_lowest(negated, iota_indices(grid.size()));
        d.flags |= kFlagCapUnmet;
    } else {
        d.dose = argmax_lowest(masses.targeted, feasible);
    }
    if (posterior.degenerate()) d.flags |= kFlagPosteriorDegenerate;
    return d;
}

// ---------------------------------------------------------------------------
// 3+3

PolicyDecision ThreePlusThree::step() const {
    PolicyDecision d;
    if (stopped_) {
        d.dose = recommended_;
        d.flags = kFlagStopped | stop_flags_;
    } else {
        d.dose = current_;
    }
    return d;
}

void ThreePlusThree::observe(int /*dose*/, int cohort_size, int toxicities) {
    if (stopped_) return;
    ++cohorts_at_current_;
    toxicities_at_current_ += toxicities;
    (void)cohort_size;
    bool escalate = false;
    if (cohorts_at_current_ == 1) {
        // Any toxicity in the first cohort expands the dose to six patients.
        escalate = toxicities_at_current_ == 0;
        if (!escalate) return;
    } else {
        escalate = toxicities_at_current_ < 2;
        if (!escalate) {
            stopped_ = true;
            if (current_ == 0) {
                recommended_ = 0;
                stop_flags_ = kFlagNoSafeDose;
            } else {
                recommended_ = current_ - 1;
            }
            return;
        }
    }
    if (current_ + 1 >= num_doses_) {
        stopped_ = true;
        recommended_ = current_;
        return;
    }
    ++current_;
    cohorts_at_current_ = 0;
    toxicities_at_current_ = 0;
}

Recommendation ThreePlusThree::recommendation() const {
    Recommendation r;
    if (stopped_) {
        r.dose = recommended_;
        r.flags = stop_flags_;
    } else if (current_ == 0) {
        r.dose = 0;
        r.flags = kFlagNoSafeDose;
    } else {
        r.dose = current_ - 1;
    }
    return r;
}

// ---------------------------------------------------------------------------
// State machines

Policy::Policy(PolicyConfig cfg, DoseGrid grid)
    : cfg_(std::move(cfg)), grid_(std::move(grid)), state_(grid_.size()) {}

void Policy::observe(int dose, std::span<const Outcome> cohort) {
    state_.record(dose, cohort);
    on_observe(dose, cohort);
}

namespace {

template <class Derived>
class ClonablePolicy : public Policy {
public:
    using Policy::Policy;
    std::unique_ptr<Policy> clone() const override {
        return std::make_unique<Derived>(static_cast<const Derived&>(*this));
    }
};

class SeedaPolicy final : public ClonablePolicy<SeedaPolicy> {
public:
    using ClonablePolicy::ClonablePolicy;
    PolicyDecision select(RngStream&) override {
        return seeda_select(state_, grid_, cfg_, regularity_of(cfg_));
    }
    Recommendation recommend(RngStream&) const override {
        return seeda_family_recommend(state_, grid_, cfg_);
    }
};

class PlateauPolicy final : public ClonablePolicy<PlateauPolicy> {
public:
    using ClonablePolicy::ClonablePolicy;
    PolicyDecision select(RngStream&) override {
        return plateau_select(state_, grid_, cfg_, regularity_of(cfg_));
    }
    Recommendation recommend(RngStream&) const override {
        return plateau_recommend(state_, grid_, cfg_, regularity_of(cfg_));
    }
};

class Ucb1Policy final : public ClonablePolicy<Ucb1Policy> {
public:
    using ClonablePolicy::ClonablePolicy;
    PolicyDecision select(RngStream&) override { return ucb1_select(state_, cfg_.c); }
    Recommendation recommend(RngStream&) const override {
        return constrained_recommend(state_, cfg_.theta);
    }
};

class KlUcbPolicy final : public ClonablePolicy<KlUcbPolicy> {
public:
    using ClonablePolicy::ClonablePolicy;
    PolicyDecision select(RngStream&) override { return klucb_select(state_); }
    Recommendation recommend(RngStream&) const override {
        return constrained_recommend(state_, cfg_.theta);
    }
};

class IndependentTsPolicy final : public ClonablePolicy<IndependentTsPolicy> {
public:
    using ClonablePolicy::ClonablePolicy;
    PolicyDecision select(RngStream& rng) override { return independent_ts_select(state_, rng); }
    Recommendation recommend(RngStream& rng) const override {
        return sampled_recommend(state_, cfg_.theta, rng);
    }
};

class ParetoTsPolicy final : public ClonablePolicy<ParetoTsPolicy> {
public:
    using ClonablePolicy::ClonablePolicy;
    PolicyDecision select(RngStream& rng) override { return pareto_ts_select(state_, rng); }
    Recommendation recommend(RngStream& rng) const override {
        return sampled_recommend(state_, cfg_.theta, rng);
    }
};

template <class Derived>
class PosteriorPolicy : public ClonablePolicy<Derived> {
public:
    PosteriorPolicy(PolicyConfig cfg, DoseGrid grid)
        : ClonablePolicy<Derived>(std::move(cfg), std::move(grid)),
          posterior_(this->grid_, this->cfg_.domain, this->cfg_.crm_prior_rate) {}

    const ToxicityPosterior& posterior() const { return posterior_; }

protected:
    void on_observe(int dose, std::span<const Outcome> cohort) override {
        int toxic = 0;
        for (const Outcome& o : cohort) toxic += o.toxicity ? 1 : 0;
        posterior_.observe(dose, toxic, static_cast<int>(cohort.size()) - toxic);
    }

    ToxicityPosterior posterior_;
};

class CrmPolicy final : public PosteriorPolicy<CrmPolicy> {
public:
    using PosteriorPolicy::PosteriorPolicy;
    PolicyDecision select(RngStream&) override { return crm_select(grid_, cfg_, posterior_); }
    Recommendation recommend(RngStream&) const override {
        return crm_recommend(grid_, cfg_, posterior_);
    }
};

class McrmPolicy final : public PosteriorPolicy<McrmPolicy> {
public:
    using PosteriorPolicy::PosteriorPolicy;
    PolicyDecision select(RngStream&) override { return mcrm_select(grid_, cfg_, posterior_); }
    Recommendation recommend(RngStream&) const override {
        const PolicyDecision d = mcrm_select(grid_, cfg_, posterior_);
        Recommendation r;
        r.dose = d.dose;
        r.flags = d.flags;
        r.toxicity_estimates = model_toxicities(grid_, posterior_.mean());
        return r;
    }
};

class ThreePlusThreePolicy final : public ClonablePolicy<ThreePlusThreePolicy> {
public:
    ThreePlusThreePolicy(PolicyConfig cfg, DoseGrid grid)
        : ClonablePolicy(std::move(cfg), std::move(grid)), rule_(grid_.size()) {}

    PolicyDecision select(RngStream&) override { return rule_.step(); }
    Recommendation recommend(RngStream&) const override {
        Recommendation r = rule_.recommendation();
        r.toxicity_estimates = state_.toxicity_means();
        return r;
    }

protected:
    void on_observe(int dose, std::span<const Outcome> cohort) override {
        int toxic = 0;
        for (const Outcome& o : cohort) toxic += o.toxicity ? 1 : 0;
        rule_.observe(dose, static_cast<int>(cohort.size()), toxic);
    }

private:
    ThreePlusThree rule_;
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicyConfig& cfg, const DoseGrid& grid) {
    cfg.validate();
    switch (cfg.kind) {
        case PolicyKind::Seeda: return std::make_unique<SeedaPolicy>(cfg, grid);
        case PolicyKind::SeedaPlateau: return std::make_unique<PlateauPolicy>(cfg, grid);
        case PolicyKind::Ucb1: return std::make_unique<Ucb1Policy>(cfg, grid);
        case PolicyKind::KlUcb: return std::make_unique<KlUcbPolicy>(cfg, grid);
        case PolicyKind::IndependentTs: return std::make_unique<IndependentTsPolicy>(cfg, grid);
        case PolicyKind::Crm: return std::make_unique<CrmPolicy>(cfg, grid);
        case PolicyKind::ThreePlusThree: return std::make_unique<ThreePlusThreePolicy>(cfg, grid);
        case PolicyKind::Mcrm: return std::make_unique<McrmPolicy>(cfg, grid);
        case PolicyKind::ParetoTs: return std::make_unique<ParetoTsPolicy>(cfg, grid);
    }
    throw ValidationError("unknown policy kind", "kind");
}

}  // namespace dosefind
