#include "dosefind/dose_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dosefind/errors.hpp"

namespace dosefind {

double ParameterDomain::clamp(double a) const noexcept { return std::clamp(a, lower, upper); }

DoseGrid::DoseGrid(std::vector<double> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw ValidationError("dose grid needs at least one dose", "labels");
    for (std::size_t k = 0; k < labels_.size(); ++k) {
        if (!std::isfinite(labels_[k]))
            throw ValidationError("label " + std::to_string(k + 1) + " is not finite", "labels");
        if (k > 0 && !(labels_[k] > labels_[k - 1]))
            throw ValidationError("labels must be strictly increasing", "labels");
    }
}

double DoseGrid::base(int k) const { return 0.5 * (std::tanh(label(k)) + 1.0); }

double DoseGrid::toxicity(int k, double a) const { return toxicity_prob(a, label(k)); }

RegularityParams RegularityParams::from_constants(double C1, double gamma1, double C2,
                                                  double gamma2) {
    RegularityParams p;
    p.C1 = C1;
    p.gamma1 = gamma1;
    p.C2 = C2;
    p.gamma2 = gamma2;
    p.gamma1_bar = 1.0 / gamma1;
    p.C1_bar = std::pow(C1, -p.gamma1_bar);
    p.validate();
    return p;
}

RegularityParams RegularityParams::from_radius(double C1_bar, double gamma1_bar, double C2,
                                               double gamma2) {
    if (!(C1_bar > 0.0) || !(gamma1_bar > 0.0 && gamma1_bar < 1.0))
        throw ValidationError("radius constants need C1_bar > 0 and gamma1_bar in (0,1)",
                              "regularity");
    RegularityParams p;
    p.C1_bar = C1_bar;
    p.gamma1_bar = gamma1_bar;
    p.gamma1 = 1.0 / gamma1_bar;
    p.C1 = std::pow(C1_bar, -p.gamma1);
    p.C2 = C2;
    p.gamma2 = gamma2;
    p.validate();
    return p;
}

void RegularityParams::validate() const {
    const bool finite = std::isfinite(C1) && std::isfinite(C2) && std::isfinite(C1_bar) &&
                        std::isfinite(gamma1) && std::isfinite(gamma2) && std::isfinite(gamma1_bar);
    if (!finite || C1 <= 0.0 || C2 <= 0.0 || C1_bar <= 0.0)
        throw ValidationError("regularity constants must be finite and positive", "regularity");
    if (!(gamma1 > 1.0)) throw ValidationError("gamma1 must exceed 1", "regularity.gamma1");
    if (!(gamma2 > 0.0 && gamma2 <= 1.0))
        throw ValidationError("gamma2 must lie in (0,1]", "regularity.gamma2");
    if (std::abs(gamma1_bar * gamma1 - 1.0) > 1e-12)
        throw ValidationError("gamma1_bar must equal 1/gamma1", "regularity.gamma1_bar");
    if (std::abs(C1_bar - std::pow(C1, -gamma1_bar)) > 1e-9 * C1_bar)
        throw ValidationError("C1_bar must equal C1^(-gamma1_bar)", "regularity.C1_bar");
}

double toxicity_prob(double a, double d) {
    if (!std::isfinite(a) || !std::isfinite(d)) throw DomainError("toxicity_prob: non-finite input");
    if (!(a > 0.0)) throw DomainError("toxicity_prob: parameter must be positive");
    const double base = 0.5 * (std::tanh(d) + 1.0);
    return std::pow(base, a);
}

double invert_toxicity(double p_hat, double d, const ParameterDomain& domain) {
    if (!std::isfinite(p_hat) || p_hat < 0.0 || p_hat > 1.0)
        throw DomainError("invert_toxicity: p_hat must be a probability");
    if (!std::isfinite(d)) throw DomainError("invert_toxicity: non-finite dose label");
    const double base = 0.5 * (std::tanh(d) + 1.0);
    if (!(base > 0.0 && base < 1.0)) throw DomainError("invert_toxicity: base outside (0,1)");
    if (p_hat == 0.0) return domain.upper;
    if (p_hat == 1.0) return domain.lower;
    return domain.clamp(std::log(p_hat) / std::log(base));
}

DoseGrid skeleton_from_prior(std::span<const double> prior_tox, double a0) {
    if (!(a0 > 0.0) || !std::isfinite(a0)) throw ValidationError("a0 must be positive", "a0");
    std::vector<double> labels;
    labels.reserve(prior_tox.size());
    for (std::size_t k = 0; k < prior_tox.size(); ++k) {
        const double p = prior_tox[k];
        if (!(p > 0.0 && p < 1.0))
            throw ValidationError("prior toxicities must lie in (0,1)", "prior_tox");
        if (k > 0 && !(p > prior_tox[k - 1]))
            throw ValidationError("prior toxicities must be strictly increasing", "prior_tox");
        labels.push_back(std::atanh(2.0 * std::pow(p, 1.0 / a0) - 1.0));
    }
    return DoseGrid(std::move(labels));
}

double confidence_radius(int t, int num_doses, double delta, const RegularityParams& params) {
    if (t < 1) throw DomainError("confidence_radius: t must be at least 1");
    if (num_doses < 1) throw DomainError("confidence_radius: need at least one dose");
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("confidence_radius: delta in (0,1)");
    const double K = num_doses;
    const double inner = std::log(2.0 * K / delta) / (2.0 * t);
    return params.C1_bar * K * std::pow(inner, params.gamma1_bar / 2.0);
}

int admissible_prefix(double a_hat, double alpha, double theta, const DoseGrid& grid) {
    if (!(alpha >= 0.0)) throw DomainError("admissible_set: alpha must be nonnegative");
    const double shifted = a_hat + alpha;
    int m = 0;
    // Toxicity is increasing in the label, so the first failure ends the prefix.
    while (m < grid.size() && std::pow(grid.base(m), shifted) <= theta) ++m;
    return m;
}

std::vector<int> admissible_set(double a_hat, double alpha, double theta, const DoseGrid& grid) {
    const int m = admissible_prefix(a_hat, alpha, theta, grid);
    std::vector<int> out(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) out[static_cast<std::size_t>(k)] = k;
    return out;
}

RegularityParams regularity_from_model(const DoseGrid& grid, const ParameterDomain& domain) {
    if (!(domain.width() > 0.0)) throw DomainError("regularity_from_model: degenerate domain");
    constexpr double gamma1 = 1.5;
    constexpr int kScanPoints = 2001;
    const double span_factor = std::pow(domain.width(), gamma1 - 1.0);
    double C1 = std::numeric_limits<double>::infinity();
    double C2 = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
        const double log_base = std::log(grid.base(k));
        double min_slope = std::numeric_limits<double>::infinity();
        double max_slope = 0.0;
        for (int i = 0; i < kScanPoints; ++i) {
            const double a = domain.lower + domain.width() * i / (kScanPoints - 1);
            const double slope = std::abs(std::pow(grid.base(k), a) * log_base);
            min_slope = std::min(min_slope, slope);
            max_slope = std::max(max_slope, slope);
        }
        C1 = std::min(C1, min_slope / span_factor);
        C2 = std::max(C2, max_slope);
    }
    return RegularityParams::from_constants(C1, gamma1, C2, 1.0);
}

ToxicityEstimate estimate_toxicity(std::span<const int> allocations,
                                   std::span<const int> toxicity_events, const DoseGrid& grid,
                                   const ParameterDomain& domain, RateEstimator rate) {
    const auto K = static_cast<std::size_t>(grid.size());
    if (allocations.size() != K || toxicity_events.size() != K)
        throw DomainError("estimate_toxicity: count vectors do not match the grid");
    ToxicityEstimate est;
    est.a_hat_per_dose.assign(K, domain.upper);
    est.weights.assign(K, 0.0);
    long total = 0;
    for (int n : allocations) total += n;
    if (total == 0) {
        // Nothing observed yet: every dose carries equal weight at the boundary.
        for (auto& w : est.weights) w = 1.0 / static_cast<double>(K);
        est.a_hat = domain.upper;
        return est;
    }
    double a_hat = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        if (allocations[k] > 0) {
            const double p_hat =
                rate == RateEstimator::Raw
                    ? static_cast<double>(toxicity_events[k]) / allocations[k]
                    : (toxicity_events[k] + 0.5) / (allocations[k] + 1.0);
            est.a_hat_per_dose[k] = invert_toxicity(p_hat, grid.label(static_cast<int>(k)), domain);
        }
        est.weights[k] = static_cast<double>(allocations[k]) / static_cast<double>(total);
        a_hat += est.weights[k] * est.a_hat_per_dose[k];
    }
    est.a_hat = a_hat;
    return est;
}

}  // namespace dosefind
