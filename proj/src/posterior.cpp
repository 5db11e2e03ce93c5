#include "dosefind/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

#include "dosefind/errors.hpp"

namespace dosefind {

double truncated_exponential_mean(double rate, const ParameterDomain& domain) {
    if (!(rate > 0.0)) throw DomainError("exponential prior rate must be positive");
    const double lo = domain.lower;
    const double hi = domain.upper;
    const double el = std::exp(-rate * lo);
    const double eh = std::exp(-rate * hi);
    return ((lo + 1.0 / rate) * el - (hi + 1.0 / rate) * eh) / (el - eh);
}

double default_skeleton_a0() {
    static const double a0 = truncated_exponential_mean(0.5, kDefaultDomain);
    return a0;
}

ToxicityPosterior::ToxicityPosterior(const DoseGrid& grid, const ParameterDomain& domain,
                                     double prior_rate, int points)
    : grid_(grid), domain_(domain), prior_rate_(prior_rate) {
    if (points < 3) throw DomainError("posterior grid needs at least three points");
    if (!(domain.width() > 0.0) || !(domain.lower > 0.0))
        throw DomainError("posterior domain must be a positive interval");
    if (!(prior_rate > 0.0)) throw DomainError("prior rate must be positive");
    const auto n = static_cast<std::size_t>(points);
    step_ = domain.width() / (points - 1);
    nodes_.resize(n);
    log_prior_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        nodes_[i] = (i + 1 == n) ? domain.upper : domain.lower + step_ * static_cast<double>(i);
        log_prior_[i] = -prior_rate * nodes_[i];
    }
    const auto K = static_cast<std::size_t>(grid.size());
    log_tox_.assign(K, std::vector<double>(n));
    log_no_tox_.assign(K, std::vector<double>(n));
    for (std::size_t k = 0; k < K; ++k) {
        const double log_base = std::log(grid.base(static_cast<int>(k)));
        for (std::size_t i = 0; i < n; ++i) {
            const double log_p = nodes_[i] * log_base;
            log_tox_[k][i] = log_p;
            log_no_tox_[k][i] = std::log1p(-std::exp(log_p));
        }
    }
    log_likelihood_.assign(n, 0.0);
    refresh();
}

void ToxicityPosterior::observe(int dose, int toxic, int non_toxic) {
    const auto& tox_row = log_tox_.at(static_cast<std::size_t>(dose));
    const auto& safe_row = log_no_tox_.at(static_cast<std::size_t>(dose));
    for (std::size_t i = 0; i < log_likelihood_.size(); ++i)
        log_likelihood_[i] += toxic * tox_row[i] + non_toxic * safe_row[i];
    refresh();
}

void ToxicityPosterior::refresh() {
    const std::size_t n = nodes_.size();
    density_.resize(n);
    cumulative_.resize(n);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, log_prior_[i] + log_likelihood_[i]);

    auto fill = [&](bool with_likelihood) {
        const double shift =
            with_likelihood ? peak : *std::max_element(log_prior_.begin(), log_prior_.end());
        for (std::size_t i = 0; i < n; ++i) {
            const double lw = log_prior_[i] + (with_likelihood ? log_likelihood_[i] : 0.0);
            density_[i] = std::exp(lw - shift);
        }
        cumulative_[0] = 0.0;
        double first_moment = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            const double h = nodes_[i] - nodes_[i - 1];
            cumulative_[i] = cumulative_[i - 1] + 0.5 * h * (density_[i - 1] + density_[i]);
            first_moment +=
                0.5 * h * (nodes_[i - 1] * density_[i - 1] + nodes_[i] * density_[i]);
        }
        const double z = cumulative_.back();
        return std::pair{z, first_moment};
    };

    degenerate_ = !std::isfinite(peak);
    auto [z, moment] = fill(!degenerate_);
    if (!(z > 0.0) || !std::isfinite(z) || !std::isfinite(moment)) {
        degenerate_ = true;
        std::tie(z, moment) = fill(false);
    }
    for (std::size_t i = 0; i < n; ++i) {
        density_[i] /= z;
        cumulative_[i] /= z;
    }
    mean_ = moment / z;
}

double ToxicityPosterior::mean() const { return mean_; }

double ToxicityPosterior::cdf(double a) const {
    if (a <= domain_.lower) return 0.0;
    if (a >= domain_.upper) return 1.0;
    auto i = static_cast<std::size_t>((a - domain_.lower) / step_);
    i = std::min(i, nodes_.size() - 2);
    const double h = nodes_[i + 1] - nodes_[i];
    const double s = (a - nodes_[i]) / h;
    const double f0 = density_[i];
    const double f1 = density_[i + 1];
    return cumulative_[i] + h * (f0 * s + 0.5 * (f1 - f0) * s * s);
}

double ToxicityPosterior::parameter_mass(double a_lo, double a_hi) const {
    if (!(a_hi > a_lo)) return 0.0;
    return std::max(0.0, cdf(a_hi) - cdf(a_lo));
}

double ToxicityPosterior::toxicity_band_mass(int dose, double lo, double hi) const {
    // p = b^a is decreasing in a: lo < p <= hi  <=>  log(hi)/log(b) <= a < log(lo)/log(b).
    const double log_base = std::log(grid_.base(dose));
    const double a_lo = hi >= 1.0 ? -std::numeric_limits<double>::infinity()
                                  : std::log(hi) / log_base;
    const double a_hi = lo <= 0.0 ? std::numeric_limits<double>::infinity()
                                  : std::log(lo) / log_base;
    return parameter_mass(std::max(a_lo, domain_.lower), std::min(a_hi, domain_.upper));
}

}  // namespace dosefind
