#pragma once
// Quadrature posterior over the global toxicity parameter, shared by CRM and
// MCRM. The prior is exponential (rate lambda) truncated to the parameter
// domain; the likelihood is accumulated in the log domain on a uniform grid and
// integrated with the trapezoidal rule. Interval masses integrate the
// piecewise-linear interpolant of the density, so band edges that fall between
// nodes are handled exactly to second order.

#include <vector>

#include "dosefind/dose_model.hpp"

namespace dosefind {

/// Mean of Exp(rate) truncated to [domain.lower, domain.upper].
double truncated_exponential_mean(double rate, const ParameterDomain& domain = kDefaultDomain);

/// Skeleton reference parameter shared by the model-based designs.
double default_skeleton_a0();

class ToxicityPosterior {
public:
    static constexpr int kDefaultPoints = 4001;

    ToxicityPosterior(const DoseGrid& grid, const ParameterDomain& domain, double prior_rate,
                      int points = kDefaultPoints);

    void observe(int dose, bool toxic) { observe(dose, toxic ? 1 : 0, toxic ? 0 : 1); }
    void observe(int dose, int toxic, int non_toxic);

    /// Posterior mean of a; falls back to the prior mean when degenerate.
    double mean() const;
    bool degenerate() const { return degenerate_; }

    /// Posterior probability that lo < p_dose(a) <= hi.
    double toxicity_band_mass(int dose, double lo, double hi) const;
    /// Posterior probability that a lies in [a_lo, a_hi] (clipped to the domain).
    double parameter_mass(double a_lo, double a_hi) const;

    int points() const { return static_cast<int>(nodes_.size()); }
    const ParameterDomain& domain() const { return domain_; }

private:
    void refresh();
    double cdf(double a) const;

    DoseGrid grid_;
    ParameterDomain domain_;
    double prior_rate_;
    double step_;
    std::vector<double> nodes_;
    std::vector<double> log_prior_;
    std::vector<std::vector<double>> log_tox_;      // [dose][node] log p_k(a)
    std::vector<std::vector<double>> log_no_tox_;   // [dose][node] log(1 - p_k(a))
    std::vector<double> log_likelihood_;
    std::vector<double> density_;     // normalised posterior density at nodes
    std::vector<double> cumulative_;  // trapezoidal CDF at nodes
    double mean_ = 0.0;
    bool degenerate_ = false;
};

}  // namespace dosefind
