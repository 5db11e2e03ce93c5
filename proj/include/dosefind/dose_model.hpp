#pragma once
// One-parameter dose-toxicity curve p_k(a) = ((tanh(d_k) + 1) / 2)^a and the
// quantities derived from it: inversion, skeleton construction, confidence
// radius and the admissible dose prefix.

#include <cstdint>
#include <span>
#include <vector>

namespace dosefind {

/// Closed interval of admissible values for the global toxicity parameter.
struct ParameterDomain {
    double lower = 0.1;
    double upper = 10.0;

    double width() const noexcept { return upper - lower; }
    double clamp(double a) const noexcept;
    bool contains(double a) const noexcept { return a >= lower && a <= upper; }

    friend bool operator==(const ParameterDomain&, const ParameterDomain&) = default;
};

inline constexpr ParameterDomain kDefaultDomain{0.1, 10.0};

/// Strictly increasing, finite dose labels d_1 < ... < d_K (model coordinates).
class DoseGrid {
public:
    /// Throws ValidationError unless labels are finite, strictly increasing and K >= 1.
    explicit DoseGrid(std::vector<double> labels);

    int size() const noexcept { return static_cast<int>(labels_.size()); }
    double label(int k) const { return labels_.at(static_cast<std::size_t>(k)); }
    const std::vector<double>& labels() const noexcept { return labels_; }

    /// (tanh(d_k) + 1) / 2, the base raised to the power a.
    double base(int k) const;
    double toxicity(int k, double a) const;

    friend bool operator==(const DoseGrid&, const DoseGrid&) = default;

private:
    std::vector<double> labels_;
};

/// Constants of the monotonicity / Hoelder regularity conditions, aggregated
/// over doses. `C1_bar` and `gamma1_bar` parameterise the confidence radius.
struct RegularityParams {
    double C1 = 1.0;
    double gamma1 = 1.5;
    double C2 = 1.0;
    double gamma2 = 1.0;
    double C1_bar = 1.0;
    double gamma1_bar = 2.0 / 3.0;

    /// Builds the aggregate from (C1, gamma1, C2, gamma2); derives the bars.
    static RegularityParams from_constants(double C1, double gamma1, double C2, double gamma2);
    /// Builds the aggregate from the radius constants directly; C1 and gamma1
    /// are back-derived so the record stays self-consistent.
    static RegularityParams from_radius(double C1_bar, double gamma1_bar, double C2 = 1.0,
                                        double gamma2 = 1.0);

    /// Throws ValidationError if the bar identities or positivity fail.
    void validate() const;

    friend bool operator==(const RegularityParams&, const RegularityParams&) = default;
};

/// Per-dose parameter estimates, their allocation weights and the aggregate.
struct ToxicityEstimate {
    std::vector<double> a_hat_per_dose;
    std::vector<double> weights;
    double a_hat = 0.0;
    double alpha = 0.0;
};

double toxicity_prob(double a, double d);

/// Exact minimiser of |p(d, a) - p_hat| over the closed domain.
/// p_hat = 0 maps to domain.upper, p_hat = 1 to domain.lower.
double invert_toxicity(double p_hat, double d, const ParameterDomain& domain = kDefaultDomain);

/// Labels d_k = atanh(2 * prior_k^(1/a0) - 1) so that p(a0, d_k) = prior_k.
DoseGrid skeleton_from_prior(std::span<const double> prior_tox, double a0);

/// alpha(t) = C1_bar * K * (log(2K / delta) / (2t))^(gamma1_bar / 2).
double confidence_radius(int t, int num_doses, double delta, const RegularityParams& params);

/// Number m of doses in the prefix {k : p_k(a_hat + alpha) <= theta}.
int admissible_prefix(double a_hat, double alpha, double theta, const DoseGrid& grid);

/// Zero-based indices of the admissible doses; always 0..m-1.
std::vector<int> admissible_set(double a_hat, double alpha, double theta, const DoseGrid& grid);

/// Regularity constants for the model on `domain`: gamma1 = 3/2 with
/// C1_k = min_a |p_k'(a)| / |A|^(gamma1 - 1), gamma2 = 1 with C2_k = max_a |p_k'(a)|.
RegularityParams regularity_from_model(const DoseGrid& grid,
                                       const ParameterDomain& domain = kDefaultDomain);

/// Per-dose toxicity rate fed to the inversion. Raw is S/N. Corrected is
/// (S + 1/2) / (N + 1), which keeps zero-event doses off the domain boundary.
enum class RateEstimator : std::uint8_t { Corrected, Raw };

/// Weighted aggregate a_hat = sum_k (N_k / t) * a_hat_k with a_hat_k the inversion
/// of the dose's toxicity rate; doses never allocated get weight zero.
ToxicityEstimate estimate_toxicity(std::span<const int> allocations,
                                   std::span<const int> toxicity_events, const DoseGrid& grid,
                                   const ParameterDomain& domain = kDefaultDomain,
                                   RateEstimator rate = RateEstimator::Corrected);

}  // namespace dosefind
