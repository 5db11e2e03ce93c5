#include "dosefind/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "dosefind/errors.hpp"

namespace dosefind {

double fit_reference_parameter(const Scenario& scenario, const ParameterDomain& domain) {
    auto loss = [&](double a) {
        double s = 0.0;
        for (int k = 0; k < scenario.num_doses(); ++k) {
            const double r = scenario.grid.toxicity(k, a) - scenario.true_tox[static_cast<std::size_t>(k)];
            s += r * r;
        }
        return s;
    };
    // Coarse scan for the basin, then Brent refinement inside the bracketing cell.
    constexpr int kScan = 2000;
    const double h = domain.width() / kScan;
    int best = 0;
    double best_loss = loss(domain.lower);
    for (int i = 1; i <= kScan; ++i) {
        const double v = loss(domain.lower + h * i);
        if (v < best_loss) {
            best_loss = v;
            best = i;
        }
    }
    const double lo = std::max(domain.lower, domain.lower + h * (best - 1));
    const double hi = std::min(domain.upper, domain.lower + h * (best + 1));
    const auto [a, value] = boost::math::tools::brent_find_minima(loss, lo, hi, 50);
    return value <= best_loss ? a : domain.lower + h * best;
}

double lemma_t1(double Delta, double epsilon, int K, double delta, const RegularityParams& params) {
    const double gap = std::abs(Delta - epsilon);
    if (gap == 0.0) return std::numeric_limits<double>::infinity();
    return 0.5 * std::pow(params.C1_bar * K / gap, 2.0 / params.gamma1_bar) *
           std::log(2.0 * K / delta);
}

TheoryBounds theory_bounds(const Scenario& scenario, const RegularityParams& params, double c,
                           double delta, double epsilon, int n, const ParameterDomain& domain) {
    if (!(epsilon > 0.0)) throw ValidationError("must be positive", "epsilon");
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("must lie in (0,1)", "delta");
    if (n < 1) throw ValidationError("must be at least 1", "n");
    params.validate();

    const int K = scenario.num_doses();
    TheoryBounds out;
    BoundInputs& in = out.inputs;
    in.a_star = fit_reference_parameter(scenario, domain);
    in.epsilon = epsilon;
    in.delta = delta;
    in.M = scenario.safe_count();
    in.Delta = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
        const double g = std::abs(in.a_star - std::log(scenario.theta) / std::log(scenario.grid.base(k)));
        in.gaps.push_back(g);
        in.Delta = std::min(in.Delta, g);
    }
    const double q_star = scenario.optimal_efficacy();
    for (double q : scenario.true_eff) in.Q = std::max(in.Q, std::abs(q - q_star));
    in.t1 = lemma_t1(in.Delta, epsilon, K, delta, params);

    const double log_n = std::log(static_cast<double>(n));
    const double unsafe_term = (K - in.M) / (2.0 * epsilon * epsilon);
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
        const auto i = static_cast<std::size_t>(k);
        if (scenario.true_tox[i] <= scenario.theta && scenario.true_eff[i] < q_star)
            sum += c * log_n / (q_star - scenario.true_eff[i]);
    }
    out.regret = sum + n * delta * in.Q + in.t1 / 2.0 + unsafe_term;
    out.unsafe = in.t1 + unsafe_term;

    const double gap_M = in.M > 0 ? in.gaps[static_cast<std::size_t>(in.M - 1)] : 0.0;
    out.delta1 = 2.0 * K *
                 std::exp(-2.0 * std::pow(gap_M / (params.C1_bar * K), 2.0 * params.gamma1) * n);
    if (scenario.plateau && *scenario.plateau > 0) {
        const double q_before = scenario.true_eff[static_cast<std::size_t>(*scenario.plateau - 1)];
        if (q_star > q_before) out.plateau_regret = c * log_n / (q_star - q_before);
    }
    out.misrecommend = 3.0 / std::pow(static_cast<double>(n), c) + out.delta1;
    return out;
}

}  // namespace dosefind
