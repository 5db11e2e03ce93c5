#include "dosefind/scenario.hpp"

#include <cmath>

#include "dosefind/errors.hpp"
#include "dosefind/posterior.hpp"

namespace dosefind {

namespace {

void check_probabilities(const std::vector<double>& values, const char* field, bool open) {
    for (double v : values) {
        const bool ok = open ? (v > 0.0 && v < 1.0) : (v >= 0.0 && v <= 1.0);
        if (!std::isfinite(v) || !ok)
            throw ValidationError(open ? "entries must lie in (0,1)" : "entries must lie in [0,1]",
                                  field);
    }
}

}  // namespace

int optimal_dose(const std::vector<double>& true_tox, const std::vector<double>& true_eff,
                 double theta) {
    int best = -1;
    for (std::size_t k = 0; k < true_tox.size() && k < true_eff.size(); ++k) {
        if (true_tox[k] > theta) continue;
        if (best < 0 || true_eff[k] > true_eff[static_cast<std::size_t>(best)])
            best = static_cast<int>(k);
    }
    return best;
}

std::optional<int> plateau_start(const std::vector<double>& true_eff) {
    if (true_eff.size() < 2) return std::nullopt;
    std::size_t start = true_eff.size() - 1;
    while (start > 0 && true_eff[start - 1] == true_eff.back()) --start;
    if (start + 1 == true_eff.size()) return std::nullopt;
    return static_cast<int>(start);
}

int Scenario::safe_count() const {
    int m = 0;
    for (double p : true_tox) m += p <= theta ? 1 : 0;
    return m;
}

Scenario Scenario::make(std::string name, std::vector<double> true_tox,
                        std::vector<double> true_eff, double theta,
                        std::vector<double> prior_tox, std::vector<double> prior_eff) {
    if (name.empty()) throw ValidationError("must be non-empty", "name");
    if (!(theta > 0.0 && theta < 1.0)) throw ValidationError("must lie in (0,1)", "theta");
    if (true_tox.size() < 2) throw ValidationError("needs at least two doses", "tox");
    const std::size_t K = true_tox.size();
    if (true_eff.size() != K) throw ValidationError("length must match tox", "eff");
    check_probabilities(true_tox, "tox", false);
    check_probabilities(true_eff, "eff", false);
    for (std::size_t k = 1; k < K; ++k)
        if (true_tox[k] < true_tox[k - 1]) throw ValidationError("must be nondecreasing", "tox");

    if (prior_tox.empty()) {
        if (K > kDefaultPriorTox.size())
            throw ValidationError("required when K exceeds the default prior length", "prior_tox");
        prior_tox.assign(kDefaultPriorTox.begin(), kDefaultPriorTox.begin() + static_cast<long>(K));
    }
    if (prior_eff.empty()) {
        if (K > kDefaultPriorEff.size())
            throw ValidationError("required when K exceeds the default prior length", "prior_eff");
        prior_eff.assign(kDefaultPriorEff.begin(), kDefaultPriorEff.begin() + static_cast<long>(K));
    }
    if (prior_tox.size() != K) throw ValidationError("length must match tox", "prior_tox");
    if (prior_eff.size() != K) throw ValidationError("length must match tox", "prior_eff");
    check_probabilities(prior_tox, "prior_tox", true);
    check_probabilities(prior_eff, "prior_eff", false);

    Scenario s;
    s.name = std::move(name);
    s.theta = theta;
    s.optimal = optimal_dose(true_tox, true_eff, theta);
    if (s.optimal < 0) throw ValidationError("no dose is safe at theta", "tox");
    s.plateau = plateau_start(true_eff);
    s.grid = skeleton_from_prior(prior_tox, default_skeleton_a0());
    s.true_tox = std::move(true_tox);
    s.true_eff = std::move(true_eff);
    s.prior_tox = std::move(prior_tox);
    s.prior_eff = std::move(prior_eff);
    return s;
}

}  // namespace dosefind
