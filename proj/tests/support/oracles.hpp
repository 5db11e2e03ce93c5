#pragma once
// Independent reference computations shared by the unit tests and the
// acceptance gate. Nothing here calls into the library's numerics: each oracle
// re-derives its quantity by brute force from the defining formula.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dosefind/catalog.hpp"
#include "dosefind/engine.hpp"
#include "dosefind/io.hpp"
#include "dosefind/policies.hpp"
#include "dosefind/session.hpp"

namespace oracle {

inline double bernoulli_kl(double p, double q) {
    auto term = [](double x, double y) { return x == 0.0 ? 0.0 : x * std::log(x / y); };
    return term(p, q) + term(1.0 - p, 1.0 - q);
}

/// Largest q on a 1e-6 lattice above q_hat with N kl(q_hat, q) <= log t.
/// The feasible set is an interval starting at q_hat, so a 1e-3 pass locates
/// the crossing and a 1e-6 pass resolves it.
inline double klucb_scan(double q_hat, int N, int t) {
    const double budget = std::log(static_cast<double>(t));
    auto feasible = [&](double q) { return N * bernoulli_kl(q_hat, q) <= budget; };
    double q = q_hat;
    while (q + 1e-3 < 1.0 && feasible(q + 1e-3)) q += 1e-3;
    while (q + 1e-6 <= 1.0 && feasible(q + 1e-6)) q += 1e-6;
    if (feasible(1.0) || (q_hat == 1.0)) return 1.0;
    return q;
}

/// O(K^2) dominance scan.
inline std::vector<int> pareto_brute(const std::vector<double>& tox, const std::vector<double>& eff) {
    std::vector<int> out;
    for (std::size_t i = 0; i < tox.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < tox.size() && !dominated; ++j)
            dominated = j != i && tox[j] <= tox[i] && eff[j] >= eff[i] &&
                        (tox[j] < tox[i] || eff[j] > eff[i]);
        if (!dominated) out.push_back(static_cast<int>(i));
    }
    return out;
}

/// Posterior over a under an Exp(rate) prior truncated to [lo, hi], evaluated
/// by the composite midpoint rule on `cells` cells.
struct FineGridPosterior {
    std::vector<double> bases;  // b_k
    std::vector<int> toxic, safe;
    double rate = 0.5, lo = 0.1, hi = 10.0;
    int cells = 100000;

    template <class F>
    double integrate(F&& f) const {
        if (weights_.empty()) prepare();
        const double h = (hi - lo) / cells;
        double num = 0.0;
        for (int i = 0; i < cells; ++i) num += weights_[static_cast<std::size_t>(i)] * f(lo + (i + 0.5) * h);
        return num;
    }
    double mean() const {
        return integrate([](double a) { return a; });
    }
    /// P(band_lo < p_k(a) <= band_hi).
    double band(int k, double band_lo, double band_hi) const {
        const double b = bases[static_cast<std::size_t>(k)];
        return integrate([&](double a) {
            const double p = std::pow(b, a);
            return (p > band_lo && p <= band_hi) ? 1.0 : 0.0;
        });
    }

private:
    void prepare() const {
        const double h = (hi - lo) / cells;
        weights_.resize(static_cast<std::size_t>(cells));
        double peak = -INFINITY;
        for (int i = 0; i < cells; ++i) {
            const double a = lo + (i + 0.5) * h;
            double lw = -rate * a;
            for (std::size_t k = 0; k < bases.size(); ++k) {
                const double p = std::pow(bases[k], a);
                lw += toxic[k] * std::log(p) + safe[k] * std::log1p(-p);
            }
            weights_[static_cast<std::size_t>(i)] = lw;
            peak = std::max(peak, lw);
        }
        double z = 0.0;
        for (double& w : weights_) z += (w = std::exp(w - peak));
        for (double& w : weights_) w /= z;
    }
    mutable std::vector<double> weights_;
};

/// Drives a fresh session with the outcomes recorded in `trace` and reports
/// the first cohort whose pending dose differs from the simulator's choice
/// (-1 when all agree) and whether the finalized dose matches.
struct ReplayOutcome {
    int first_mismatch = -1;
    bool final_matches = false;
    int session_final = -1;
    int engine_final = -1;
};

inline ReplayOutcome replay_through_sessions(const dosefind::TrialTrace& trace,
                                             const std::string& scenario,
                                             const dosefind::PolicyConfig& cfg, int cohort_size,
                                             const std::filesystem::path& dir) {
    using namespace dosefind;
    SessionStore store(dir);
    const Json body{{"schema", kSessionSchema},
                    {"config", config_to_json(cfg)},
                    {"scenario", scenario},
                    {"cohort_size", cohort_size}};
    const std::string id = store.create(SessionSpec::from_json(body));
    ReplayOutcome out;
    std::size_t patient = 0;
    for (std::size_t c = 0; c < trace.cohorts.size(); ++c) {
        const Json rec = store.recommendation(id);
        const int pending = rec.at("next").at("dose").get<int>() - 1;
        if (pending != trace.cohorts[c].dose && out.first_mismatch < 0)
            out.first_mismatch = static_cast<int>(c);
        std::vector<Outcome> outcomes;
        for (int i = 0; i < trace.cohorts[c].size; ++i) outcomes.push_back(trace.patients[patient++].outcome);
        store.post_outcomes(id, trace.cohorts[c].dose, outcomes, pending != trace.cohorts[c].dose);
    }
    const Json fin = store.finalize(id);
    out.session_final = fin.at("final").at("dose").get<int>() - 1;
    out.engine_final = trace.final_recommendation.dose;
    out.final_matches = out.session_final == out.engine_final;
    return out;
}

inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    auto dir = std::filesystem::temp_directory_path() /
               ("dosefind-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace oracle
