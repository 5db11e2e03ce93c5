// Reference values produced offline by tests/oracles/derive.py (mpmath at 40
// digits, cross-checked by brute-force scans). Changing one of these numbers
// requires re-running that script, not editing the constant.

#include <doctest.h>

#include <cmath>

#include "dosefind/bounds.hpp"
#include "dosefind/policies.hpp"
#include "dosefind/posterior.hpp"

using namespace dosefind;

namespace {

const std::vector<double> kPrior{0.02, 0.06, 0.12, 0.20, 0.30, 0.40};

DoseGrid prior_grid() { return skeleton_from_prior(kPrior, default_skeleton_a0()); }

TrialState make_state(std::vector<int> N, std::vector<int> Sq, std::vector<int> Sp) {
    TrialState s(static_cast<int>(N.size()));
    s.allocations = std::move(N);
    s.efficacy_successes = std::move(Sq);
    s.toxicity_events = std::move(Sp);
    for (int n : s.allocations) s.patients += n;
    return s;
}

}  // namespace

TEST_CASE("truncated exponential prior mean") {
    CHECK(default_skeleton_a0() == doctest::Approx(2.0293739786118598).epsilon(1e-13));
}

TEST_CASE("toxicity at a=2, d=0.5") {
    CHECK(toxicity_prob(2.0, 0.5) == doctest::Approx(0.53444664538852303).epsilon(1e-14));
}

TEST_CASE("inversion at p=0.3, d=0.5 matches the 1e-6 grid minimiser") {
    const double a = invert_toxicity(0.3, 0.5);
    CHECK(a == doctest::Approx(3.843345204018603).epsilon(1e-13));
    CHECK(std::abs(a - 3.8433450) <= 1e-6);
}

TEST_CASE("confidence radius at t=100, K=6, delta=0.05, unit constant") {
    const auto params = RegularityParams::from_radius(1.0, 2.0 / 3.0);
    CHECK(confidence_radius(100, 6, 0.05, params) ==
          doctest::Approx(1.80891564703707).epsilon(1e-13));
}

TEST_CASE("UCB-1 index (0.3, 7, 100, c=2)") {
    CHECK(ucb1_index(0.3, 7, 100, 2.0) == doctest::Approx(1.4470670905759226).epsilon(1e-14));
}

TEST_CASE("KL-UCB index (0.2, 10, 100) against scan and root") {
    const double v = klucb_index(0.2, 10, 100);
    CHECK(std::abs(v - 0.66711229969562314) <= 1e-9);
}

TEST_CASE("single-dose C1 on [0.5, 3]") {
    const DoseGrid grid({0.0});
    const auto p = regularity_from_model(grid, ParameterDomain{0.5, 3.0});
    CHECK(p.gamma1 == doctest::Approx(1.5));
    CHECK(p.gamma1_bar == doctest::Approx(2.0 / 3.0));
    CHECK(p.C1 == doctest::Approx(0.054798096107335325).epsilon(1e-12));
}

TEST_CASE("t1 for Delta=0.4, eps=0.1, K=6, delta=0.05, unit constant") {
    const auto p = RegularityParams::from_radius(1.0, 2.0 / 3.0);
    CHECK(lemma_t1(0.4, 0.1, 6, 0.05, p) == doctest::Approx(21922.555693367965).epsilon(1e-12));
}

TEST_CASE("CRM posterior mean after one toxic outcome at d=0") {
    ToxicityPosterior post(DoseGrid({0.0}), kDefaultDomain, 0.5);
    post.observe(0, true);
    CHECK(std::abs(post.mean() - 0.93804617046957201) <= 1e-5);  // 4001-node trapezoid
}

TEST_CASE("MCRM prior-only band masses on the skeleton") {
    const DoseGrid grid = prior_grid();
    ToxicityPosterior post(grid, kDefaultDomain, 0.5);
    const BandMasses m = mcrm_band_masses(grid, McrmBands{}, post);
    const double targeted[] = {0.108949829940502, 0.132514628142115, 0.150515980352837,
                               0.162382771228697, 0.164346169404261, 0.152917527722395};
    const double overdose[] = {0.200746225052671, 0.28208859774947, 0.366502543669097,
                               0.460929937356275, 0.570064375658913, 0.676071769453625};
    for (int k = 0; k < 6; ++k) {
        CAPTURE(k);
        CHECK(std::abs(m.targeted[static_cast<std::size_t>(k)] - targeted[k]) <= 1e-6);
        CHECK(std::abs(m.overdose[static_cast<std::size_t>(k)] - overdose[k]) <= 1e-6);
    }
}

TEST_CASE("SEEDA decision on the reference state") {
    const TrialState s = make_state({5, 5, 5, 5, 5, 5}, {1, 2, 3, 3, 3, 3}, {0, 0, 1, 1, 3, 4});
    PolicyConfig cfg;
    cfg.c = 2.0;
    const auto params = RegularityParams::from_radius(0.3, 2.0 / 3.0);

    SUBCASE("continuity-corrected rates") {
        const PolicyDecision d = seeda_select(s, prior_grid(), cfg, params);
        CHECK(d.a_hat == doctest::Approx(1.28366811737351).epsilon(1e-12));
        CHECK(d.alpha == doctest::Approx(0.810648316675345).epsilon(1e-12));
        CHECK(d.admissible_size == 5);
        CHECK(d.dose == 2);
        CHECK(d.index_values[2] == doctest::Approx(1.76639571015).epsilon(1e-10));
    }
    SUBCASE("raw rates") {
        cfg.rate = RateEstimator::Raw;
        const PolicyDecision d = seeda_select(s, prior_grid(), cfg, params);
        CHECK(d.a_hat == doctest::Approx(4.15417689679248).epsilon(1e-12));
        CHECK(d.admissible_size == 6);
        CHECK(d.dose == 2);
    }
}

TEST_CASE("SEEDA-Plateau neighbourhood at the top of the admissible prefix") {
    TrialState s = make_state({10, 3, 12, 4, 2, 2}, {2, 1, 6, 1, 1, 1}, {2, 0, 10, 4, 2, 2});
    s.leader_counts[2] = 1;  // second leader visit: (2 - 1) / 3 is not an integer
    PolicyConfig cfg;
    cfg.c = 2.0;
    const auto params = RegularityParams::from_radius(0.3, 2.0 / 3.0);
    const PolicyDecision d = plateau_select(s, prior_grid(), cfg, params);
    CHECK(d.a_hat == doctest::Approx(0.502799053293698).epsilon(1e-12));
    CHECK(d.admissible_size == 3);
    CHECK(d.leader == 2);
    CHECK(d.dose == 1);
    CHECK(s.leader_counts[2] == 2);
}
