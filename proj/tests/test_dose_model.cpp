#include <doctest.h>

#include <cmath>
#include <random>

#include "dosefind/dose_model.hpp"
#include "dosefind/errors.hpp"
#include "dosefind/posterior.hpp"

using namespace dosefind;

namespace {
const std::vector<double> kPrior{0.02, 0.06, 0.12, 0.20, 0.30, 0.40};
}

TEST_CASE("toxicity_prob closed-form examples") {
    CHECK(toxicity_prob(2.0, 0.0) == doctest::Approx(0.25));
    CHECK(toxicity_prob(1.0, 0.5) == doctest::Approx((std::tanh(0.5) + 1.0) / 2.0));
    CHECK_THROWS_AS(toxicity_prob(NAN, 0.0), DomainError);
    CHECK_THROWS_AS(toxicity_prob(1.0, INFINITY), DomainError);
}

TEST_CASE("invert_toxicity examples and boundaries") {
    CHECK(invert_toxicity(0.25, 0.0) == doctest::Approx(2.0));
    CHECK(invert_toxicity(0.5, 0.0) == doctest::Approx(1.0));
    CHECK(invert_toxicity(0.0, 0.3) == kDefaultDomain.upper);
    CHECK(invert_toxicity(1.0, 0.3) == kDefaultDomain.lower);
    CHECK(invert_toxicity(0.999, -2.0) == kDefaultDomain.lower);  // clipped
}

TEST_CASE("round trip a -> p -> a over random points") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> a_dist(0.1, 10.0), d_dist(-1.5, 1.5);
    for (int i = 0; i < 10000; ++i) {
        const double a = a_dist(gen), d = d_dist(gen);
        const double p = toxicity_prob(a, d);
        if (p <= 0.0 || p >= 1.0) continue;
        REQUIRE(std::abs(invert_toxicity(p, d) - a) <= 1e-9);
    }
}

TEST_CASE("toxicity is increasing in d and decreasing in a") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> a_dist(0.1, 10.0), d_dist(-2.0, 2.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = a_dist(gen), d = d_dist(gen), h = 1e-3;
        REQUIRE(toxicity_prob(a, d + h) > toxicity_prob(a, d));
        REQUIRE(toxicity_prob(a + h, d) < toxicity_prob(a, d));
    }
}

TEST_CASE("skeleton reproduces the prior") {
    SUBCASE("a0 = 2") {
        const DoseGrid g = skeleton_from_prior(kPrior, 2.0);
        for (int k = 0; k < 6; ++k) {
            CHECK(std::abs(g.toxicity(k, 2.0) - kPrior[static_cast<std::size_t>(k)]) <= 1e-10);
            if (k > 0) CHECK(g.label(k) > g.label(k - 1));
        }
    }
    SUBCASE("trivial skeletons") {
        CHECK(skeleton_from_prior(std::vector<double>{0.25}, 2.0).label(0) == doctest::Approx(0.0));
        CHECK(skeleton_from_prior(std::vector<double>{0.5}, 1.0).label(0) == doctest::Approx(0.0));
    }
    SUBCASE("non-monotone prior") {
        CHECK_THROWS_AS(skeleton_from_prior(std::vector<double>{0.2, 0.1}, 2.0), ValidationError);
    }
}

TEST_CASE("confidence radius shape") {
    const auto p = RegularityParams::from_radius(0.3, 2.0 / 3.0);
    double previous = INFINITY;
    for (int t = 1; t <= 5000; t += 7) {
        const double r = confidence_radius(t, 6, 0.05, p);
        REQUIRE(r < previous);
        previous = r;
    }
    CHECK(confidence_radius(100000000, 6, 0.05, p) < 1e-2);
    const auto doubled = RegularityParams::from_radius(0.6, 2.0 / 3.0);
    CHECK(confidence_radius(50, 6, 0.05, doubled) ==
          doctest::Approx(2.0 * confidence_radius(50, 6, 0.05, p)));
    CHECK_THROWS_AS(confidence_radius(0, 6, 0.05, p), DomainError);
}

TEST_CASE("admissible set is a prefix, monotone in alpha") {
    const DoseGrid g = skeleton_from_prior(kPrior, 2.0);
    const std::vector<int> five{0, 1, 2, 3, 4};
    CHECK(admissible_set(2.0, 0.0, 0.35, g) == five);
    CHECK(admissible_set(1.0, 1000.0, 0.35, g).size() == 6);
    CHECK(admissible_set(0.5, 0.0, 1.0, g).size() == 6);

    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> a_dist(0.1, 10.0), alpha_dist(0.0, 3.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = a_dist(gen), x = alpha_dist(gen), y = alpha_dist(gen);
        const auto small = admissible_set(a, std::min(x, y), 0.35, g);
        const auto large = admissible_set(a, std::max(x, y), 0.35, g);
        REQUIRE(small.size() <= large.size());
        for (std::size_t k = 0; k < large.size(); ++k) REQUIRE(large[k] == static_cast<int>(k));
        REQUIRE(static_cast<int>(small.size()) == admissible_prefix(a, std::min(x, y), 0.35, g));
    }
}

TEST_CASE("regularity from the model") {
    const DoseGrid g = skeleton_from_prior(kPrior, default_skeleton_a0());
    const auto p = regularity_from_model(g, kDefaultDomain);
    CHECK(p.gamma1 == doctest::Approx(1.5));
    CHECK(p.gamma1_bar == doctest::Approx(2.0 / 3.0));
    CHECK(p.C1_bar == doctest::Approx(std::pow(p.C1, -2.0 / 3.0)));
    const auto wider = regularity_from_model(g, ParameterDomain{0.05, 12.0});
    CHECK(wider.C1 <= p.C1);
    CHECK_THROWS_AS(regularity_from_model(g, ParameterDomain{1.0, 1.0}), DomainError);
}

TEST_CASE("weighted toxicity estimate") {
    const DoseGrid g = skeleton_from_prior(kPrior, 2.0);
    const std::vector<int> N{4, 0, 0, 0, 0, 0}, S{1, 0, 0, 0, 0, 0};
    const auto raw = estimate_toxicity(N, S, g, kDefaultDomain, RateEstimator::Raw);
    CHECK(raw.a_hat == doctest::Approx(invert_toxicity(0.25, g.label(0))));
    const auto corrected = estimate_toxicity(N, S, g);
    CHECK(corrected.a_hat == doctest::Approx(invert_toxicity(1.5 / 5.0, g.label(0))));
    const auto none = estimate_toxicity(std::vector<int>(6, 0), std::vector<int>(6, 0), g);
    CHECK(none.a_hat == kDefaultDomain.upper);
}
