#include <doctest.h>

#include <cmath>

#include "dosefind/catalog.hpp"
#include "dosefind/errors.hpp"
#include "dosefind/metrics.hpp"

using namespace dosefind;

namespace {

// Hand-built trace on main-setting: doses 1,1,1 | 3,3,3 | 6,6,6 | 3,3,3.
TrialTrace hand_trace() {
    TrialTrace t;
    const int doses[] = {0, 2, 5, 2};
    for (int c = 0; c < 4; ++c) {
        for (int i = 0; i < 3; ++i) t.patients.push_back({doses[c], {false, false}});
        t.cohorts.push_back({doses[c], 3, kFlagNone, -1, -1});
        t.checkpoints.push_back({3 * (c + 1), c < 2 ? 0 : 2, 0, 0, kFlagNone});
    }
    t.final_recommendation.dose = 2;
    t.allocations = {3, 0, 6, 0, 0, 3};
    return t;
}

}  // namespace

TEST_CASE("regret and efficacy curves by direct recomputation") {
    const Scenario s = *find_scenario("main-setting");  // q = .1 .35 .6 .6 .6 .6, q* = .6
    const TrialTrace t = hand_trace();
    const auto R = regret_curve(t, s);
    const auto E = efficacy_curve(t, s);
    REQUIRE(R.size() == 12);
    CHECK(R[2] == doctest::Approx(3 * 0.5));
    CHECK(R[5] == doctest::Approx(1.5));
    CHECK(R[11] == doctest::Approx(1.5));
    CHECK(E[2] == doctest::Approx(0.1));
    CHECK(E[5] == doctest::Approx((0.3 + 1.8) / 6));
    CHECK(E[11] == doctest::Approx((0.3 + 1.8 + 1.8 + 1.8) / 12));
}

TEST_CASE("safety statistics by direct recomputation") {
    const Scenario s = *find_scenario("main-setting");  // p = .01 .05 .15 .2 .45 .6
    const SafetyStats st = safety_stats(hand_trace(), s);
    CHECK(st.unsafe_allocations == 3);
    // running mean toxicity: after 9 patients (0.03 + 0.45 + 1.8) / 9 = 0.2533 <= 0.35
    for (char v : st.violation) CHECK(v == 0);

    const Scenario hot = Scenario::make("hot", {0.05, 0.5, 0.9}, {0.2, 0.4, 0.5});
    TrialTrace t;
    for (int i = 0; i < 4; ++i) t.patients.push_back({i < 1 ? 0 : 2, {}});
    const SafetyStats h = safety_stats(t, hot);
    CHECK(h.violation == std::vector<char>{0, 1, 1, 1});
    CHECK(h.unsafe_allocations == 3);
}

TEST_CASE("type errors against the true safe set") {
    const Scenario s = *find_scenario("main-setting");  // safe: doses 1-4
    const std::vector<double> est{0.01, 0.4, 0.1, 0.2, 0.3, 0.7};
    const TypeErrors e = type_errors(est, s);
    CHECK(e.type1 == 1);
    CHECK(e.type2 == 1);
    CHECK(type_errors(std::vector<double>{}, s).type1 == 0);
}

TEST_CASE("summaries use per-dose percentages with sample deviations") {
    const Scenario s = *find_scenario("main-setting");
    std::vector<TrialTrace> traces{hand_trace(), hand_trace()};
    traces[1].final_recommendation.dose = 3;
    const PolicyReport r = summarize_policy("x", traces, s);
    CHECK(r.rec_mean[2] == doctest::Approx(50.0));
    CHECK(r.rec_mean[3] == doctest::Approx(50.0));
    CHECK(r.rec_std[2] == doctest::Approx(100.0 * std::sqrt(0.5)));
    CHECK(r.alloc_mean[2] == doctest::Approx(50.0));
    CHECK(r.alloc_std[2] == doctest::Approx(0.0));
    double total = 0.0;
    for (double v : r.rec_mean) total += v;
    CHECK(total == doctest::Approx(100.0));
    CHECK(r.unsafe_allocations == doctest::Approx(3.0));
}

TEST_CASE("minimum sample size") {
    const Scenario s = *find_scenario("main-setting");
    std::vector<TrialTrace> traces{hand_trace(), hand_trace()};
    CHECK(min_sample_size(traces, s, 0.8) == 9);  // k* = dose 3 from the third cohort
    traces[1].checkpoints[2].recommended = 0;
    CHECK(min_sample_size(traces, s, 0.8) == 12);
    CHECK(min_sample_size(traces, s, 0.5) == 9);
    traces[1].checkpoints[3].recommended = 0;
    CHECK_FALSE(min_sample_size(traces, s, 0.8).has_value());
    CHECK_THROWS_AS(min_sample_size(traces, s, 1.0), ValidationError);
    CHECK(min_sample_size(traces, s, 0.0) == 6);  // floor of six patients
}
