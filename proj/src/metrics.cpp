#include "dosefind/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dosefind/errors.hpp"

namespace dosefind {

namespace {

constexpr int kMinStoppingPatients = 6;

struct Accumulator {
    std::vector<double> sum, sum_sq;

    explicit Accumulator(std::size_t n) : sum(n, 0.0), sum_sq(n, 0.0) {}
    void add(std::size_t i, double v) {
        sum[i] += v;
        sum_sq[i] += v * v;
    }
    std::vector<double> mean(std::size_t count) const {
        std::vector<double> out(sum.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = sum[i] / static_cast<double>(count);
        return out;
    }
    // Sample standard deviation; zero for a single replication.
    std::vector<double> stddev(std::size_t count) const {
        std::vector<double> out(sum.size(), 0.0);
        if (count < 2) return out;
        const auto n = static_cast<double>(count);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double var = (sum_sq[i] - sum[i] * sum[i] / n) / (n - 1.0);
            out[i] = std::sqrt(std::max(var, 0.0));
        }
        return out;
    }
};

void check_target(double target) {
    if (!(target >= 0.0 && target < 1.0))
        throw ValidationError("must lie in [0,1)", "target_accuracy");
}

}  // namespace

TypeErrors type_errors(std::span<const double> estimates, const Scenario& scenario) {
    TypeErrors e;
    for (std::size_t k = 0; k < estimates.size() && k < scenario.true_tox.size(); ++k) {
        const bool safe = scenario.true_tox[k] <= scenario.theta;
        const bool judged_safe = estimates[k] <= scenario.theta;
        if (safe && !judged_safe) ++e.type1;
        if (!safe && judged_safe) ++e.type2;
    }
    return e;
}

std::vector<double> regret_curve(const TrialTrace& trace, const Scenario& scenario) {
    const double q_star = scenario.optimal_efficacy();
    std::vector<double> out(trace.patients.size());
    double regret = 0.0;
    for (std::size_t t = 0; t < out.size(); ++t) {
        regret += q_star - scenario.true_eff[static_cast<std::size_t>(trace.patients[t].dose)];
        out[t] = regret;
    }
    return out;
}

std::vector<double> efficacy_curve(const TrialTrace& trace, const Scenario& scenario) {
    std::vector<double> out(trace.patients.size());
    double total = 0.0;
    for (std::size_t t = 0; t < out.size(); ++t) {
        total += scenario.true_eff[static_cast<std::size_t>(trace.patients[t].dose)];
        out[t] = total / static_cast<double>(t + 1);
    }
    return out;
}

SafetyStats safety_stats(const TrialTrace& trace, const Scenario& scenario) {
    SafetyStats s;
    s.violation.resize(trace.patients.size());
    double total = 0.0;
    for (std::size_t t = 0; t < trace.patients.size(); ++t) {
        const double p = scenario.true_tox[static_cast<std::size_t>(trace.patients[t].dose)];
        total += p;
        s.violation[t] = total / static_cast<double>(t + 1) > scenario.theta ? 1 : 0;
        if (p > scenario.theta) ++s.unsafe_allocations;
    }
    return s;
}

const PolicyReport* MetricsReport::find(std::string_view policy) const {
    for (const PolicyReport& r : policies)
        if (r.policy == policy) return &r;
    return nullptr;
}

PolicyReport summarize_policy(std::string policy, std::span<const TrialTrace> traces,
                              const Scenario& scenario) {
    if (traces.empty()) throw ValidationError("needs at least one replication", "traces");
    const auto K = static_cast<std::size_t>(scenario.num_doses());
    const std::size_t C = traces.front().checkpoints.size();
    const std::size_t R = traces.size();

    PolicyReport report;
    report.policy = std::move(policy);
    for (const Checkpoint& c : traces.front().checkpoints) report.checkpoints.push_back(c.patients);

    Accumulator rec(K), alloc(K);
    std::vector<double> regret(C, 0.0), efficacy(C, 0.0), violation(C, 0.0), t1(C, 0.0),
        t2(C, 0.0), accuracy(C, 0.0);
    double unsafe = 0.0;
    for (const TrialTrace& trace : traces) {
        if (trace.checkpoints.size() != C)
            throw ValidationError("replications disagree on checkpoints", "traces");
        for (std::size_t k = 0; k < K; ++k) {
            const bool chosen = trace.final_recommendation.dose == static_cast<int>(k);
            rec.add(k, chosen ? 100.0 : 0.0);
            alloc.add(k, 100.0 * trace.allocations[k] / static_cast<double>(trace.n()));
        }
        const auto r = regret_curve(trace, scenario);
        const auto e = efficacy_curve(trace, scenario);
        const SafetyStats s = safety_stats(trace, scenario);
        for (std::size_t c = 0; c < C; ++c) {
            const Checkpoint& cp = trace.checkpoints[c];
            const auto t = static_cast<std::size_t>(cp.patients - 1);
            regret[c] += r[t];
            efficacy[c] += e[t];
            violation[c] += s.violation[t];
            t1[c] += cp.type1;
            t2[c] += cp.type2;
            accuracy[c] += cp.recommended == scenario.optimal ? 1.0 : 0.0;
        }
        unsafe += s.unsafe_allocations;
        if (trace.final_recommendation.flags & kFlagNoSafeDose) ++report.no_safe_dose;
    }
    const auto n = static_cast<double>(R);
    auto scaled = [n](std::vector<double> v, double factor) {
        for (double& x : v) x *= factor / n;
        return v;
    };
    report.rec_mean = rec.mean(R);
    report.rec_std = rec.stddev(R);
    report.alloc_mean = alloc.mean(R);
    report.alloc_std = alloc.stddev(R);
    report.regret = scaled(regret, 1.0);
    report.efficacy_per_patient = scaled(efficacy, 1.0);
    report.violation_pct = scaled(violation, 100.0);
    report.type1 = scaled(t1, 1.0);
    report.type2 = scaled(t2, 1.0);
    report.accuracy = scaled(accuracy, 1.0);
    report.unsafe_allocations = unsafe / n;
    return report;
}

MetricsReport summarize(const BatchResult& batch) {
    MetricsReport report;
    for (std::size_t p = 0; p < batch.configs.size(); ++p)
        report.policies.push_back(
            summarize_policy(batch.configs[p].display_name(), batch.traces[p], batch.scenario));
    return report;
}

std::optional<int> min_sample_size(const PolicyReport& report, double target) {
    check_target(target);
    for (std::size_t c = 0; c < report.checkpoints.size(); ++c)
        if (report.checkpoints[c] >= kMinStoppingPatients && report.accuracy[c] >= target)
            return report.checkpoints[c];
    return std::nullopt;
}

std::optional<int> min_sample_size(std::span<const TrialTrace> traces, const Scenario& scenario,
                                   double target) {
    check_target(target);
    if (traces.empty()) return std::nullopt;
    const std::size_t C = traces.front().checkpoints.size();
    for (std::size_t c = 0; c < C; ++c) {
        const int patients = traces.front().checkpoints[c].patients;
        if (patients < kMinStoppingPatients) continue;
        std::size_t correct = 0;
        for (const TrialTrace& t : traces)
            correct += t.checkpoints.at(c).recommended == scenario.optimal ? 1 : 0;
        if (static_cast<double>(correct) >= target * static_cast<double>(traces.size()))
            return patients;
    }
    return std::nullopt;
}

}  // namespace dosefind
