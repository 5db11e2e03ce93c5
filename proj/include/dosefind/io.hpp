#pragma once
// Wire formats. Documents are JSON with a versioned "schema" field; dose
// indices are one-based in every document and zero-based in memory.

#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "dosefind/engine.hpp"
#include "dosefind/metrics.hpp"
#include "dosefind/scenario.hpp"

namespace dosefind {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kReportSchema = "dosefind.report/v1";
inline constexpr std::string_view kTraceSchema = "dosefind.traces/v1";

// Scenario files: {name, theta, tox, eff, prior_tox, prior_eff} plus an optional
// declared "optimal_dose" that must agree with the recomputed one.
Json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const Json& j);
Scenario parse_scenario(std::string_view text);
std::string write_scenario(const Scenario& s);

Json config_to_json(const PolicyConfig& cfg);
/// Missing keys take their defaults; "kind" is required.
PolicyConfig config_from_json(const Json& j);

struct RunMetadata {
    std::string scenario;
    std::uint64_t seed = 0;
    int n_patients = 0;
    int cohort_size = 0;
    int replications = 0;
    std::vector<PolicyConfig> configs;

    friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct ReportDocument {
    std::string schema{kReportSchema};
    RunMetadata run;
    MetricsReport metrics;

    friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

ReportDocument make_report(const BatchResult& batch);
Json report_to_json(const ReportDocument& doc);
ReportDocument report_from_json(const Json& j);

/// policy,dose,rec_mean,rec_std,alloc_mean,alloc_std with two decimals.
std::string write_report_csv(const MetricsReport& report);
std::string write_report_json(const ReportDocument& doc);

/// Full batch including every trace, for later re-aggregation.
std::string save_batch(const BatchResult& batch);
BatchResult load_batch(std::string_view text);

/// Parses `text`, converting syntax errors to ValidationError.
Json parse_json(std::string_view text);

}  // namespace dosefind
