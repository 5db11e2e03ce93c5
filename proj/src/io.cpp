#include "dosefind/io.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "dosefind/errors.hpp"

namespace dosefind {

namespace {

void reject_unknown(const Json& j, std::initializer_list<std::string_view> known,
                    const std::string& where) {
    if (!j.is_object()) throw ValidationError("expected an object", where);
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (std::string_view k : known) ok = ok || key == k;
        if (!ok) throw ValidationError("unknown key", where.empty() ? key : where + "." + key);
    }
}

template <class T>
T get(const Json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError("missing required key", key);
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("has the wrong type", key);
    }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    return j.contains(key) ? get<T>(j, key) : fallback;
}

void check_schema(const Json& j, std::string_view expected) {
    const auto schema = get<std::string>(j, "schema");
    if (schema != expected)
        throw ValidationError("expected " + std::string(expected) + ", got " + schema, "schema");
}

Json regularity_to_json(const RegularityParams& p) {
    return Json{{"C1", p.C1},         {"gamma1", p.gamma1},         {"C2", p.C2},
                {"gamma2", p.gamma2}, {"C1_bar", p.C1_bar}, {"gamma1_bar", p.gamma1_bar}};
}

RegularityParams regularity_from_json(const Json& j) {
    reject_unknown(j, {"C1", "gamma1", "C2", "gamma2", "C1_bar", "gamma1_bar"}, "regularity");
    const double C2 = get_or(j, "C2", 1.0);
    const double gamma2 = get_or(j, "gamma2", 1.0);
    if (j.contains("C1") && j.contains("gamma1") && j.contains("C1_bar") &&
        j.contains("gamma1_bar")) {
        RegularityParams p;
        p.C1 = get<double>(j, "C1");
        p.gamma1 = get<double>(j, "gamma1");
        p.C2 = C2;
        p.gamma2 = gamma2;
        p.C1_bar = get<double>(j, "C1_bar");
        p.gamma1_bar = get<double>(j, "gamma1_bar");
        p.validate();
        return p;
    }
    if (j.contains("C1_bar"))
        return RegularityParams::from_radius(get<double>(j, "C1_bar"),
                                             get_or(j, "gamma1_bar", 2.0 / 3.0), C2, gamma2);
    if (j.contains("C1"))
        return RegularityParams::from_constants(get<double>(j, "C1"), get_or(j, "gamma1", 1.5),
                                                C2, gamma2);
    throw ValidationError("needs C1_bar or C1", "regularity");
}

Json recommendation_to_json(const Recommendation& r) {
    return Json{{"dose", r.dose + 1},
                {"flags", flag_names(r.flags)},
                {"toxicity_estimates", r.toxicity_estimates}};
}

std::uint32_t flags_from_json(const Json& names) {
    static constexpr std::uint32_t kBits[] = {
        kFlagForcedInit, kFlagEmptyAdmissible, kFlagNoSafeDose, kFlagPosteriorDegenerate,
        kFlagCapUnmet,   kFlagStopped,         kFlagTruncatedCohort, kFlagDoseOverride};
    std::uint32_t flags = kFlagNone;
    for (const auto& n : names) {
        bool found = false;
        for (std::uint32_t bit : kBits)
            if (flag_names(bit).front() == n.get<std::string>()) {
                flags |= bit;
                found = true;
            }
        if (!found) throw ValidationError("unknown flag " + n.dump(), "flags");
    }
    return flags;
}

Json policy_report_to_json(const PolicyReport& r) {
    return Json{{"policy", r.policy},
                {"rec_mean", r.rec_mean},
                {"rec_std", r.rec_std},
                {"alloc_mean", r.alloc_mean},
                {"alloc_std", r.alloc_std},
                {"checkpoints", r.checkpoints},
                {"regret", r.regret},
                {"efficacy_per_patient", r.efficacy_per_patient},
                {"violation_pct", r.violation_pct},
                {"type1", r.type1},
                {"type2", r.type2},
                {"accuracy", r.accuracy},
                {"unsafe_allocations", r.unsafe_allocations},
                {"no_safe_dose", r.no_safe_dose}};
}

PolicyReport policy_report_from_json(const Json& j) {
    PolicyReport r;
    r.policy = get<std::string>(j, "policy");
    r.rec_mean = get<std::vector<double>>(j, "rec_mean");
    r.rec_std = get<std::vector<double>>(j, "rec_std");
    r.alloc_mean = get<std::vector<double>>(j, "alloc_mean");
    r.alloc_std = get<std::vector<double>>(j, "alloc_std");
    r.checkpoints = get<std::vector<int>>(j, "checkpoints");
    r.regret = get<std::vector<double>>(j, "regret");
    r.efficacy_per_patient = get<std::vector<double>>(j, "efficacy_per_patient");
    r.violation_pct = get<std::vector<double>>(j, "violation_pct");
    r.type1 = get<std::vector<double>>(j, "type1");
    r.type2 = get<std::vector<double>>(j, "type2");
    r.accuracy = get<std::vector<double>>(j, "accuracy");
    r.unsafe_allocations = get<double>(j, "unsafe_allocations");
    r.no_safe_dose = get<int>(j, "no_safe_dose");
    return r;
}

Json trace_to_json(const TrialTrace& t) {
    std::string outcomes;
    outcomes.reserve(t.patients.size() * 2);
    for (const PatientRecord& p : t.patients) {
        outcomes.push_back(p.outcome.efficacy ? '1' : '0');
        outcomes.push_back(p.outcome.toxicity ? '1' : '0');
    }
    Json cohorts = Json::array();
    for (const CohortRecord& c : t.cohorts)
        cohorts.push_back({c.dose + 1, c.size, c.flags, c.admissible_size,
                           c.leader < 0 ? 0 : c.leader + 1});
    Json checkpoints = Json::array();
    for (const Checkpoint& c : t.checkpoints)
        checkpoints.push_back({c.patients, c.recommended + 1, c.type1, c.type2, c.flags});
    return Json{{"cohorts", std::move(cohorts)},
                {"outcomes", std::move(outcomes)},
                {"checkpoints", std::move(checkpoints)},
                {"final", recommendation_to_json(t.final_recommendation)}};
}

TrialTrace trace_from_json(const Json& j, int num_doses) {
    TrialTrace t;
    const auto outcomes = get<std::string>(j, "outcomes");
    t.allocations.assign(static_cast<std::size_t>(num_doses), 0);
    std::size_t cursor = 0;
    for (const auto& c : j.at("cohorts")) {
        CohortRecord rec{c.at(0).get<int>() - 1, c.at(1).get<int>(), c.at(2).get<std::uint32_t>(),
                         c.at(3).get<int>(), c.at(4).get<int>() - 1};
        if (rec.dose < 0 || rec.dose >= num_doses) throw ValidationError("dose out of range", "cohorts");
        for (int i = 0; i < rec.size; ++i, cursor += 2) {
            if (cursor + 1 >= outcomes.size() + 1 || cursor + 2 > outcomes.size())
                throw ValidationError("shorter than the cohort record", "outcomes");
            t.patients.push_back({rec.dose, {outcomes[cursor] == '1', outcomes[cursor + 1] == '1'}});
            ++t.allocations[static_cast<std::size_t>(rec.dose)];
        }
        t.cohorts.push_back(rec);
    }
    if (cursor != outcomes.size()) throw ValidationError("longer than the cohort record", "outcomes");
    for (const auto& c : j.at("checkpoints"))
        t.checkpoints.push_back({c.at(0).get<int>(), c.at(1).get<int>() - 1, c.at(2).get<int>(),
                                 c.at(3).get<int>(), c.at(4).get<std::uint32_t>()});
    const Json& f = j.at("final");
    t.final_recommendation.dose = get<int>(f, "dose") - 1;
    t.final_recommendation.flags = flags_from_json(f.at("flags"));
    t.final_recommendation.toxicity_estimates = get<std::vector<double>>(f, "toxicity_estimates");
    return t;
}

std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    std::string s(buf);
    return s == "-0.00" ? "0.00" : s;
}

}  // namespace

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what(), "document");
    }
}

Json scenario_to_json(const Scenario& s) {
    return Json{{"name", s.name},
                {"theta", s.theta},
                {"tox", s.true_tox},
                {"eff", s.true_eff},
                {"prior_tox", s.prior_tox},
                {"prior_eff", s.prior_eff},
                {"optimal_dose", s.optimal + 1}};
}

Scenario scenario_from_json(const Json& j) {
    reject_unknown(j, {"name", "theta", "tox", "eff", "prior_tox", "prior_eff", "optimal_dose"}, "");
    Scenario s = Scenario::make(get<std::string>(j, "name"), get<std::vector<double>>(j, "tox"),
                                get<std::vector<double>>(j, "eff"), get_or(j, "theta", 0.35),
                                get_or(j, "prior_tox", std::vector<double>{}),
                                get_or(j, "prior_eff", std::vector<double>{}));
    if (j.contains("optimal_dose")) {
        const int declared = get<int>(j, "optimal_dose");
        if (declared != s.optimal + 1)
            throw ValidationError("declared " + std::to_string(declared) + " but the lists give " +
                                      std::to_string(s.optimal + 1),
                                  "optimal_dose");
    }
    return s;
}

Scenario parse_scenario(std::string_view text) { return scenario_from_json(parse_json(text)); }

std::string write_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

Json config_to_json(const PolicyConfig& cfg) {
    Json j{{"kind", policy_name(cfg.kind)},
           {"label", cfg.label},
           {"theta", cfg.theta},
           {"c", cfg.c},
           {"delta", cfg.delta},
           {"eta", cfg.eta},
           {"prior_tox", cfg.prior_tox},
           {"prior_eff", cfg.prior_eff},
           {"mcrm_bands", {cfg.mcrm_bands.under, cfg.mcrm_bands.targeted, cfg.mcrm_bands.excessive}},
           {"mcrm_p_threshold", cfg.mcrm_p_threshold},
           {"crm_prior_rate", cfg.crm_prior_rate},
           {"domain", {cfg.domain.lower, cfg.domain.upper}},
           {"recommendation", rule_name(cfg.recommendation)},
           {"rate", cfg.rate == RateEstimator::Raw ? "raw" : "corrected"}};
    j["regularity"] = cfg.regularity ? regularity_to_json(*cfg.regularity) : Json(nullptr);
    return j;
}

PolicyConfig config_from_json(const Json& j) {
    reject_unknown(j,
                   {"kind", "label", "theta", "c", "delta", "eta", "prior_tox", "prior_eff",
                    "mcrm_bands", "mcrm_p_threshold", "crm_prior_rate", "domain",
                    "recommendation", "rate", "regularity"},
                   "config");
    PolicyConfig cfg;
    const auto kind = parse_policy_kind(get<std::string>(j, "kind"));
    if (!kind) throw ValidationError("unknown policy " + j.at("kind").dump(), "kind");
    cfg.kind = *kind;
    cfg.label = get_or(j, "label", std::string{});
    cfg.theta = get_or(j, "theta", cfg.theta);
    cfg.c = get_or(j, "c", cfg.c);
    cfg.delta = get_or(j, "delta", cfg.delta);
    cfg.eta = get_or(j, "eta", cfg.eta);
    cfg.prior_tox = get_or(j, "prior_tox", cfg.prior_tox);
    cfg.prior_eff = get_or(j, "prior_eff", cfg.prior_eff);
    if (j.contains("mcrm_bands")) {
        const auto b = get<std::vector<double>>(j, "mcrm_bands");
        if (b.size() != 3) throw ValidationError("needs three interior boundaries", "mcrm_bands");
        cfg.mcrm_bands = {b[0], b[1], b[2]};
    }
    cfg.mcrm_p_threshold = get_or(j, "mcrm_p_threshold", cfg.mcrm_p_threshold);
    cfg.crm_prior_rate = get_or(j, "crm_prior_rate", cfg.crm_prior_rate);
    if (j.contains("domain")) {
        const auto d = get<std::vector<double>>(j, "domain");
        if (d.size() != 2) throw ValidationError("needs [lower, upper]", "domain");
        cfg.domain = {d[0], d[1]};
    }
    if (j.contains("recommendation")) {
        const auto rule = parse_recommendation_rule(get<std::string>(j, "recommendation"));
        if (!rule) throw ValidationError("must be model or empirical", "recommendation");
        cfg.recommendation = *rule;
    }
    if (j.contains("rate")) {
        const auto rate = get<std::string>(j, "rate");
        if (rate == "raw")
            cfg.rate = RateEstimator::Raw;
        else if (rate == "corrected")
            cfg.rate = RateEstimator::Corrected;
        else
            throw ValidationError("must be raw or corrected", "rate");
    }
    if (j.contains("regularity") && !j.at("regularity").is_null())
        cfg.regularity = regularity_from_json(j.at("regularity"));
    cfg.validate();
    return cfg;
}

ReportDocument make_report(const BatchResult& batch) {
    ReportDocument doc;
    doc.run = {batch.scenario.name,        batch.seed,          batch.options.n_patients,
               batch.options.cohort_size, batch.replications, batch.configs};
    doc.metrics = summarize(batch);
    return doc;
}

Json report_to_json(const ReportDocument& doc) {
    Json configs = Json::array();
    for (const PolicyConfig& c : doc.run.configs) configs.push_back(config_to_json(c));
    Json policies = Json::array();
    for (const PolicyReport& r : doc.metrics.policies) policies.push_back(policy_report_to_json(r));
    return Json{{"schema", doc.schema},
                {"run",
                 {{"scenario", doc.run.scenario},
                  {"seed", doc.run.seed},
                  {"n", doc.run.n_patients},
                  {"cohort", doc.run.cohort_size},
                  {"reps", doc.run.replications},
                  {"configs", std::move(configs)}}},
                {"policies", std::move(policies)}};
}

ReportDocument report_from_json(const Json& j) {
    check_schema(j, kReportSchema);
    ReportDocument doc;
    const Json& run = j.at("run");
    doc.run.scenario = get<std::string>(run, "scenario");
    doc.run.seed = get<std::uint64_t>(run, "seed");
    doc.run.n_patients = get<int>(run, "n");
    doc.run.cohort_size = get<int>(run, "cohort");
    doc.run.replications = get<int>(run, "reps");
    for (const auto& c : run.at("configs")) doc.run.configs.push_back(config_from_json(c));
    for (const auto& p : j.at("policies"))
        doc.metrics.policies.push_back(policy_report_from_json(p));
    return doc;
}

std::string write_report_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "policy,dose,rec_mean,rec_std,alloc_mean,alloc_std\n";
    for (const PolicyReport& r : report.policies)
        for (std::size_t k = 0; k < r.rec_mean.size(); ++k)
            out << r.policy << ',' << k + 1 << ',' << two_decimals(r.rec_mean[k]) << ','
                << two_decimals(r.rec_std[k]) << ',' << two_decimals(r.alloc_mean[k]) << ','
                << two_decimals(r.alloc_std[k]) << '\n';
    return out.str();
}

std::string write_report_json(const ReportDocument& doc) {
    return report_to_json(doc).dump(2) + "\n";
}

std::string save_batch(const BatchResult& batch) {
    Json configs = Json::array();
    for (const PolicyConfig& c : batch.configs) configs.push_back(config_to_json(c));
    Json traces = Json::array();
    for (const auto& per_policy : batch.traces) {
        Json list = Json::array();
        for (const TrialTrace& t : per_policy) list.push_back(trace_to_json(t));
        traces.push_back(std::move(list));
    }
    return Json{{"schema", kTraceSchema},
                {"scenario", scenario_to_json(batch.scenario)},
                {"seed", batch.seed},
                {"n", batch.options.n_patients},
                {"cohort", batch.options.cohort_size},
                {"reps", batch.replications},
                {"configs", std::move(configs)},
                {"traces", std::move(traces)}}
               .dump() +
           "\n";
}

BatchResult load_batch(std::string_view text) {
    const Json j = parse_json(text);
    check_schema(j, kTraceSchema);
    BatchResult b;
    b.scenario = scenario_from_json(j.at("scenario"));
    b.seed = get<std::uint64_t>(j, "seed");
    b.options = {get<int>(j, "n"), get<int>(j, "cohort")};
    b.options.validate();
    b.replications = get<int>(j, "reps");
    for (const auto& c : j.at("configs")) b.configs.push_back(config_from_json(c));
    const Json& traces = j.at("traces");
    if (traces.size() != b.configs.size())
        throw ValidationError("one trace list per config is required", "traces");
    for (const auto& list : traces) {
        if (static_cast<int>(list.size()) != b.replications)
            throw ValidationError("one trace per replication is required", "traces");
        std::vector<TrialTrace> per_policy;
        for (const auto& t : list) per_policy.push_back(trace_from_json(t, b.scenario.num_doses()));
        b.traces.push_back(std::move(per_policy));
    }
    return b;
}

}  // namespace dosefind
