// dosefind: batch simulation, scenario catalogue, saved-trace reports and the
// live-session HTTP service.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dosefind/catalog.hpp"
#include "dosefind/errors.hpp"
#include "dosefind/io.hpp"
#include "dosefind/service.hpp"

using namespace dosefind;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& bytes) {
    if (path.empty() || path == "-") {
        std::cout << bytes;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    out << bytes;
    out.flush();
    if (!out) throw std::ios_base::failure("cannot write " + path);
}

/// A catalogue name, or a path to a scenario JSON file.
Scenario resolve_scenario(const std::string& ref) {
    if (auto s = find_scenario(ref)) return *s;
    std::ifstream probe(ref);
    if (!probe) throw ValidationError("unknown scenario " + ref, "scenario");
    return parse_scenario(read_file(ref));
}

std::vector<PolicyKind> resolve_policies(const std::vector<std::string>& names) {
    std::vector<PolicyKind> kinds;
    for (const std::string& list : names) {
        std::stringstream ss(list);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (name == "all") {
                kinds.insert(kinds.end(), std::begin(kAllPolicyKinds), std::end(kAllPolicyKinds));
            } else if (auto kind = parse_policy_kind(name)) {
                kinds.push_back(*kind);
            } else {
                throw ValidationError("unknown policy " + name, "policy");
            }
        }
    }
    if (kinds.empty()) throw ValidationError("at least one policy is required", "policy");
    return kinds;
}

/// key=value with the value parsed as JSON when possible, else as a string.
void apply_override(Json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("expected key=value, got " + assignment, "set");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    Json parsed = Json::parse(value, nullptr, false);
    cfg[key] = parsed.is_discarded() ? Json(value) : parsed;
}

std::string curves_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "policy,patients,regret,efficacy_per_patient,violation_pct,type1,type2,accuracy\n";
    char buf[256];
    for (const PolicyReport& r : report.policies)
        for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%.6f,%.4f,%.6f,%.6f,%.6f\n",
                          r.policy.c_str(), r.checkpoints[i], r.regret[i],
                          r.efficacy_per_patient[i], r.violation_pct[i], r.type1[i], r.type2[i],
                          r.accuracy[i]);
            out << buf;
        }
    return out.str();
}

std::string render(const BatchResult& batch, const std::string& format) {
    if (format == "traces") return save_batch(batch);
    const ReportDocument doc = make_report(batch);
    return format == "json" ? write_report_json(doc) : write_report_csv(doc.metrics);
}

struct SimulateArgs {
    std::string scenario = "main-setting";
    std::vector<std::string> policies{"seeda"};
    int reps = 1000;
    int n = 300;
    int cohort = 3;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    std::string rule = "empirical";
    std::vector<std::string> overrides;
    std::string curves;
    bool quiet = false;
};

int run_simulate(const SimulateArgs& a) {
    const Scenario scenario = resolve_scenario(a.scenario);
    const TrialOptions options{a.n, a.cohort};
    options.validate();
    if (a.reps < 1) throw ValidationError("must be at least 1", "reps");

    std::vector<PolicyConfig> configs;
    for (PolicyKind kind : resolve_policies(a.policies)) {
        Json cfg{{"kind", policy_name(kind)}, {"recommendation", a.rule}};
        for (const std::string& o : a.overrides) apply_override(cfg, o);
        configs.push_back(config_from_json(cfg));
    }

    BatchResult batch;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        BatchResult one = run_batch(scenario, {configs[i]}, a.reps, options, a.seed);
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        if (!a.quiet)
            std::fprintf(stderr, "[%zu/%zu] %-15s %d reps in %.2fs\n", i + 1, configs.size(),
                         configs[i].display_name().c_str(), a.reps, took.count());
        if (i == 0) {
            batch = std::move(one);
        } else {
            batch.configs.push_back(configs[i]);
            batch.traces.push_back(std::move(one.traces.front()));
        }
    }
    write_output(a.out, render(batch, a.format));
    if (!a.curves.empty()) write_output(a.curves, curves_csv(summarize(batch)));
    return 0;
}

int run_scenarios_list() {
    std::printf("%-16s %2s %5s %8s %8s\n", "name", "K", "theta", "optimal", "plateau");
    for (const Scenario& s : builtin_scenarios())
        std::printf("%-16s %2d %5.2f %8d %8s\n", s.name.c_str(), s.num_doses(), s.theta,
                    s.optimal + 1, s.plateau ? std::to_string(*s.plateau + 1).c_str() : "-");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dose-finding bandit laboratory"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo batch and write a report");
    simulate->add_option("--scenario", sim.scenario, "Catalogue name or scenario JSON file")
        ->capture_default_str();
    simulate->add_option("--policy", sim.policies, "Policy names, comma separated, or 'all'")
        ->capture_default_str();
    simulate->add_option("--reps", sim.reps, "Replications")->capture_default_str();
    simulate->add_option("--n", sim.n, "Patients per trial")->capture_default_str();
    simulate->add_option("--cohort", sim.cohort, "Cohort size")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
    simulate->add_option("--out", sim.out, "Output file (default stdout)");
    simulate->add_option("--format", sim.format, "Report format")
        ->check(CLI::IsMember({"csv", "json", "traces"}))
        ->capture_default_str();
    simulate->add_option("--rule", sim.rule, "SEEDA-family recommendation rule")
        ->check(CLI::IsMember({"empirical", "model"}))
        ->capture_default_str();
    simulate->add_option("--set", sim.overrides, "Config override key=value, applied to every policy");
    simulate->add_option("--curves", sim.curves, "Also write checkpoint curves as CSV");
    simulate->add_flag("--quiet", sim.quiet, "No progress lines");

    auto* scenarios = app.add_subcommand("scenarios", "Inspect the scenario catalogue");
    scenarios->require_subcommand(1);
    auto* list = scenarios->add_subcommand("list", "List built-in scenarios");
    std::string validate_path;
    auto* validate = scenarios->add_subcommand("validate", "Validate a scenario JSON file");
    validate->add_option("file", validate_path)->required();
    std::string show_name;
    auto* show = scenarios->add_subcommand("show", "Print a scenario as JSON");
    show->add_option("name", show_name)->required();

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string data_dir = "dosefind-data";
    std::string static_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Run the live-session HTTP service");
    serve_cmd->add_option("--port", port)->capture_default_str();
    serve_cmd->add_option("--host", host)->capture_default_str();
    serve_cmd->add_option("--data-dir", data_dir, "Session logs directory")
        ->envname("DOSEFIND_DATA_DIR")
        ->capture_default_str();
    serve_cmd->add_option("--static", static_dir, "Directory served at / (console bundle)");

    std::string traces_path, report_out, report_format = "csv";
    auto* report = app.add_subcommand("report", "Re-aggregate traces saved by simulate --format traces");
    report->add_option("--traces", traces_path)->required();
    report->add_option("--out", report_out);
    report->add_option("--format", report_format)
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) return run_simulate(sim);
        if (*list) return run_scenarios_list();
        if (*validate) {
            const Scenario s = parse_scenario(read_file(validate_path));
            std::printf("%s: valid, K=%d, optimal dose %d\n", s.name.c_str(), s.num_doses(),
                        s.optimal + 1);
            return 0;
        }
        if (*show) {
            const auto s = find_scenario(show_name);
            if (!s) throw ValidationError("unknown scenario " + show_name, "scenario");
            std::cout << write_scenario(*s);
            return 0;
        }
        if (*serve_cmd) {
            SessionStore store(data_dir);
            std::fprintf(stderr, "serving %s on http://%s:%d\n", data_dir.c_str(), host.c_str(), port);
            serve(store, host, port,
                  static_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(static_dir));
            return 0;
        }
        if (*report) {
            const BatchResult batch = load_batch(read_file(traces_path));
            write_output(report_out, render(batch, report_format));
            return 0;
        }
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return 0;
}
