#pragma once
// Live trial sessions. Each session owns one append-only JSONL event log
//   {"event":"create", ...}  {"event":"outcomes", ...}*  {"event":"finalize"}?
// and its in-memory state is always the replay of that log. An event is fsynced
// before the caller sees its effect, so a restart reproduces the same pending
// decision. A torn final line (crash mid-append) is discarded on load.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dosefind/io.hpp"
#include "dosefind/policies.hpp"

namespace dosefind {

inline constexpr std::string_view kSessionSchema = "dosefind.session/v1";

/// What a session is created from. Either `scenario` names a catalogue entry
/// (its skeleton and theta are used, never its true probabilities) or
/// `prior_tox` defines the skeleton directly.
struct SessionSpec {
    PolicyConfig config;
    std::optional<std::string> scenario;
    std::vector<double> prior_tox;
    int cohort_size = 3;

    static SessionSpec from_json(const Json& j);
    Json to_json() const;
};

struct CohortEntry {
    int dose = 0;
    int recommended = 0;
    bool override_dose = false;
    std::vector<Outcome> outcomes;
};

class Session {
public:
    enum class Status { Open, Stopped, Finalized };

    /// Builds the in-memory session; does not touch disk.
    Session(std::string id, std::string created_at, SessionSpec spec);

    const std::string& id() const { return id_; }

    /// Validates a cohort against the pending decision; returns the event line.
    Json check_outcomes(int dose, const std::vector<Outcome>& outcomes, bool override_dose) const;
    void apply_outcomes(int dose, const std::vector<Outcome>& outcomes, bool override_dose);
    void check_finalize() const;
    void apply_finalize();

    Json create_event() const;
    /// Full view: history, pending decision, per-dose diagnostics, final result.
    Json view() const;
    Json recommendation_view() const;
    Json summary() const;

    Status status() const;
    int cohorts() const { return static_cast<int>(history_.size()); }
    const PolicyDecision& pending() const { return pending_; }
    const std::optional<Recommendation>& final_recommendation() const { return final_; }

    /// Single writer, concurrent readers.
    std::shared_mutex& mutex() const { return mutex_; }

private:
    Json decision_json() const;
    Json diagnostics_json() const;

    std::string id_;
    std::string created_at_;
    SessionSpec spec_;
    DoseGrid grid_{{0.0}};
    std::unique_ptr<Policy> policy_;
    PolicyDecision pending_;
    std::vector<CohortEntry> history_;
    std::optional<Recommendation> final_;
    mutable std::shared_mutex mutex_;
};

/// Sessions under one data directory: <dir>/index.json maps ids to log files
/// <dir>/sessions/<id>.jsonl.
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path data_dir);

    /// Returns the new session's id.
    std::string create(const SessionSpec& spec);
    std::vector<Json> list() const;
    Json view(const std::string& id) const;
    Json recommendation(const std::string& id) const;
    Json post_outcomes(const std::string& id, int dose, const std::vector<Outcome>& outcomes,
                       bool override_dose);
    Json finalize(const std::string& id);

    const std::filesystem::path& data_dir() const { return dir_; }

    /// Rebuilds a session from its log alone.
    static std::unique_ptr<Session> replay(const std::filesystem::path& log);

private:
    std::shared_ptr<Session> find(const std::string& id) const;
    std::filesystem::path log_path(const std::string& id) const;
    void append(const std::string& id, const Json& event) const;
    void write_index() const;

    std::filesystem::path dir_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
};

/// Parses [[x, y], ...] with bits in {0, 1}.
std::vector<Outcome> outcomes_from_json(const Json& j);
Json outcomes_to_json(const std::vector<Outcome>& outcomes);

}  // namespace dosefind
