#include "dosefind/session.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "dosefind/catalog.hpp"
#include "dosefind/errors.hpp"
#include "dosefind/posterior.hpp"

namespace dosefind {

namespace fs = std::filesystem;

namespace {

// Deterministic designs only: the log alone must determine every decision.
void require_live_design(PolicyKind kind) {
    if (is_randomized(kind))
        throw ValidationError("randomized designs cannot be conducted as live sessions", "kind");
}

std::string iso_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%FT%TZ", &utc);
    return buf;
}

[[noreturn]] void io_failure(const std::string& what, const fs::path& path) {
    throw std::runtime_error(what + " " + path.string() + ": " + std::strerror(errno));
}

void write_durably(const fs::path& path, const std::string& bytes, bool append) {
    const int flags = O_WRONLY | O_CREAT | O_CLOEXEC | (append ? O_APPEND : O_TRUNC);
    const int fd = ::open(path.c_str(), flags, 0644);
    if (fd < 0) io_failure("cannot open", path);
    std::size_t done = 0;
    while (done < bytes.size()) {
        const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            io_failure("cannot write", path);
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        io_failure("cannot sync", path);
    }
    ::close(fd);
}

void sync_directory(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

Json json_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::vector<Outcome> outcomes_from_json(const Json& j) {
    if (!j.is_array()) throw ValidationError("must be a list of [efficacy, toxicity] pairs", "outcomes");
    std::vector<Outcome> out;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != 2)
            throw ValidationError("each row must be [efficacy, toxicity]", "outcomes");
        bool bits[2];
        for (int i = 0; i < 2; ++i) {
            const Json& b = row[static_cast<std::size_t>(i)];
            if (!b.is_number_integer() || (b.get<long>() != 0 && b.get<long>() != 1))
                throw ValidationError("outcome bits must be 0 or 1", "outcomes");
            bits[i] = b.get<long>() == 1;
        }
        out.push_back({bits[0], bits[1]});
    }
    return out;
}

Json outcomes_to_json(const std::vector<Outcome>& outcomes) {
    Json out = Json::array();
    for (const Outcome& o : outcomes) out.push_back({o.efficacy ? 1 : 0, o.toxicity ? 1 : 0});
    return out;
}

SessionSpec SessionSpec::from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("expected an object", "body");
    for (const auto& [key, value] : j.items())
        if (key != "schema" && key != "config" && key != "scenario" && key != "prior_tox" &&
            key != "cohort_size")
            throw ValidationError("unknown key", key);
    if (j.contains("schema") && j.at("schema") != kSessionSchema)
        throw ValidationError("expected " + std::string(kSessionSchema), "schema");
    if (!j.contains("config")) throw ValidationError("missing required key", "config");
    SessionSpec spec;
    spec.config = config_from_json(j.at("config"));
    require_live_design(spec.config.kind);
    try {
        if (j.contains("scenario")) spec.scenario = j.at("scenario").get<std::string>();
        if (j.contains("prior_tox")) spec.prior_tox = j.at("prior_tox").get<std::vector<double>>();
        if (j.contains("cohort_size")) spec.cohort_size = j.at("cohort_size").get<int>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError("has the wrong type", "body");
    }
    if (spec.cohort_size < 1) throw ValidationError("must be at least 1", "cohort_size");
    if (spec.scenario.has_value() == !spec.prior_tox.empty())
        throw ValidationError("give exactly one of scenario and prior_tox", "scenario");
    if (spec.scenario) {
        const auto s = find_scenario(*spec.scenario);
        if (!s) throw ValidationError("unknown scenario " + *spec.scenario, "scenario");
    } else {
        if (spec.prior_tox.size() < 2) throw ValidationError("needs at least two doses", "prior_tox");
        double previous = 0.0;
        for (double p : spec.prior_tox) {
            if (!(p > 0.0 && p < 1.0) || p <= previous)
                throw ValidationError("must be strictly increasing in (0,1)", "prior_tox");
            previous = p;
        }
    }
    return spec;
}

Json SessionSpec::to_json() const {
    Json j{{"config", config_to_json(config)}, {"cohort_size", cohort_size}};
    if (scenario)
        j["scenario"] = *scenario;
    else
        j["prior_tox"] = prior_tox;
    return j;
}

// ---------------------------------------------------------------------------

Session::Session(std::string id, std::string created_at, SessionSpec spec)
    : id_(std::move(id)), created_at_(std::move(created_at)), spec_(std::move(spec)) {
    require_live_design(spec_.config.kind);
    if (spec_.scenario) {
        const auto s = find_scenario(*spec_.scenario);
        if (!s) throw ValidationError("unknown scenario " + *spec_.scenario, "scenario");
        grid_ = s->grid;
        spec_.config.theta = s->theta;  // as in run_trial
    } else {
        grid_ = skeleton_from_prior(spec_.prior_tox, default_skeleton_a0());
    }
    policy_ = make_policy(spec_.config, grid_);
    RngStream unused(StreamId{}, Substream::Allocation);
    pending_ = policy_->select(unused);
}

Session::Status Session::status() const {
    if (final_) return Status::Finalized;
    if (pending_.flags & kFlagStopped) return Status::Stopped;
    return Status::Open;
}

Json Session::check_outcomes(int dose, const std::vector<Outcome>& outcomes,
                             bool override_dose) const {
    if (final_) throw ConflictError("session " + id_ + " is finalized");
    if (pending_.flags & kFlagStopped)
        throw ConflictError("the design has stopped; finalize session " + id_);
    if (dose < 0 || dose >= grid_.size())
        throw ValidationError("must lie in 1.." + std::to_string(grid_.size()), "dose");
    if (static_cast<int>(outcomes.size()) != spec_.cohort_size)
        throw ValidationError("expected " + std::to_string(spec_.cohort_size) + " rows, got " +
                                  std::to_string(outcomes.size()),
                              "outcomes");
    if (dose != pending_.dose && !override_dose)
        throw ValidationError("dose " + std::to_string(dose + 1) + " differs from the pending " +
                                  std::to_string(pending_.dose + 1) + "; set override to proceed",
                              "dose");
    return Json{{"event", "outcomes"},
                {"seq", history_.size() + 1},
                {"dose", dose + 1},
                {"override", dose != pending_.dose},
                {"outcomes", outcomes_to_json(outcomes)}};
}

void Session::apply_outcomes(int dose, const std::vector<Outcome>& outcomes, bool override_dose) {
    (void)check_outcomes(dose, outcomes, override_dose);
    history_.push_back({dose, pending_.dose, dose != pending_.dose, outcomes});
    policy_->observe(dose, outcomes);
    RngStream unused(StreamId{}, Substream::Allocation);
    pending_ = policy_->select(unused);
}

void Session::check_finalize() const {
    if (final_) throw ConflictError("session " + id_ + " is already finalized");
    if (status() != Status::Stopped && cohorts() < grid_.size())
        throw ConflictError("finalizing needs at least " + std::to_string(grid_.size()) +
                            " cohorts; " + std::to_string(cohorts()) + " recorded");
}

void Session::apply_finalize() {
    check_finalize();
    RngStream unused(StreamId{}, Substream::Recommendation);
    final_ = policy_->recommend(unused);
}

Json Session::create_event() const {
    Json j{{"event", "create"}, {"session_id", id_}, {"created_at", created_at_}};
    const Json spec = spec_.to_json();
    for (const auto& [key, value] : spec.items()) j[key] = value;
    return j;
}

Json Session::decision_json() const {
    if (final_ || status() == Status::Stopped) return nullptr;
    Json j{{"dose", pending_.dose + 1}, {"flags", flag_names(pending_.flags)}};
    if (pending_.admissible_size >= 0) {
        Json admissible = Json::array();
        for (int k = 0; k < pending_.admissible_size; ++k) admissible.push_back(k + 1);
        j["admissible"] = std::move(admissible);
        j["a_hat"] = pending_.a_hat;
        j["alpha"] = pending_.alpha;
    } else {
        j["admissible"] = nullptr;
    }
    j["leader"] = pending_.leader >= 0 ? Json(pending_.leader + 1) : Json(nullptr);
    Json index = Json::array();
    for (double v : pending_.index_values) index.push_back(json_or_null(v));
    j["index_values"] = std::move(index);
    return j;
}

Json Session::diagnostics_json() const {
    const TrialState& s = policy_->state();
    const ToxicityEstimate est = estimate_toxicity(s.allocations, s.toxicity_events, grid_,
                                                   spec_.config.domain, spec_.config.rate);
    Json model = Json::array();
    for (int k = 0; k < grid_.size(); ++k) model.push_back(grid_.toxicity(k, est.a_hat));
    return Json{{"patients", s.patients},
                {"allocations", s.allocations},
                {"efficacy_rate", s.efficacy_means()},
                {"toxicity_rate", s.toxicity_means()},
                {"a_hat", est.a_hat},
                {"model_toxicity", std::move(model)}};
}

Json Session::summary() const {
    static constexpr const char* kStatus[] = {"open", "stopped", "finalized"};
    return Json{{"session_id", id_},
                {"created_at", created_at_},
                {"policy", spec_.config.display_name()},
                {"status", kStatus[static_cast<int>(status())]},
                {"num_doses", grid_.size()},
                {"cohort_size", spec_.cohort_size},
                {"cohorts", cohorts()}};
}

Json Session::recommendation_view() const {
    Json j{{"schema", kSessionSchema}, {"session_id", id_}};
    j["status"] = summary()["status"];
    j["next"] = decision_json();
    j["diagnostics"] = diagnostics_json();
    return j;
}

Json Session::view() const {
    Json j{{"schema", kSessionSchema}};
    const Json head = summary();
    for (const auto& [key, value] : head.items()) j[key] = value;
    j["theta"] = spec_.config.theta;
    j["config"] = config_to_json(spec_.config);
    if (spec_.scenario) j["scenario"] = *spec_.scenario;
    Json cohorts = Json::array();
    for (std::size_t i = 0; i < history_.size(); ++i)
        cohorts.push_back({{"index", i + 1},
                           {"dose", history_[i].dose + 1},
                           {"recommended", history_[i].recommended + 1},
                           {"override", history_[i].override_dose},
                           {"outcomes", outcomes_to_json(history_[i].outcomes)}});
    j["history"] = std::move(cohorts);
    j["next"] = decision_json();
    j["diagnostics"] = diagnostics_json();
    if (final_)
        j["final"] = {{"dose", final_->dose + 1},
                      {"flags", flag_names(final_->flags)},
                      {"toxicity_estimates", final_->toxicity_estimates}};
    else
        j["final"] = nullptr;
    return j;
}

// ---------------------------------------------------------------------------

SessionStore::SessionStore(fs::path data_dir) : dir_(std::move(data_dir)) {
    fs::create_directories(dir_ / "sessions");
    const fs::path index = dir_ / "index.json";
    if (!fs::exists(index)) return;
    std::ifstream in(index);
    std::stringstream buf;
    buf << in.rdbuf();
    const Json j = parse_json(buf.str());
    next_id_ = j.value("next_id", std::uint64_t{1});
    for (const auto& [id, file] : j.at("sessions").items()) {
        auto session = replay(dir_ / file.get<std::string>());
        if (session->id() != id) throw ValidationError("log does not match its index entry", id);
        sessions_.emplace(id, std::move(session));
    }
}

fs::path SessionStore::log_path(const std::string& id) const {
    return dir_ / "sessions" / (id + ".jsonl");
}

void SessionStore::append(const std::string& id, const Json& event) const {
    write_durably(log_path(id), event.dump() + "\n", true);
}

void SessionStore::write_index() const {
    Json map = Json::object();
    for (const auto& [id, session] : sessions_) map[id] = "sessions/" + id + ".jsonl";
    const Json doc{{"schema", "dosefind.index/v1"}, {"next_id", next_id_}, {"sessions", map}};
    const fs::path tmp = dir_ / "index.json.tmp";
    write_durably(tmp, doc.dump(2) + "\n", false);
    fs::rename(tmp, dir_ / "index.json");
    sync_directory(dir_);
}

std::unique_ptr<Session> SessionStore::replay(const fs::path& log) {
    std::ifstream in(log, std::ios::binary);
    if (!in) throw NotFoundError("missing session log " + log.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    std::unique_ptr<Session> session;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = text.find('\n', start);
        if (end == std::string::npos) break;  // torn append
        const Json e = parse_json(std::string_view(text).substr(start, end - start));
        start = end + 1;
        const std::string kind = e.at("event").get<std::string>();
        if (kind == "create") {
            if (session) throw ValidationError("duplicate create event", "event");
            Json body = e;
            const auto id = body.at("session_id").get<std::string>();
            const auto created = body.at("created_at").get<std::string>();
            for (const char* k : {"event", "session_id", "created_at"}) body.erase(k);
            session = std::make_unique<Session>(id, created, SessionSpec::from_json(body));
        } else if (!session) {
            throw ValidationError("log must start with a create event", "event");
        } else if (kind == "outcomes") {
            session->apply_outcomes(e.at("dose").get<int>() - 1, outcomes_from_json(e.at("outcomes")),
                                    e.at("override").get<bool>());
        } else if (kind == "finalize") {
            session->apply_finalize();
        } else {
            throw ValidationError("unknown event " + kind, "event");
        }
    }
    if (!session) throw ValidationError("empty session log", log.string());
    return session;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("no session " + id);
    return it->second;
}

std::string SessionStore::create(const SessionSpec& spec) {
    std::unique_lock lock(map_mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_));
    const std::string id = buf;
    auto session = std::make_shared<Session>(id, iso_now(), spec);
    write_durably(log_path(id), session->create_event().dump() + "\n", false);
    ++next_id_;
    sessions_.emplace(id, std::move(session));
    write_index();
    return id;
}

std::vector<Json> SessionStore::list() const {
    std::vector<std::shared_ptr<Session>> all;
    {
        std::shared_lock lock(map_mutex_);
        for (const auto& [id, s] : sessions_) all.push_back(s);
    }
    std::vector<Json> out;
    for (const auto& s : all) {
        std::shared_lock lock(s->mutex());
        out.push_back(s->summary());
    }
    return out;
}

Json SessionStore::view(const std::string& id) const {
    const auto s = find(id);
    std::shared_lock lock(s->mutex());
    return s->view();
}

Json SessionStore::recommendation(const std::string& id) const {
    const auto s = find(id);
    std::shared_lock lock(s->mutex());
    return s->recommendation_view();
}

Json SessionStore::post_outcomes(const std::string& id, int dose,
                                 const std::vector<Outcome>& outcomes, bool override_dose) {
    const auto s = find(id);
    std::unique_lock lock(s->mutex());
    append(id, s->check_outcomes(dose, outcomes, override_dose));
    s->apply_outcomes(dose, outcomes, override_dose);
    return s->recommendation_view();
}

Json SessionStore::finalize(const std::string& id) {
    const auto s = find(id);
    std::unique_lock lock(s->mutex());
    s->check_finalize();
    append(id, Json{{"event", "finalize"}});
    s->apply_finalize();
    return s->view();
}

}  // namespace dosefind
