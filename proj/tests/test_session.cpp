#include <doctest.h>
#include <httplib.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "dosefind/errors.hpp"
#include "dosefind/service.hpp"
#include "support/oracles.hpp"

using namespace dosefind;
namespace fs = std::filesystem;

namespace {

Json seeda_body(const std::string& kind = "seeda") {
    return Json{{"schema", kSessionSchema},
                {"config", {{"kind", kind}}},
                {"prior_tox", {0.02, 0.06, 0.12, 0.20, 0.30, 0.40}},
                {"cohort_size", 3}};
}

std::vector<Outcome> zeros(int n = 3) { return std::vector<Outcome>(static_cast<std::size_t>(n)); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Dir {
    fs::path path = oracle::scratch_dir("session");
    ~Dir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("creation") {
    Dir dir;
    SessionStore store(dir.path);
    const std::string a = store.create(SessionSpec::from_json(seeda_body()));
    const std::string b = store.create(SessionSpec::from_json(seeda_body("seeda-plateau")));
    CHECK(a != b);
    CHECK(store.recommendation(a).at("next").at("dose") == 1);
    CHECK(store.list().size() == 2);
    CHECK(fs::exists(dir.path / "index.json"));

    Json bad = seeda_body();
    bad["config"]["theta"] = 1.2;
    CHECK_THROWS_AS(SessionSpec::from_json(bad), ValidationError);
    CHECK_THROWS_AS(SessionSpec::from_json(seeda_body("independent-ts")), ValidationError);
    Json both = seeda_body();
    both["scenario"] = "main-setting";
    CHECK_THROWS_AS(SessionSpec::from_json(both), ValidationError);
    CHECK_THROWS_AS(store.view("s999999"), NotFoundError);
}

TEST_CASE("initialisation cohorts then the SEEDA index decision") {
    Dir dir;
    SessionStore store(dir.path);
    const std::string id = store.create(SessionSpec::from_json(seeda_body()));
    for (int k = 0; k < 6; ++k) {
        CHECK(store.recommendation(id).at("next").at("dose") == k + 1);
        store.post_outcomes(id, k, zeros(), false);
    }
    // Independent evaluation: every dose has N = 3, no events, so every index is
    // sqrt(2.2 log 18 / 3) and the lowest admissible dose wins; the admissible
    // prefix follows from p_hat = 0.5 / 4 at each dose.
    const std::vector<double> prior{0.02, 0.06, 0.12, 0.20, 0.30, 0.40};
    const double a0 = default_skeleton_a0();
    double a_hat = 0.0;
    for (double p : prior) a_hat += std::log(0.125) / (std::log(p) / a0) / 6.0;
    const double alpha = 0.3 * 6 * std::cbrt(std::log(240.0) / 36.0);
    int m = 0;
    for (double p : prior) m += std::pow(p, (a_hat + alpha) / a0) <= 0.35 ? 1 : 0;

    const Json next = store.recommendation(id).at("next");
    CHECK(next.at("a_hat").get<double>() == doctest::Approx(a_hat).epsilon(1e-12));
    CHECK(next.at("alpha").get<double>() == doctest::Approx(alpha).epsilon(1e-12));
    CHECK(next.at("admissible").size() == static_cast<std::size_t>(m));
    CHECK(next.at("dose") == 1);
    CHECK(next.at("index_values")[0].get<double>() ==
          doctest::Approx(std::sqrt(2.2 * std::log(18.0) / 3.0)));
}

TEST_CASE("outcome validation and overrides") {
    Dir dir;
    SessionStore store(dir.path);
    const std::string id = store.create(SessionSpec::from_json(seeda_body()));
    CHECK_THROWS_AS(store.post_outcomes(id, 0, zeros(2), false), ValidationError);
    CHECK_THROWS_AS(store.post_outcomes(id, 3, zeros(), false), ValidationError);
    CHECK_THROWS_AS(store.post_outcomes(id, 9, zeros(), true), ValidationError);
    CHECK_THROWS_AS(outcomes_from_json(Json::parse("[[0,2],[0,0],[1,1]]")), ValidationError);
    CHECK_THROWS_AS(outcomes_from_json(Json::parse("[[0],[0,0],[1,1]]")), ValidationError);
    CHECK_THROWS_AS(outcomes_from_json(Json::parse("[[true,0]]")), ValidationError);

    store.post_outcomes(id, 3, zeros(), true);
    const Json v = store.view(id);
    CHECK(v.at("history")[0].at("override") == true);
    CHECK(v.at("history")[0].at("dose") == 4);
    CHECK(v.at("history")[0].at("recommended") == 1);
    CHECK(v.at("diagnostics").at("allocations")[3] == 3);
    CHECK(v.at("next").at("dose") == 1);  // dose 1 still unsampled
}

TEST_CASE("finalisation") {
    Dir dir;
    SessionStore store(dir.path);
    const std::string id = store.create(SessionSpec::from_json(seeda_body()));
    for (int k = 0; k < 5; ++k) store.post_outcomes(id, k, zeros(), false);
    CHECK_THROWS_AS(store.finalize(id), ConflictError);
    store.post_outcomes(id, 5, zeros(), false);
    const Json fin = store.finalize(id);
    CHECK(fin.at("status") == "finalized");
    CHECK(fin.at("next").is_null());
    CHECK(fin.at("final").at("dose").get<int>() >= 1);
    CHECK_THROWS_AS(store.finalize(id), ConflictError);
    CHECK_THROWS_AS(store.post_outcomes(id, 0, zeros(), true), ConflictError);
}

TEST_CASE("reads do not mutate and restarts replay the log") {
    Dir dir;
    std::string id;
    Json before;
    {
        SessionStore store(dir.path);
        id = store.create(SessionSpec::from_json(seeda_body("seeda-plateau")));
        for (int c = 0; c < 14; ++c) {
            const int dose = store.recommendation(id).at("next").at("dose").get<int>() - 1;
            std::vector<Outcome> o{{c % 2 == 0, false}, {true, c % 5 == 0}, {false, false}};
            store.post_outcomes(id, dose, o, false);
        }
        const std::string log_before = slurp(dir.path / "sessions" / (id + ".jsonl"));
        before = store.view(id);
        CHECK(store.view(id) == before);
        CHECK(store.recommendation(id) == store.recommendation(id));
        CHECK(slurp(dir.path / "sessions" / (id + ".jsonl")) == log_before);
    }
    SessionStore reopened(dir.path);
    CHECK(reopened.view(id) == before);

    // A torn append is ignored.
    {
        std::ofstream log(dir.path / "sessions" / (id + ".jsonl"), std::ios::app);
        log << R"({"event":"outcomes","seq":15,"do)";
    }
    CHECK(SessionStore(dir.path).view(id) == before);
}

TEST_CASE("an event appended without a response is applied on restart") {
    Dir dir;
    std::string id;
    Json expected;
    {
        SessionStore store(dir.path);
        id = store.create(SessionSpec::from_json(seeda_body()));
        for (int k = 0; k < 6; ++k) store.post_outcomes(id, k, zeros(), false);
        // What the live service would have answered.
        SessionStore shadow(oracle::scratch_dir("shadow"));
        const std::string sid = shadow.create(SessionSpec::from_json(seeda_body()));
        for (int k = 0; k < 6; ++k) shadow.post_outcomes(sid, k, zeros(), false);
        const int dose = shadow.recommendation(sid).at("next").at("dose").get<int>();
        expected = shadow.post_outcomes(sid, dose - 1, zeros(), false).at("next");
        fs::remove_all(shadow.data_dir());
        // The crash: event durable, state never updated in memory.
        std::ofstream log(dir.path / "sessions" / (id + ".jsonl"), std::ios::app);
        log << Json{{"event", "outcomes"}, {"seq", 7}, {"dose", dose}, {"override", false},
                    {"outcomes", outcomes_to_json(zeros())}}
                   .dump()
            << "\n";
    }
    SessionStore restarted(dir.path);
    CHECK(restarted.recommendation(id).at("next") == expected);
}

TEST_CASE("simulated trials replay through sessions") {
    const Scenario s = *find_scenario("main-setting");
    const PolicyKind kinds[] = {PolicyKind::Seeda, PolicyKind::SeedaPlateau, PolicyKind::Ucb1,
                                PolicyKind::KlUcb, PolicyKind::Crm,          PolicyKind::Mcrm};
    for (PolicyKind kind : kinds)
        for (RecommendationRule rule : {RecommendationRule::Model, RecommendationRule::Empirical}) {
            PolicyConfig cfg{.kind = kind};
            cfg.recommendation = rule;
            CAPTURE(cfg.display_name());
            CAPTURE(rule_name(rule));
            for (std::uint64_t rep = 0; rep < 3; ++rep) {
                const TrialTrace t = run_trial(s, cfg, TrialOptions{150, 3}, trial_stream(8, rep, cfg));
                const fs::path dir = oracle::scratch_dir("replay");
                const auto r = oracle::replay_through_sessions(t, "main-setting", cfg, 3, dir);
                fs::remove_all(dir);
                CHECK(r.first_mismatch == -1);
                CHECK(r.final_matches);
            }
        }
}

TEST_CASE("HTTP surface") {
    Dir dir;
    fs::create_directories(dir.path / "www");
    { std::ofstream(dir.path / "www" / "index.html") << "<html>console</html>"; }
    SessionStore store(dir.path / "data");
    httplib::Server server;
    register_routes(server, store, dir.path / "www");
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);

    auto json_of = [](const httplib::Result& r) { return Json::parse(r->body); };

    auto created = client.Post("/sessions", seeda_body().dump(), "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json_of(created).at("session_id");
    CHECK(json_of(created).at("schema") == kSessionSchema);

    Json bad = seeda_body();
    bad["config"]["theta"] = 1.2;
    auto rejected = client.Post("/sessions", bad.dump(), "application/json");
    CHECK(rejected->status == 422);
    CHECK(json_of(rejected).at("error").at("field") == "theta");
    CHECK(client.Post("/sessions", "{oops", "application/json")->status == 422);

    CHECK(client.Get("/sessions/s424242")->status == 404);
    CHECK(client.Get("/sessions/" + id + "/recommendation")->status == 200);
    CHECK(json_of(client.Get("/sessions/" + id + "/recommendation")).at("next").at("dose") == 1);

    const Json post{{"dose", 1}, {"outcomes", {{0, 0}, {1, 0}, {0, 1}}}};
    auto posted = client.Post("/sessions/" + id + "/outcomes", post.dump(), "application/json");
    CHECK(posted->status == 200);
    CHECK(json_of(posted).at("next").at("dose") == 2);
    const Json bits{{"dose", 2}, {"outcomes", {{0, 3}, {1, 0}, {0, 1}}}};
    CHECK(client.Post("/sessions/" + id + "/outcomes", bits.dump(), "application/json")->status == 422);
    const Json mismatch{{"dose", 4}, {"outcomes", {{0, 0}, {0, 0}, {0, 0}}}};
    CHECK(client.Post("/sessions/" + id + "/outcomes", mismatch.dump(), "application/json")->status == 422);
    CHECK(client.Post("/sessions/" + id + "/finalize", "", "application/json")->status == 409);

    for (int k = 2; k <= 6; ++k) {
        const Json c{{"dose", k}, {"outcomes", {{0, 0}, {0, 0}, {0, 0}}}};
        client.Post("/sessions/" + id + "/outcomes", c.dump(), "application/json");
    }
    auto fin = client.Post("/sessions/" + id + "/finalize", "", "application/json");
    CHECK(fin->status == 200);
    CHECK(json_of(fin).at("final").at("dose").is_number_integer());
    CHECK(client.Post("/sessions/" + id + "/finalize", "", "application/json")->status == 409);
    const Json late{{"dose", 1}, {"outcomes", {{0, 0}, {0, 0}, {0, 0}}}};
    CHECK(client.Post("/sessions/" + id + "/outcomes", late.dump(), "application/json")->status == 409);

    auto listed = client.Get("/sessions");
    CHECK(json_of(listed).at("sessions").size() == 1);
    auto page = client.Get("/index.html");
    CHECK(page->status == 200);
    CHECK(page->body.find("console") != std::string::npos);

    server.stop();
    worker.join();
}
