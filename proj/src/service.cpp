#include "dosefind/service.hpp"

#include <httplib.h>

#include <functional>
#include <stdexcept>

#include "dosefind/errors.hpp"

namespace dosefind {

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", kJson);
}

void send_error(httplib::Response& res, int status, const std::string& message,
                const std::string& field = {}) {
    Json error{{"status", status}, {"message", message}};
    if (!field.empty()) error["field"] = field;
    send(res, status, Json{{"schema", kSessionSchema}, {"error", std::move(error)}});
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
        try {
            inner(req, res);
        } catch (const ValidationError& e) {
            send_error(res, 422, e.what(), e.field());
        } catch (const DomainError& e) {
            send_error(res, 422, e.what());
        } catch (const NotFoundError& e) {
            send_error(res, 404, e.what());
        } catch (const ConflictError& e) {
            send_error(res, 409, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    };
}

Json body_of(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    Json j = parse_json(req.body);
    if (!j.is_object()) throw ValidationError("request body must be an object", "body");
    if (j.contains("schema") && j.at("schema") != kSessionSchema)
        throw ValidationError("expected " + std::string(kSessionSchema), "schema");
    return j;
}

Json with_schema(Json j) {
    if (!j.contains("schema")) j["schema"] = kSessionSchema;
    return j;
}

}  // namespace

void register_routes(httplib::Server& server, SessionStore& store,
                     const std::optional<std::filesystem::path>& static_dir) {
    server.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const std::string id = store.create(SessionSpec::from_json(body_of(req)));
        send(res, 201, store.view(id));
    }));

    server.Get("/sessions", guarded([&store](const httplib::Request&, httplib::Response& res) {
        Json list = Json::array();
        for (Json& s : store.list()) list.push_back(std::move(s));
        send(res, 200, Json{{"schema", kSessionSchema}, {"sessions", std::move(list)}});
    }));

    server.Get(R"(/sessions/([A-Za-z0-9_-]+))",
               guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   send(res, 200, store.view(req.matches[1]));
               }));

    server.Get(R"(/sessions/([A-Za-z0-9_-]+)/recommendation)",
               guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   send(res, 200, store.recommendation(req.matches[1]));
               }));

    server.Post(R"(/sessions/([A-Za-z0-9_-]+)/outcomes)",
                guarded([&store](const httplib::Request& req, httplib::Response& res) {
                    const Json body = body_of(req);
                    for (const auto& [key, value] : body.items())
                        if (key != "schema" && key != "dose" && key != "outcomes" &&
                            key != "override")
                            throw ValidationError("unknown key", key);
                    if (!body.contains("dose") || !body.at("dose").is_number_integer())
                        throw ValidationError("must be an integer dose level", "dose");
                    if (!body.contains("outcomes"))
                        throw ValidationError("missing required key", "outcomes");
                    bool override_dose = false;
                    if (body.contains("override")) {
                        if (!body.at("override").is_boolean())
                            throw ValidationError("must be true or false", "override");
                        override_dose = body.at("override").get<bool>();
                    }
                    const int dose = body.at("dose").get<int>() - 1;
                    send(res, 200,
                         with_schema(store.post_outcomes(req.matches[1], dose,
                                                         outcomes_from_json(body.at("outcomes")),
                                                         override_dose)));
                }));

    server.Post(R"(/sessions/([A-Za-z0-9_-]+)/finalize)",
                guarded([&store](const httplib::Request& req, httplib::Response& res) {
                    (void)body_of(req);
                    send(res, 200, store.finalize(req.matches[1]));
                }));

    if (static_dir) {
        if (!server.set_mount_point("/", static_dir->string()))
            throw ValidationError("static directory does not exist", static_dir->string());
    }
}

void serve(SessionStore& store, const std::string& host, int port,
           const std::optional<std::filesystem::path>& static_dir) {
    httplib::Server server;
    register_routes(server, store, static_dir);
    if (!server.listen(host, port))
        throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace dosefind
