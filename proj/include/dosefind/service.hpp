#pragma once
// HTTP front end for SessionStore. Bodies are JSON carrying "schema":
// "dosefind.session/v1"; failures map to 422 (validation), 404 (unknown
// session) and 409 (state conflict) with {"error": {status, message, field}}.

#include <filesystem>
#include <optional>
#include <string>

#include "dosefind/session.hpp"

namespace httplib {
class Server;
}

namespace dosefind {

/// Installs the session routes, and a static mount at "/" when `static_dir` is given.
void register_routes(httplib::Server& server, SessionStore& store,
                     const std::optional<std::filesystem::path>& static_dir = std::nullopt);

/// Blocks serving on host:port until the process is stopped.
void serve(SessionStore& store, const std::string& host, int port,
           const std::optional<std::filesystem::path>& static_dir);

}  // namespace dosefind
