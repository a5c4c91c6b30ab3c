#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "align/error.h"
#include "align/workspace.h"

namespace httplib {
class Server;
}

namespace align {

inline constexpr const char* kDefaultListen = "127.0.0.1:8423";
inline constexpr const char* kAssessorHeader = "X-Assessor-Id";

int http_status(ErrorCode code);
// {"error": {"status", "code", "message", "path"}}
nlohmann::json error_body(const Error& error);

struct ListenAddress {
  std::string host;
  int port = 0;
};
// "host:port"; throws Error(kInvalidArgument).
ListenAddress parse_listen(std::string_view text);

// Installs every /api route on `server`, delegating to `workspace`. Static
// UI files are mounted under / when `ui_dir` is set.
void install_routes(httplib::Server& server, Workspace& workspace,
                    const std::optional<std::filesystem::path>& ui_dir = {});

}  // namespace align
