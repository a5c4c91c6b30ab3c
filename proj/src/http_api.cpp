#include "align/http_api.h"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>
#include <httplib.h>

#include "align/catalog.h"

namespace align {

namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", kJson);
}

void send_error(httplib::Response& res, const Error& e) { send_json(res, http_status(e.code()), error_body(e)); }

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("request body is not valid JSON: {}", e.what()), "body");
  }
}

// Runs a handler, turning module errors into their HTTP form. Unexpected
// failures become a generic 500 without internal detail.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorCode::kInvalidArgument, fmt::format("malformed request: {}", e.what()), "body"));
    } catch (const std::exception&) {
      send_error(res, Error(ErrorCode::kInternal, "internal error"));
    }
  };
}

std::optional<int> int_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return std::nullopt;
  const auto text = req.get_param_value(name);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("query parameter {} must be an integer", name), name);
  }
  return value;
}

json session_summary_json(const SessionSummary& s) {
  return {{"id", s.id},
          {"version", s.version},
          {"phase", std::string(to_string(s.phase))},
          {"model_ref", s.model_ref},
          {"sector", s.sector}};
}

}  // namespace

int http_status(ErrorCode code) {
  switch (family_of(code)) {
    case ErrorFamily::kValidation: return 400;
    case ErrorFamily::kNotFound: return 404;
    case ErrorFamily::kConflict: return 409;
    case ErrorFamily::kLock: return 409;
    case ErrorFamily::kCorruption:
    case ErrorFamily::kInternal: return 500;
  }
  return 500;
}

json error_body(const Error& error) {
  // Corruption details name on-disk paths; keep them out of responses.
  const bool opaque = family_of(error.code()) == ErrorFamily::kInternal ||
                      family_of(error.code()) == ErrorFamily::kCorruption;
  return {{"error",
           {{"status", http_status(error.code())},
            {"code", std::string(error.machine_code())},
            {"message", opaque ? std::string("internal error") : std::string(error.what())},
            {"path", opaque ? std::string() : error.path()}}}};
}

ListenAddress parse_listen(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("listen address must be host:port, got {}", text), "listen");
  }
  ListenAddress out{std::string(text.substr(0, colon)), 0};
  const auto port = text.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), out.port);
  if (ec != std::errc{} || ptr != port.data() + port.size() || out.port < 0 || out.port > 65535) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("invalid port in {}", text), "listen");
  }
  return out;
}

void install_routes(httplib::Server& server, Workspace& ws, const std::optional<std::filesystem::path>& ui_dir) {
  // --- models ---
  server.Get("/api/models", guarded([&ws](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& m : ws.list_models()) {
      out.push_back({{"id", m.id}, {"version", m.version}, {"name", m.name}, {"builtin", m.builtin},
                     {"criteria", m.criteria}, {"practices", m.practices}});
    }
    send_json(res, 200, out);
  }));

  server.Get(R"(/api/models/([^/]+))", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, json(*ws.model(req.matches[1], int_param(req, "version"))));
  }));

  server.Post("/api/models", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    MaturityModel model;
    try {
      model = parse_body(req).get<MaturityModel>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("malformed rubric: {}", e.what()), "body");
    }
    try {
      const auto ref = ws.import_model(model);
      send_json(res, 201, ref);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInvalidModel) throw;
      auto body = error_body(e);
      body["error"]["violations"] = json::array();
      for (const auto& v : validate_model(model).violations) {
        body["error"]["violations"].push_back({{"path", v.path}, {"message", v.message}});
      }
      send_json(res, 400, body);
    }
  }));

  // --- sessions ---
  server.Post("/api/sessions", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    NewSession request;
    request.model_id = body.value("model_id", std::string(kCustomerAlignmentModelId));
    if (body.contains("model_version") && !body.at("model_version").is_null()) {
      request.model_version = body.at("model_version").get<int>();
    }
    request.org_profile = body.at("org_profile").get<OrgProfile>();
    request.gathering_mode = parse_gathering_mode(body.value("gathering_mode", std::string("individual-survey")));
    if (body.contains("id") && !body.at("id").is_null()) request.session_id = body.at("id").get<std::string>();
    send_json(res, 201, ws.create_session(request).to_json());
  }));

  server.Get("/api/sessions", guarded([&ws](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& s : ws.list_sessions()) out.push_back(session_summary_json(s));
    send_json(res, 200, out);
  }));

  server.Get(R"(/api/sessions/([^/]+))", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, ws.load_session(req.matches[1]).to_json());
  }));

  server.Post(R"(/api/sessions/([^/]+)/assessors)", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const auto assessor = parse_body(req).get<Assessor>();
    send_json(res, 200, ws.add_assessor(req.matches[1], assessor).to_json());
  }));

  server.Post(R"(/api/sessions/([^/]+)/responses)", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const auto identity = req.get_header_value(kAssessorHeader);
    if (!identity.empty()) {
      const auto session = ws.load_session(id);
      const auto& team = session.assessors();
      if (std::none_of(team.begin(), team.end(), [&](const Assessor& a) { return a.id == identity; })) {
        throw Error(ErrorCode::kUnknownAssessor,
                    fmt::format("{} {} is not an assessor of session {}", kAssessorHeader, identity, id),
                    kAssessorHeader);
      }
    }
    if (req.get_header_value("Content-Type").starts_with("text/csv")) {
      const auto result = ws.import_responses_csv(id, req.body);
      json rejected = json::array();
      for (const auto& r : result.rejected) {
        rejected.push_back({{"line", r.line}, {"code", r.code}, {"message", r.message}});
      }
      send_json(res, 200, {{"applied", result.applied}, {"rejected", rejected}, {"session", result.session.to_json()}});
      return;
    }
    const auto body = parse_body(req);
    std::vector<ResponseInput> batch;
    const auto read_one = [&](json item) {
      if (!identity.empty()) {
        if (!item.contains("assessor_id")) item["assessor_id"] = identity;
        if (item.at("assessor_id") != identity) {
          throw Error(ErrorCode::kInvalidArgument,
                      fmt::format("response assessor_id does not match {}", kAssessorHeader), "assessor_id");
        }
      }
      batch.push_back(item.get<ResponseInput>());
    };
    if (body.is_array()) {
      for (const auto& item : body) read_one(item);
    } else {
      read_one(body);
    }
    send_json(res, 200, ws.submit_responses(id, batch).to_json());
  }));

  server.Put(R"(/api/sessions/([^/]+)/weights)", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const auto weights = parse_body(req).get<WeightSet>();
    send_json(res, 200, ws.set_weights(req.matches[1], weights).to_json());
  }));

  server.Post(R"(/api/sessions/([^/]+)/consensus/([^/]+))",
              guarded([&ws](const httplib::Request& req, httplib::Response& res) {
                auto body = parse_body(req);
                body["practice_id"] = std::string(req.matches[2]);
                const auto record = body.get<ConsensusRecord>();
                send_json(res, 200, ws.record_consensus(req.matches[1], record).to_json());
              }));

  server.Post(R"(/api/sessions/([^/]+)/overall-adjustment)",
              guarded([&ws](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const auto session = ws.adjust_overall(req.matches[1], body.at("value").get<double>(),
                                                       body.value("rationale", std::string{}));
                send_json(res, 200, session.to_json());
              }));

  server.Post(R"(/api/sessions/([^/]+)/phase)", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto result = ws.transition(req.matches[1], parse_transition(body.at("transition").get<std::string>()));
    send_json(res, 200, {{"session", result.session.to_json()}, {"warnings", result.warnings}});
  }));

  server.Post(R"(/api/sessions/([^/]+)/clone)", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 201, ws.clone_session(req.matches[1]).to_json());
  }));

  server.Get(R"(/api/sessions/([^/]+)/scores)", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    std::optional<WeightSet> weights;
    if (req.has_param("weights")) {
      try {
        weights = json::parse(req.get_param_value("weights")).get<WeightSet>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kInvalidWeights, fmt::format("weights parameter is not a weight set: {}", e.what()),
                    "weights");
      }
    }
    const auto session = ws.load_session(id);
    const auto summary = ws.what_if(id, weights);
    send_json(res, 200, what_if_document(session, summary, weights.value_or(session.weights())));
  }));

  server.Get(R"(/api/sessions/([^/]+)/report)", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    const auto format = parse_report_format(req.has_param("format") ? req.get_param_value("format") : "structured");
    const auto text = ws.report(req.matches[1], format);
    res.status = 200;
    res.set_content(text, format == ReportFormat::kStructured ? kJson : "text/markdown; charset=utf-8");
  }));

  server.Get(R"(/api/sessions/([^/]+)/chart)", guarded([&ws](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, {{"session_id", std::string(req.matches[1])}, {"points", ws.chart(req.matches[1])}});
  }));

  if (ui_dir) server.set_mount_point("/", ui_dir->string());
}

}  // namespace align
