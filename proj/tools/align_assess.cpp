// align-assess: command-line driver for customer-alignment maturity assessments.
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "align/catalog.h"
#include "align/error.h"
#include "align/http_api.h"
#include "align/report.h"
#include "align/rubric.h"
#include "align/workspace.h"

namespace {

using align::Error;
using align::ErrorCode;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNotFound = 4;
constexpr int kExitConflict = 5;
constexpr int kExitCorruption = 6;
constexpr int kExitLocked = 7;

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  usage error\n"
    "  3  validation error (invalid input, weights, levels, unscorable practice, rejected CSV rows)\n"
    "  4  not found (unknown session or model)\n"
    "  5  conflict (wrong phase, immutability violation)\n"
    "  6  storage corruption (checksum mismatch)\n"
    "  7  data directory locked by another process\n"
    "Environment: ALIGN_ASSESS_DATA_DIR (data directory; --data-dir wins), "
    "ALIGN_ASSESS_FIXED_TIME (pin every timestamp).";

int exit_code_for(ErrorCode code) {
  switch (align::family_of(code)) {
    case align::ErrorFamily::kValidation: return kExitValidation;
    case align::ErrorFamily::kNotFound: return kExitNotFound;
    case align::ErrorFamily::kConflict: return kExitConflict;
    case align::ErrorFamily::kCorruption: return kExitCorruption;
    case align::ErrorFamily::kLock: return kExitLocked;
    case align::ErrorFamily::kInternal: return kExitInternal;
  }
  return kExitInternal;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, fmt::format("cannot read {}", path), path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, fmt::format("cannot write {}", out_path), out_path);
  out << text;
  std::cerr << "wrote " << out_path << "\n";
}

// Accepts inline JSON or a path to a JSON file.
align::WeightSet read_weights(const std::string& arg) {
  const auto text = !arg.empty() && arg.front() == '{' ? arg : read_text(arg);
  try {
    return json::parse(text).get<align::WeightSet>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidWeights, fmt::format("weights are not a JSON weight set: {}", e.what()),
                "weights");
  }
}

// "[low|medium|high:]description"
align::GapNote parse_gap(const std::string& text) {
  align::GapNote gap{text, align::Severity::kMedium};
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const auto prefix = text.substr(0, colon);
    if (prefix == "low" || prefix == "medium" || prefix == "high") {
      gap.severity = align::parse_severity(prefix);
      gap.description = text.substr(colon + 1);
      while (!gap.description.empty() && gap.description.front() == ' ') gap.description.erase(0, 1);
    }
  }
  return gap;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

httplib::Server* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Customer-alignment maturity assessment: catalog, sessions, scoring, reports and server."};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> data_dir_flag;
  app.add_option("--data-dir", data_dir_flag, "Data directory (default: $ALIGN_ASSESS_DATA_DIR or ./align-data)");

  std::function<int()> action;
  // Commands that touch the data directory hold its exclusive lock.
  bool needs_store = false;
  std::optional<align::DirectoryLock> lock;
  std::unique_ptr<align::Workspace> workspace_ptr;
  const auto ws = [&]() -> align::Workspace& { return *workspace_ptr; };

  // --- catalog ---
  auto* catalog = app.add_subcommand("catalog", "Built-in maturity models");
  catalog->require_subcommand(1);
  catalog->add_subcommand("list", "List built-in models")->callback([&] {
    action = [] {
      for (const auto& entry : align::builtin_catalog()) {
        std::cout << fmt::format("{}\t{}\t{}\t{} criteria\t{} practices\n", entry.model.id, entry.version,
                                 entry.model.name, entry.model.criteria.size(), entry.model.practice_count());
      }
      return kExitOk;
    };
  });
  std::string export_model = std::string(align::kCustomerAlignmentModelId);
  std::string export_out;
  auto* export_cmd = catalog->add_subcommand("export", "Write a built-in model as a rubric file");
  export_cmd->add_option("--model", export_model, "Built-in model id")->capture_default_str();
  export_cmd->add_option("-o,--output", export_out, "Output file (default: stdout)");
  export_cmd->callback([&] {
    action = [&] {
      const auto* entry = align::find_builtin(export_model);
      if (entry == nullptr) {
        throw Error(ErrorCode::kUnknownModel, fmt::format("no built-in model {}", export_model), "model");
      }
      write_output(align::serialize_model(entry->model), export_out);
      return kExitOk;
    };
  });

  // --- model ---
  auto* model_cmd = app.add_subcommand("model", "Rubric files");
  model_cmd->require_subcommand(1);
  std::string model_file;
  auto* validate_cmd = model_cmd->add_subcommand("validate", "Validate a rubric file");
  validate_cmd->add_option("file", model_file, "Rubric JSON file")->required();
  validate_cmd->callback([&] {
    action = [&] {
      const auto model = align::parse_model(read_text(model_file));
      const auto result = align::validate_model(model);
      if (!result.ok()) {
        for (const auto& v : result.violations) std::cout << v.path << ": " << v.message << "\n";
        std::cerr << result.violations.size() << " violation(s)\n";
        return kExitValidation;
      }
      std::cout << fmt::format("{} criteria, {} practices, OK\n", model.criteria.size(), model.practice_count());
      return kExitOk;
    };
  });
  auto* import_cmd = model_cmd->add_subcommand("import", "Store a custom rubric as a new model version");
  import_cmd->add_option("file", model_file, "Rubric JSON file")->required();
  import_cmd->callback([&] {
    needs_store = true;
    action = [&] {
      const auto ref = ws().import_model(align::parse_model(read_text(model_file)));
      std::cout << ref.id << "\t" << ref.version << "\n";
      return kExitOk;
    };
  });

  // --- session ---
  auto* session = app.add_subcommand("session", "Assessment sessions");
  session->require_subcommand(1);
  std::string session_id;

  align::NewSession create_req;
  create_req.model_id = std::string(align::kCustomerAlignmentModelId);
  std::string mode = "individual-survey";
  std::string profile_file;
  std::optional<int> model_version;
  std::optional<std::string> new_id;
  auto* create = session->add_subcommand("create", "Create a session against a model");
  create->add_option("--model", create_req.model_id, "Model id")->capture_default_str();
  create->add_option("--model-version", model_version, "Model version (default: latest)");
  create->add_option("--profile", profile_file, "Organization profile JSON file");
  create->add_option("--sector", create_req.org_profile.sector, "Industrial sector");
  create->add_option("--employees", create_req.org_profile.employee_band, "Employee band, e.g. '50 to 200'");
  create->add_option("--activity", create_req.org_profile.activity_description, "Economic activity");
  create->add_option("--customers", create_req.org_profile.approx_customer_count, "Approximate customer count");
  create->add_option("--mode", mode, "joint | individual-survey | combined")->capture_default_str();
  create->add_option("--id", new_id, "Session id (default: session-<n>)");
  create->callback([&] {
    needs_store = true;
    action = [&] {
      if (!profile_file.empty()) {
        create_req.org_profile = json::parse(read_text(profile_file)).get<align::OrgProfile>();
      }
      create_req.model_version = model_version;
      create_req.gathering_mode = align::parse_gathering_mode(mode);
      create_req.session_id = new_id;
      const auto s = ws().create_session(create_req);
      std::cout << s.id() << "\n";
      return kExitOk;
    };
  });

  auto* show = session->add_subcommand("show", "Print a session as JSON");
  show->add_option("session", session_id)->required();
  show->callback([&] {
    needs_store = true;
    action = [&] {
      std::cout << ws().load_session(session_id).to_json().dump(2) << "\n";
      return kExitOk;
    };
  });

  session->add_subcommand("list", "List sessions")->callback([&] {
    needs_store = true;
    action = [&] {
      for (const auto& s : ws().list_sessions()) {
        std::cout << fmt::format("{}\t{}\t{}@{}\t{}\n", s.id, align::to_string(s.phase), s.model_ref.id,
                                 s.model_ref.version, s.sector);
      }
      return kExitOk;
    };
  });

  align::Assessor assessor;
  std::string role;
  auto* add_assessor = session->add_subcommand("add-assessor", "Add a team member");
  add_assessor->add_option("session", session_id)->required();
  add_assessor->add_option("assessor", assessor.id, "Assessor id")->required();
  add_assessor->add_option("--role", role, "IT | Business")->required();
  add_assessor->add_option("--name", assessor.display_name, "Display name (default: id)");
  add_assessor->callback([&] {
    needs_store = true;
    action = [&] {
      assessor.domain_role = align::parse_domain_role(role);
      if (assessor.display_name.empty()) assessor.display_name = assessor.id;
      ws().add_assessor(session_id, assessor);
      return kExitOk;
    };
  });

  const auto add_transition = [&](const char* name, const char* help, align::Transition t) {
    auto* cmd = session->add_subcommand(name, help);
    cmd->add_option("session", session_id)->required();
    cmd->callback([&, t] {
      needs_store = true;
      action = [&, t] {
        const auto result = ws().transition(session_id, t);
        print_warnings(result.warnings);
        if (t == align::Transition::kFinalize) {
          const auto& scores = *result.session.scores();
          std::cout << fmt::format("General level: {} ({} level {}, {})\n",
                                   align::display_score(scores.overall.effective()),
                                   align::to_string(scores.band.qualifier), scores.band.level, scores.band.label);
        } else {
          std::cout << align::to_string(result.session.phase()) << "\n";
        }
        return kExitOk;
      };
    });
  };
  add_transition("open-collection", "Start collecting responses", align::Transition::kOpenCollection);
  add_transition("close-collection", "Close collection and start the consensus meeting",
                 align::Transition::kCloseCollection);
  add_transition("finalize", "Freeze scores", align::Transition::kFinalize);

  align::ResponseInput response;
  std::optional<std::string> comment;
  auto* submit = session->add_subcommand("submit", "Submit one assessor's level for one practice");
  submit->add_option("session", session_id)->required();
  submit->add_option("assessor", response.assessor_id)->required();
  submit->add_option("practice", response.practice_id)->required();
  submit->add_option("level", response.level)->required();
  submit->add_option("--comment", comment);
  submit->callback([&] {
    needs_store = true;
    action = [&] {
      response.comment = comment;
      ws().submit_responses(session_id, std::span(&response, 1));
      return kExitOk;
    };
  });

  std::string csv_file;
  auto* import_responses = session->add_subcommand("import-responses", "Bulk import responses from CSV");
  import_responses->add_option("session", session_id)->required();
  import_responses->add_option("csv", csv_file, "CSV with header assessor_id,practice_id,level,comment")->required();
  import_responses->callback([&] {
    needs_store = true;
    action = [&] {
      const auto result = ws().import_responses_csv(session_id, read_text(csv_file));
      for (const auto& r : result.rejected) {
        std::cerr << fmt::format("{}:{}: {}: {}\n", csv_file, r.line, r.code, r.message);
      }
      std::cout << fmt::format("applied {}, rejected {}\n", result.applied, result.rejected.size());
      return result.rejected.empty() ? kExitOk : kExitValidation;
    };
  });

  std::string weights_arg;
  auto* set_weights = session->add_subcommand("set-weights", "Replace practice weights");
  set_weights->add_option("session", session_id)->required();
  set_weights->add_option("weights", weights_arg, "Weight-set JSON file or inline JSON")->required();
  set_weights->callback([&] {
    needs_store = true;
    action = [&] {
      ws().set_weights(session_id, read_weights(weights_arg));
      return kExitOk;
    };
  });

  std::string practice;
  double score = 0.0;
  std::vector<std::string> gaps;
  std::vector<std::string> actions;
  auto* consensus = session->add_subcommand("consensus", "Record the team's agreed score for a practice");
  consensus->add_option("session", session_id)->required();
  consensus->add_option("practice", practice)->required();
  consensus->add_option("score", score)->required();
  consensus->add_option("--gap", gaps, "Gap note, optionally prefixed 'low:', 'medium:' or 'high:'");
  consensus->add_option("--action", actions, "Improvement action");
  consensus->callback([&] {
    needs_store = true;
    action = [&] {
      align::ConsensusRecord record{practice, score, {}, actions};
      for (const auto& g : gaps) record.gaps.push_back(parse_gap(g));
      ws().record_consensus(session_id, record);
      return kExitOk;
    };
  });

  double adjusted = 0.0;
  std::string rationale;
  auto* adjust = session->add_subcommand("adjust-overall", "Override the computed general level");
  adjust->add_option("session", session_id)->required();
  adjust->add_option("value", adjusted)->required();
  adjust->add_option("--rationale", rationale)->required();
  adjust->callback([&] {
    needs_store = true;
    action = [&] {
      ws().adjust_overall(session_id, adjusted, rationale);
      return kExitOk;
    };
  });

  std::string report_format = "md";
  std::string report_out;
  auto* report = session->add_subcommand("report", "Generate the executive report");
  report->add_option("session", session_id)->required();
  report->add_option("--format", report_format, "md | json")->capture_default_str();
  report->add_option("-o,--output", report_out, "Output file (default: stdout)");
  report->callback([&] {
    needs_store = true;
    action = [&] {
      write_output(ws().report(session_id, align::parse_report_format(report_format)), report_out);
      return kExitOk;
    };
  });

  auto* chart = session->add_subcommand("chart", "Print per-criterion chart series as JSON");
  chart->add_option("session", session_id)->required();
  chart->callback([&] {
    needs_store = true;
    action = [&] {
      std::cout << json{{"session_id", session_id}, {"points", ws().chart(session_id)}}.dump(2) << "\n";
      return kExitOk;
    };
  });

  auto* what_if = session->add_subcommand("what-if", "Score under hypothetical weights without storing them");
  what_if->add_option("session", session_id)->required();
  what_if->add_option("--weights", weights_arg, "Weight-set JSON file or inline JSON")->required();
  what_if->callback([&] {
    needs_store = true;
    action = [&] {
      const auto weights = read_weights(weights_arg);
      const auto s = ws().load_session(session_id);
      std::cout << align::what_if_document(s, ws().what_if(session_id, weights), weights).dump(2) << "\n";
      return kExitOk;
    };
  });

  auto* clone = session->add_subcommand("clone", "Start a correction of a finalized session");
  clone->add_option("session", session_id)->required();
  clone->callback([&] {
    needs_store = true;
    action = [&] {
      std::cout << ws().clone_session(session_id).id() << "\n";
      return kExitOk;
    };
  });

  // --- serve ---
  std::string listen = align::kDefaultListen;
  std::optional<std::string> ui_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--listen", listen, "host:port")->capture_default_str();
  serve->add_option("--ui-dir", ui_dir, "Serve static web UI files from this directory");
  serve->callback([&] {
    needs_store = true;
    action = [&] {
      const auto address = align::parse_listen(listen);
      httplib::Server server;
      align::install_routes(server, ws(), ui_dir ? std::optional<std::filesystem::path>(*ui_dir) : std::nullopt);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      int port = address.port;
      if (port == 0) {
        port = server.bind_to_any_port(address.host);
      } else if (!server.bind_to_port(address.host, port)) {
        throw Error(ErrorCode::kInvalidArgument, fmt::format("cannot listen on {}", listen), "listen");
      }
      std::cerr << "listening on " << address.host << ":" << port << "\n";
      std::cout << port << std::endl;
      server.listen_after_bind();
      g_server = nullptr;
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (needs_store) {
      const auto dir = align::resolve_data_dir(data_dir_flag);
      lock.emplace(dir);
      workspace_ptr = std::make_unique<align::Workspace>(dir, align::clock_from_env());
    }
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.machine_code() << ": " << e.what();
    if (!e.path().empty()) std::cerr << " [" << e.path() << "]";
    std::cerr << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "error: invalid-argument: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kExitInternal;
  }
}
