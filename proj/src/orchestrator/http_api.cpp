#include "provgen/orchestrator/http_api.hpp"

#include <httplib.h>

#include "provgen/core/digest.hpp"
#include "provgen/core/png_codec.hpp"
#include "provgen/core/ppm.hpp"

namespace provgen::orchestrator {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownSession:
    case ErrorCode::kUnknownSubtask:
      return 404;
    case ErrorCode::kIllegalTransition:
    case ErrorCode::kIllegalIntervention:
    case ErrorCode::kNotReady:
      return 409;
    case ErrorCode::kSessionFailure:
    case ErrorCode::kRetriesExhausted:
      return 422;
    case ErrorCode::kPlannerUnavailable:
    case ErrorCode::kGeneratorUnavailable:
    case ErrorCode::kScorerUnavailable:
      return 502;
    case ErrorCode::kIo:
    case ErrorCode::kReplayDivergence:
    case ErrorCode::kSolverDiverged:
      return 500;
    default:
      return 400;
  }
}

namespace {

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_bytes(httplib::Response& res, const std::vector<std::uint8_t>& bytes, const char* type) {
  res.status = 200;
  res.set_content(std::string(bytes.begin(), bytes.end()), type);
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"code", to_string(code)}, {"message", message}}, http_status(code));
}

template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, ErrorCode::kInvalidArgument, e.what());
    } catch (const std::exception& e) {
      send_json(res, {{"code", "Internal"}, {"message", e.what()}}, 500);
    }
  };
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  nlohmann::json j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return j;
}

}  // namespace

void install_routes(httplib::Server& server, SessionService& service) {
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, {{"ok", true}}); });

  server.Post("/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const nlohmann::json body = parse_body(req);
                for (const auto& [k, _] : body.items()) {
                  if (k != "prompt" && k != "config" && k != "user") {
                    throw Error(ErrorCode::kInvalidArgument, "unexpected field '" + k + "'");
                  }
                }
                if (!body.contains("prompt") || !body.at("prompt").is_string()) {
                  throw Error(ErrorCode::kInvalidArgument, "prompt must be a string");
                }
                PipelineConfig config = config_from_json(body.value("config", nlohmann::json::object()));
                if (body.contains("user")) config.user_hash = hash_user_id(body.at("user").get<std::string>());
                const std::string id = service.create(body.at("prompt").get<std::string>(), config);
                send_json(res, {{"session_id", id}, {"state", service.get(id).at("state")}}, 201);
              }));

  server.Get("/sessions", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, {{"sessions", service.list()}});
             }));

  server.Get(R"(/sessions/([^/]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, service.get(req.matches[1]));
             }));

  server.Post(R"(/sessions/([^/]+)/advance)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                send_json(res, service.advance(req.matches[1]));
              }));

  server.Post(R"(/sessions/([^/]+)/interventions)",
              guarded([&](const httplib::Request& req, httplib::Response& res) {
                const Intervention iv = intervention_from_json(parse_body(req));
                send_json(res, service.intervene(req.matches[1], iv));
              }));

  server.Get(R"(/sessions/([^/]+)/artifact)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               const auto ppm = service.artifact_ppm(req.matches[1]);
               if (req.get_param_value("format") == "png") {
                 send_bytes(res, encode_png(decode_ppm(ppm)), "image/png");
               } else {
                 send_bytes(res, ppm, "image/x-portable-pixmap");
               }
             }));

  server.Get(R"(/sessions/([^/]+)/provenance)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               res.status = 200;
               res.set_content(service.provenance_json(req.matches[1]), "application/json");
             }));

  server.Get(R"(/sessions/([^/]+)/metrics)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, to_json(service.metrics(req.matches[1])));
             }));

  server.Get(R"(/sessions/([^/]+)/components/(\d+)\.png)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_bytes(res, service.component_png(req.matches[1], std::stoi(req.matches[2])), "image/png");
             }));

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) {
      send_json(res, {{"code", "NotFound"}, {"message", "no route for " + req.method + " " + req.path}}, 404);
    }
  });
}

void serve(SessionService& service, const std::string& host, int port) {
  httplib::Server server;
  install_routes(server, service);
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

}  // namespace provgen::orchestrator
