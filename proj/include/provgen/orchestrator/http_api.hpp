#pragma once

#include <string>

#include "provgen/core/error.hpp"
#include "provgen/orchestrator/service.hpp"

namespace httplib {
class Server;
}

namespace provgen::orchestrator {

/// Status code for an error body {code, message}.
int http_status(ErrorCode code);

/// POST /sessions, GET /sessions, GET /sessions/{id},
/// POST /sessions/{id}/advance, POST /sessions/{id}/interventions,
/// GET /sessions/{id}/artifact (?format=png for a transcode),
/// GET /sessions/{id}/provenance, GET /sessions/{id}/metrics,
/// GET /sessions/{id}/components/{n}.png and GET /health.
void install_routes(httplib::Server& server, SessionService& service);

/// Blocks serving on host:port.
void serve(SessionService& service, const std::string& host, int port);

}  // namespace provgen::orchestrator
