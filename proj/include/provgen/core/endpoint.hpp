#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "provgen/core/error.hpp"

namespace provgen {

/// "http://host:port/prefix" split into the origin httplib connects to and
/// the path prefix requests are issued under.
struct HttpEndpoint {
  std::string origin;
  std::string path;
};

HttpEndpoint parse_endpoint(std::string_view url);

struct HttpReply {
  int status = 0;
  std::string content_type;
  std::string body;
};

/// POSTs a JSON body. Transport failures, timeouts and non-2xx statuses throw
/// `Error(unavailable, ...)`.
HttpReply post_json(const HttpEndpoint& endpoint, std::string_view route, const nlohmann::json& body,
                    std::chrono::milliseconds timeout, ErrorCode unavailable);

}  // namespace provgen
