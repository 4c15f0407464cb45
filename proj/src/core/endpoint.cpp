#include "provgen/core/endpoint.hpp"

#include <httplib.h>

namespace provgen {

HttpEndpoint parse_endpoint(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint URL needs a scheme: " + std::string(url));
  }
  const auto slash = url.find('/', scheme + 3);
  HttpEndpoint ep;
  if (slash == std::string_view::npos) {
    ep.origin = std::string(url);
  } else {
    ep.origin = std::string(url.substr(0, slash));
    ep.path = std::string(url.substr(slash));
    while (!ep.path.empty() && ep.path.back() == '/') ep.path.pop_back();
  }
  return ep;
}

HttpReply post_json(const HttpEndpoint& endpoint, std::string_view route, const nlohmann::json& body,
                    std::chrono::milliseconds timeout, ErrorCode unavailable) {
  httplib::Client client(endpoint.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  const std::string path = endpoint.path + std::string(route);
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw Error(unavailable, "POST " + endpoint.origin + path + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(unavailable, "POST " + endpoint.origin + path + " returned HTTP " + std::to_string(res->status));
  }
  return HttpReply{res->status, res->get_header_value("Content-Type"), res->body};
}

}  // namespace provgen
