#pragma once

#include <functional>
#include <string>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "provgen/core/error.hpp"
#include "provgen/core/image.hpp"
#include "provgen/core/rng.hpp"

#define EXPECT_CODE(stmt, expected)                                              \
  do {                                                                          \
    try {                                                                       \
      stmt;                                                                     \
      ADD_FAILURE() << "no exception from " #stmt;                              \
    } catch (const ::provgen::Error& e_) {                                      \
      EXPECT_EQ(::provgen::to_string(e_.code()), ::provgen::to_string(expected)) \
          << e_.what();                                                         \
    }                                                                           \
  } while (0)

namespace testing_support {

inline provgen::Image noise_image(int w, int h, std::uint64_t seed) {
  provgen::Rng rng(seed);
  provgen::Image img(w, h);
  for (float& v : img.samples()) v = static_cast<float>(rng.uniform());
  return img;
}

/// Smooth image with a bit of texture; closer to rendered scenes than noise.
inline provgen::Image smooth_image(int w, int h, std::uint64_t seed) {
  provgen::Rng rng(seed);
  const double a = rng.uniform(0.2, 0.8), b = rng.uniform(0.01, 0.05), c = rng.uniform(0.01, 0.05);
  provgen::Image img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        const double v = a + 0.2 * std::sin(b * x + ch) * std::cos(c * y) + 0.02 * (rng.uniform() - 0.5);
        img.at(x, y, ch) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return img;
}

/// httplib server on an ephemeral localhost port, stopped on destruction.
class LocalServer {
 public:
  explicit LocalServer(const std::function<void(httplib::Server&)>& routes) {
    routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int port() const { return port_; }
  httplib::Server& server() { return server_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace testing_support
