#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "provgen/core/endpoint.hpp"
#include "provgen/generator/component.hpp"
#include "provgen/planner/plan.hpp"

namespace provgen::generator {

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string model() const = 0;
  virtual Component generate(const planner::Subtask& subtask, std::uint64_t seed,
                             const GeneratorParams& params) = 0;
};

/// Desk-scale renderer: glyph table for foregrounds, gradients for backgrounds.
class ProceduralGenerator final : public Generator {
 public:
  std::string model() const override { return "procedural-v1"; }
  Component generate(const planner::Subtask& subtask, std::uint64_t seed,
                     const GeneratorParams& params) override;
};

/// Pass-through client. POSTs {subtask, params, seed, model} to <base>/generate
/// and accepts PNG or PPM bytes back.
class ExternalGenerator final : public Generator {
 public:
  explicit ExternalGenerator(std::string base_url, std::string model = "external",
                             std::chrono::milliseconds timeout = std::chrono::seconds(60));
  std::string model() const override { return model_; }
  Component generate(const planner::Subtask& subtask, std::uint64_t seed,
                     const GeneratorParams& params) override;

 private:
  HttpEndpoint endpoint_;
  std::string model_;
  std::chrono::milliseconds timeout_;
};

std::uint64_t regeneration_seed(std::uint64_t seed, int next_attempt);

/// Next attempt with a fresh seed. Throws kRetriesExhausted once
/// component.attempt >= max_retries.
Component regenerate(Generator& generator, const Component& component,
                     const planner::Subtask& subtask, const GeneratorParams& params,
                     int max_retries);

}  // namespace provgen::generator
