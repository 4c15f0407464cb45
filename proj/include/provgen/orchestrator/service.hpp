#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "provgen/orchestrator/runner.hpp"

namespace provgen::orchestrator {

/// Owns every live session. Mutations of one session are serialized on that
/// session's lock; reads return the snapshot published after the last
/// mutation and never wait on a running stage.
class SessionService {
 public:
  /// With a non-empty `data_dir`, logs live at <data_dir>/<id>.jsonl and
  /// existing logs are replayed on construction.
  explicit SessionService(Agents agents, std::filesystem::path data_dir = {});

  std::string create(const std::string& prompt, const PipelineConfig& config);
  nlohmann::json advance(const std::string& id);
  nlohmann::json intervene(const std::string& id, const Intervention& intervention);

  nlohmann::json get(const std::string& id) const;
  std::vector<std::string> list() const;
  /// Canonical PPM bytes. Throws kNotReady.
  std::vector<std::uint8_t> artifact_ppm(const std::string& id) const;
  std::string provenance_json(const std::string& id) const;
  MetricsReport metrics(const std::string& id) const;
  std::vector<std::uint8_t> component_png(const std::string& id, int subtask_id) const;

  /// Log files that could not be restored, with the reason.
  const std::map<std::string, std::string>& load_errors() const { return load_errors_; }

 private:
  struct View {
    nlohmann::json snapshot;
    std::optional<Artifact> artifact;
    std::map<int, std::vector<std::uint8_t>> component_png;
  };
  struct Entry {
    std::mutex lock;
    std::unique_ptr<SessionRunner> runner;
    std::shared_ptr<const View> view;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::shared_ptr<const View> view(const std::string& id) const;
  void publish(Entry& entry);
  void persist(const SessionRunner& runner) const;
  void restore();

  Agents agents_;
  std::filesystem::path data_dir_;
  mutable std::shared_mutex sessions_lock_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::atomic<std::uint64_t> counter_{0};
  std::map<std::string, std::string> load_errors_;
};

}  // namespace provgen::orchestrator
