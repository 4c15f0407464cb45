#include "provgen/orchestrator/service.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "provgen/core/digest.hpp"
#include "provgen/core/error.hpp"
#include "provgen/core/png_codec.hpp"
#include "provgen/core/ppm.hpp"

namespace provgen::orchestrator {

namespace fs = std::filesystem;

namespace {

void write_atomic(const fs::path& path, std::string_view bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SessionService::SessionService(Agents agents, fs::path data_dir)
    : agents_(std::move(agents)), data_dir_(std::move(data_dir)) {
  if (!data_dir_.empty()) {
    fs::create_directories(data_dir_);
    restore();
  }
}

void SessionService::restore() {
  std::vector<fs::path> logs;
  for (const auto& entry : fs::directory_iterator(data_dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") logs.push_back(entry.path());
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    try {
      std::string bytes = read_all(path);
      // A process killed mid-append leaves a partial last line behind.
      if (!bytes.empty() && bytes.back() != '\n') bytes.erase(bytes.rfind('\n') + 1);
      SessionRecord record = deserialize_session(bytes);
      auto entry = std::make_shared<Entry>();
      entry->runner = std::make_unique<SessionRunner>(SessionRunner::resume(std::move(record), agents_));
      persist(*entry->runner);
      const std::string id = entry->runner->record().session_id;
      entry->runner->set_observer([this, id](const Event& e) {
        std::ofstream out(data_dir_ / (id + ".jsonl"), std::ios::binary | std::ios::app);
        out << serialize_event(e);
      });
      publish(*entry);
      sessions_[id] = std::move(entry);
    } catch (const std::exception& e) {
      load_errors_[path.filename().string()] = e.what();
      std::cerr << "provgen: skipping " << path << ": " << e.what() << "\n";
    }
  }
}

void SessionService::persist(const SessionRunner& runner) const {
  if (data_dir_.empty()) return;
  const std::string& id = runner.record().session_id;
  write_atomic(data_dir_ / (id + ".jsonl"), serialize_session(runner.record()));
  if (runner.has_artifact()) {
    const auto ppm = encode_ppm(runner.artifact().image);
    write_atomic(data_dir_ / (id + ".ppm"), std::string_view(reinterpret_cast<const char*>(ppm.data()), ppm.size()));
    write_atomic(data_dir_ / (id + ".provenance.json"), protector::serialize_provenance(runner.artifact().provenance));
  }
}

void SessionService::publish(Entry& entry) {
  auto view = std::make_shared<View>();
  view->snapshot = entry.runner->snapshot();
  if (entry.runner->has_artifact()) view->artifact = entry.runner->artifact();
  for (const auto& c : entry.runner->components()) view->component_png[c.subtask_id] = encode_png(c.image, &c.alpha);
  std::atomic_store(&entry.view, std::shared_ptr<const View>(std::move(view)));
}

std::string SessionService::create(const std::string& prompt, const PipelineConfig& config) {
  const std::int64_t now = agents_.clock();
  const std::uint64_t n = counter_.fetch_add(1);
  const std::string id =
      to_hex(sha256(prompt + "\n" + to_json(config).dump() + "\n" + std::to_string(now) + "\n" + std::to_string(n)))
          .substr(0, 16);
  auto entry = std::make_shared<Entry>();
  entry->runner = std::make_unique<SessionRunner>(id, prompt, config, agents_, now);
  persist(*entry->runner);
  if (!data_dir_.empty()) {
    entry->runner->set_observer([this, id](const Event& e) {
      std::ofstream out(data_dir_ / (id + ".jsonl"), std::ios::binary | std::ios::app);
      out << serialize_event(e);
    });
  }
  publish(*entry);
  std::unique_lock guard(sessions_lock_);
  sessions_[id] = std::move(entry);
  return id;
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::shared_lock guard(sessions_lock_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kUnknownSession, "unknown session '" + id + "'");
  return it->second;
}

std::shared_ptr<const SessionService::View> SessionService::view(const std::string& id) const {
  auto entry = find(id);
  return std::atomic_load(&entry->view);
}

nlohmann::json SessionService::advance(const std::string& id) {
  auto entry = find(id);
  std::lock_guard guard(entry->lock);
  try {
    entry->runner->advance();
  } catch (...) {
    publish(*entry);
    persist(*entry->runner);
    throw;
  }
  publish(*entry);
  persist(*entry->runner);
  return std::atomic_load(&entry->view)->snapshot;
}

nlohmann::json SessionService::intervene(const std::string& id, const Intervention& intervention) {
  auto entry = find(id);
  std::lock_guard guard(entry->lock);
  entry->runner->submit(intervention);
  publish(*entry);
  persist(*entry->runner);
  return std::atomic_load(&entry->view)->snapshot;
}

nlohmann::json SessionService::get(const std::string& id) const { return view(id)->snapshot; }

std::vector<std::string> SessionService::list() const {
  std::shared_lock guard(sessions_lock_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

namespace {

[[noreturn]] void not_ready(const std::string& id, const nlohmann::json& snapshot) {
  throw Error(ErrorCode::kNotReady, "session " + id + " is " + snapshot.at("state").get<std::string>());
}

}  // namespace

std::vector<std::uint8_t> SessionService::artifact_ppm(const std::string& id) const {
  auto v = view(id);
  if (!v->artifact) not_ready(id, v->snapshot);
  return encode_ppm(v->artifact->image);
}

std::string SessionService::provenance_json(const std::string& id) const {
  auto v = view(id);
  if (!v->artifact) not_ready(id, v->snapshot);
  return protector::serialize_provenance(v->artifact->provenance);
}

MetricsReport SessionService::metrics(const std::string& id) const {
  auto v = view(id);
  if (!v->artifact) not_ready(id, v->snapshot);
  return v->artifact->metrics;
}

std::vector<std::uint8_t> SessionService::component_png(const std::string& id, int subtask_id) const {
  auto v = view(id);
  auto it = v->component_png.find(subtask_id);
  if (it == v->component_png.end()) {
    throw Error(ErrorCode::kUnknownSubtask, "session " + id + " has no component " + std::to_string(subtask_id));
  }
  return it->second;
}

}  // namespace provgen::orchestrator
