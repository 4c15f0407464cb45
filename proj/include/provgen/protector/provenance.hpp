#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "provgen/protector/watermark.hpp"

namespace provgen::protector {

inline constexpr std::string_view kProvenanceSchema = "provgen.provenance/1";

struct ProvenanceRecord {
  std::string session_id;
  std::int64_t timestamp_ms = 0;  // also the key-derivation timestamp
  std::string planner_model;
  std::string generator_model;
  std::string user_hash;
  std::string mode = "integrated";  // or "posthoc"
  int width = 0;
  int height = 0;
  int pad_right = 0;
  int pad_bottom = 0;
  int chips_per_bit = 0;
  double amplitude = 0;
  std::string digest_pre;   // hex; key derivation input
  std::string digest_post;  // hex of the protected artifact
  nlohmann::json config;    // pipeline config snapshot

  bool operator==(const ProvenanceRecord&) const = default;
};

ProvenanceRecord make_provenance(const WatermarkKey& key, std::string session_id, std::int64_t timestamp_ms,
                                 const Digest& digest_pre, const Digest& digest_post);

/// Canonical form: sorted keys, fixed schema tag. Carries no salt, seed or
/// payload.
nlohmann::json to_json(const ProvenanceRecord& record);
/// Strict parse; throws kMalformedRecord.
ProvenanceRecord provenance_from_json(const nlohmann::json& j);
std::string serialize_provenance(const ProvenanceRecord& record);

void write_provenance(const std::filesystem::path& path, const ProvenanceRecord& record);
ProvenanceRecord read_provenance(const std::filesystem::path& path);

/// Re-derives the embedding key from a record and the secret salt.
WatermarkKey key_from_provenance(const ProvenanceRecord& record, std::string_view salt);

}  // namespace provgen::protector
