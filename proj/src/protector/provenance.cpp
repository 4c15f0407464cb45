#include "provgen/protector/provenance.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "provgen/core/clock.hpp"
#include "provgen/core/error.hpp"

namespace provgen::protector {

ProvenanceRecord make_provenance(const WatermarkKey& key, std::string session_id, std::int64_t timestamp_ms,
                                 const Digest& pre, const Digest& post) {
  ProvenanceRecord r;
  r.session_id = std::move(session_id);
  r.timestamp_ms = timestamp_ms;
  r.width = key.width;
  r.height = key.height;
  r.pad_right = (kBlock - key.width % kBlock) % kBlock;
  r.pad_bottom = (kBlock - key.height % kBlock) % kBlock;
  r.chips_per_bit = key.chips_per_bit;
  r.amplitude = key.amplitude;
  r.digest_pre = to_hex(pre);
  r.digest_post = to_hex(post);
  r.config = nlohmann::json::object();
  return r;
}

nlohmann::json to_json(const ProvenanceRecord& r) {
  return {
      {"schema", kProvenanceSchema},
      {"session_id", r.session_id},
      {"generated_at", format_utc(r.timestamp_ms)},
      {"timestamp_ms", r.timestamp_ms},
      {"models", {{"planner", r.planner_model}, {"generator", r.generator_model}}},
      {"user_hash", r.user_hash},
      {"mode", r.mode},
      {"watermark",
       {{"block", kBlock},
        {"band", {kBandLo, kBandHi}},
        {"payload_bits", kPayloadBits},
        {"chips_per_bit", r.chips_per_bit},
        {"amplitude", r.amplitude},
        {"frame", {r.width, r.height}},
        {"padding", {{"mode", "reflect"}, {"right", r.pad_right}, {"bottom", r.pad_bottom}}},
        {"pattern", kPatternGenerator},
        {"luma", "BT.601"}}},
      {"key_derivation",
       {{"kdf", kKeyedDigestAlgorithm},
        {"inputs", {"digest_pre", "timestamp_ms", "salt"}},
        {"salt_source", "PROVGEN_WM_SALT"}}},
      {"digest", {{"algorithm", kDigestAlgorithm}, {"pre", r.digest_pre}, {"post", r.digest_post}}},
      {"config", r.config},
  };
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord, "provenance: " + what);
}

void exact_keys(const nlohmann::json& j, std::set<std::string> keys, const std::string& where) {
  if (!j.is_object()) malformed(where + " is not an object");
  for (const auto& [k, _] : j.items()) {
    if (!keys.erase(k)) malformed("unexpected field '" + k + "' in " + where);
  }
  if (!keys.empty()) malformed("missing field '" + *keys.begin() + "' in " + where);
}

}  // namespace

ProvenanceRecord provenance_from_json(const nlohmann::json& j) {
  try {
    exact_keys(j, {"schema", "session_id", "generated_at", "timestamp_ms", "models", "user_hash", "mode",
                   "watermark", "key_derivation", "digest", "config"},
               "record");
    if (j.at("schema") != kProvenanceSchema) malformed("unsupported schema");
    ProvenanceRecord r;
    r.session_id = j.at("session_id").get<std::string>();
    r.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    if (j.at("generated_at").get<std::string>() != format_utc(r.timestamp_ms)) {
      malformed("generated_at disagrees with timestamp_ms");
    }
    const auto& models = j.at("models");
    exact_keys(models, {"planner", "generator"}, "models");
    r.planner_model = models.at("planner").get<std::string>();
    r.generator_model = models.at("generator").get<std::string>();
    r.user_hash = j.at("user_hash").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    if (r.mode != "integrated" && r.mode != "posthoc") malformed("unknown mode '" + r.mode + "'");

    const auto& wm = j.at("watermark");
    exact_keys(wm, {"block", "band", "payload_bits", "chips_per_bit", "amplitude", "frame", "padding", "pattern", "luma"},
               "watermark");
    if (wm.at("block") != kBlock || wm.at("band") != nlohmann::json{kBandLo, kBandHi} ||
        wm.at("payload_bits") != kPayloadBits || wm.at("pattern") != kPatternGenerator || wm.at("luma") != "BT.601") {
      malformed("unsupported watermark layout");
    }
    r.chips_per_bit = wm.at("chips_per_bit").get<int>();
    r.amplitude = wm.at("amplitude").get<double>();
    const auto frame = wm.at("frame").get<std::vector<int>>();
    if (frame.size() != 2) malformed("frame must be [width, height]");
    r.width = frame[0];
    r.height = frame[1];
    const auto& pad = wm.at("padding");
    exact_keys(pad, {"mode", "right", "bottom"}, "padding");
    if (pad.at("mode") != "reflect") malformed("unsupported padding mode");
    r.pad_right = pad.at("right").get<int>();
    r.pad_bottom = pad.at("bottom").get<int>();

    const auto& kd = j.at("key_derivation");
    exact_keys(kd, {"kdf", "inputs", "salt_source"}, "key_derivation");
    if (kd.at("kdf") != kKeyedDigestAlgorithm) malformed("unsupported kdf");

    const auto& dg = j.at("digest");
    exact_keys(dg, {"algorithm", "pre", "post"}, "digest");
    if (dg.at("algorithm") != kDigestAlgorithm) malformed("unsupported digest algorithm");
    r.digest_pre = dg.at("pre").get<std::string>();
    r.digest_post = dg.at("post").get<std::string>();
    digest_from_hex(r.digest_pre);
    digest_from_hex(r.digest_post);
    r.config = j.at("config");
    return r;
  } catch (const nlohmann::json::exception& e) {
    malformed(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedRecord) throw;
    malformed(e.what());
  }
}

std::string serialize_provenance(const ProvenanceRecord& r) { return to_json(r).dump(2) + "\n"; }

void write_provenance(const std::filesystem::path& path, const ProvenanceRecord& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << serialize_provenance(r);
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

ProvenanceRecord read_provenance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("provenance: ") + e.what());
  }
  return provenance_from_json(j);
}

WatermarkKey key_from_provenance(const ProvenanceRecord& r, std::string_view salt) {
  return derive_key(digest_from_hex(r.digest_pre), r.timestamp_ms, salt, {r.chips_per_bit, r.amplitude}, r.width,
                    r.height);
}

}  // namespace provgen::protector
