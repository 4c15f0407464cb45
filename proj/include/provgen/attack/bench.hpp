#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "provgen/attack/attacks.hpp"
#include "provgen/protector/watermark.hpp"

namespace provgen::attack {

/// Applies the attack and extracts, undoing geometry first: resized images
/// are resampled back to the key frame, crops are read at their offset.
protector::ExtractionResult attack_and_extract(const Image& marked, const protector::WatermarkKey& key,
                                               const AttackSpec& spec, std::size_t item = 0);

/// Image as delivered: 8-bit samples.
Image export_8bit(const Image& image);

/// Protected artifact in each mode. Integrated embeds into the pipeline's own
/// scene; post-hoc embeds into the externally delivered copy (exported at
/// kPosthocExportQuality) after integration has finished.
inline constexpr int kPosthocExportQuality = 90;
Image protect_integrated(const Image& scene, const protector::WatermarkKey& key);
Image protect_posthoc(const Image& scene, const protector::WatermarkKey& key);

/// JPEG-70, noise 0.03 and crop 25%.
std::vector<AttackSpec> quick_suite(std::uint64_t noise_seed);

/// JPEG 50/70/95, noise 0.01/0.03/0.05, crop 10/25/30%, resize 50/200%.
std::vector<AttackSpec> standard_grid(std::uint64_t noise_seed);

/// 1 - mean bit accuracy of `marked` over `suite`.
double recoverability_penalty(const Image& marked, const protector::WatermarkKey& key,
                              const std::vector<AttackSpec>& suite);

struct BenchCell {
  AttackSpec spec;
  std::string mode = "integrated";
  int corpus_n = 0;
  double recovery_rate = 0;
  double mean_bit_accuracy = 0;
  int failures = 0;  // items whose extraction threw
  std::string error;
};

struct RobustnessReport {
  std::vector<BenchCell> cells;
  std::string corpus_digest;
  nlohmann::json config;

  const BenchCell* find(const std::string& name, const std::string& param, const std::string& mode = "integrated") const;
};

struct BenchOptions {
  bool compare_posthoc = false;
  nlohmann::json config = nlohmann::json::object();
};

/// Embeds each corpus image with its key, applies every attack and extracts.
/// Per-cell errors are recorded in the cell rather than thrown.
RobustnessReport run_bench(const std::vector<Image>& corpus, const std::vector<protector::WatermarkKey>& keys,
                           const std::vector<AttackSpec>& grid, const BenchOptions& options = {});

/// Columns: attack, param, corpus_n, recovery_rate, mean_bit_accuracy.
/// Post-hoc rows carry a "posthoc/" attack prefix.
std::string to_csv(const RobustnessReport& report);
nlohmann::json to_json(const RobustnessReport& report);

}  // namespace provgen::attack
