#include "provgen/attack/bench.hpp"

#include <cstdio>
#include <sstream>

#include "provgen/attack/jpeg.hpp"
#include "provgen/core/digest.hpp"
#include "provgen/core/error.hpp"
#include "provgen/core/resample.hpp"
#include "provgen/core/rng.hpp"

namespace provgen::attack {

Image export_8bit(const Image& image) {
  Image out = image;
  for (float& v : out.samples()) v = static_cast<float>(quantize_sample(v) / 255.0);
  return out;
}

Image protect_integrated(const Image& scene, const protector::WatermarkKey& key) {
  return export_8bit(protector::embed(scene, key));
}

Image protect_posthoc(const Image& scene, const protector::WatermarkKey& key) {
  const Image delivered = jpeg_roundtrip(scene, kPosthocExportQuality);
  return export_8bit(protector::embed(delivered, key));
}

protector::ExtractionResult attack_and_extract(const Image& marked, const protector::WatermarkKey& key,
                                               const AttackSpec& spec, std::size_t item) {
  spec.validate();
  switch (spec.kind) {
    case AttackKind::kNone:
      return protector::extract(marked, key);
    case AttackKind::kJpeg:
      return protector::extract(jpeg_roundtrip(marked, spec.quality), key);
    case AttackKind::kNoise:
      return protector::extract(gaussian_noise(marked, spec.sigma, mix_seed(spec.seed, item)), key);
    case AttackKind::kCrop: {
      const CropResult c = crop(marked, spec.fraction, spec.anchor);
      return protector::extract_cropped(c.image, key, c.offset_x, c.offset_y);
    }
    case AttackKind::kResize: {
      const Image small = resize(marked, spec.factor);
      return protector::extract(resize_bilinear(small, marked.width(), marked.height()), key);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown attack");
}

std::vector<AttackSpec> quick_suite(std::uint64_t noise_seed) {
  return {AttackSpec::jpeg(70), AttackSpec::noise(0.03, noise_seed), AttackSpec::crop_area(0.25)};
}

std::vector<AttackSpec> standard_grid(std::uint64_t noise_seed) {
  return {AttackSpec::jpeg(50),         AttackSpec::jpeg(70),         AttackSpec::jpeg(95),
          AttackSpec::noise(0.01, noise_seed), AttackSpec::noise(0.03, noise_seed), AttackSpec::noise(0.05, noise_seed),
          AttackSpec::crop_area(0.10),  AttackSpec::crop_area(0.25),  AttackSpec::crop_area(0.30),
          AttackSpec::resize_by(0.5),   AttackSpec::resize_by(2.0)};
}

double recoverability_penalty(const Image& marked, const protector::WatermarkKey& key,
                              const std::vector<AttackSpec>& suite) {
  if (suite.empty()) return 0.0;
  double sum = 0;
  for (const auto& spec : suite) sum += attack_and_extract(marked, key, spec).bit_accuracy;
  return 1.0 - sum / static_cast<double>(suite.size());
}

const BenchCell* RobustnessReport::find(const std::string& name, const std::string& param,
                                        const std::string& mode) const {
  for (const auto& c : cells) {
    if (c.spec.name() == name && c.spec.param() == param && c.mode == mode) return &c;
  }
  return nullptr;
}

RobustnessReport run_bench(const std::vector<Image>& corpus, const std::vector<protector::WatermarkKey>& keys,
                           const std::vector<AttackSpec>& grid, const BenchOptions& options) {
  if (corpus.empty() || corpus.size() != keys.size()) {
    throw Error(ErrorCode::kInvalidArgument, "bench needs one key per corpus image and at least one image");
  }
  RobustnessReport report;
  report.config = options.config;
  std::vector<std::uint8_t> digests;
  for (const auto& img : corpus) {
    const Digest d = content_hash(img);
    digests.insert(digests.end(), d.begin(), d.end());
  }
  report.corpus_digest = to_hex(sha256(digests));

  std::vector<std::string> modes{"integrated"};
  if (options.compare_posthoc) modes.push_back("posthoc");
  for (const auto& mode : modes) {
    std::vector<Image> marked;
    std::string prep_error;
    try {
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        marked.push_back(mode == "integrated" ? protect_integrated(corpus[i], keys[i]) : protect_posthoc(corpus[i], keys[i]));
      }
    } catch (const Error& e) {
      prep_error = e.what();
    }
    for (const auto& spec : grid) {
      BenchCell cell;
      cell.spec = spec;
      cell.mode = mode;
      cell.corpus_n = static_cast<int>(corpus.size());
      if (!prep_error.empty()) {
        cell.failures = cell.corpus_n;
        cell.error = prep_error;
        report.cells.push_back(cell);
        continue;
      }
      int recovered = 0;
      double acc = 0;
      for (std::size_t i = 0; i < marked.size(); ++i) {
        try {
          const auto r = attack_and_extract(marked[i], keys[i], spec, i);
          recovered += r.recovered ? 1 : 0;
          acc += r.bit_accuracy;
        } catch (const Error& e) {
          ++cell.failures;
          if (cell.error.empty()) cell.error = e.what();
        }
      }
      cell.recovery_rate = static_cast<double>(recovered) / cell.corpus_n;
      cell.mean_bit_accuracy = acc / cell.corpus_n;
      report.cells.push_back(cell);
    }
  }
  return report;
}

std::string to_csv(const RobustnessReport& report) {
  std::ostringstream out;
  out << "attack,param,corpus_n,recovery_rate,mean_bit_accuracy\n";
  char buf[64];
  for (const auto& c : report.cells) {
    out << (c.mode == "integrated" ? "" : c.mode + "/") << c.spec.name() << ',' << c.spec.param() << ','
        << c.corpus_n << ',';
    std::snprintf(buf, sizeof buf, "%.4f,%.4f", c.recovery_rate, c.mean_bit_accuracy);
    out << buf << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const RobustnessReport& report) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    nlohmann::json j{{"attack", to_json(c.spec)},
                     {"mode", c.mode},
                     {"corpus_n", c.corpus_n},
                     {"recovery_rate", c.recovery_rate},
                     {"mean_bit_accuracy", c.mean_bit_accuracy},
                     {"failures", c.failures}};
    if (!c.error.empty()) j["error"] = c.error;
    cells.push_back(j);
  }
  return {{"cells", cells},
          {"corpus_digest", report.corpus_digest},
          {"config", report.config},
          {"noise_generator", kNoiseGenerator},
          {"resize_kernel", kResizeKernel},
          {"recovery_threshold", protector::kRecoveryThreshold}};
}

}  // namespace provgen::attack
