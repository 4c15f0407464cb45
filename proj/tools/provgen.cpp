#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "provgen/attack/bench.hpp"
#include "provgen/core/digest.hpp"
#include "provgen/core/png_codec.hpp"
#include "provgen/core/ppm.hpp"
#include "provgen/orchestrator/http_api.hpp"
#include "provgen/orchestrator/pipeline.hpp"

namespace fs = std::filesystem;
using namespace provgen;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return nlohmann::json::parse(in);
}

std::vector<fs::path> ppm_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"provgen: plan, generate, review, integrate and watermark scenes"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run one session to completion");
  std::string prompt, out_dir = "out", config_path;
  std::uint64_t seed = 0;
  std::vector<std::string> ablate;
  std::optional<double> amplitude;
  run->add_option("--prompt", prompt)->required();
  run->add_option("--seed", seed);
  run->add_option("--ablate", ablate)
      ->check(CLI::IsMember({"no-reviewer", "no-integration", "posthoc-protection", "no-hitl"}));
  run->add_option("--config", config_path, "pipeline config JSON")->check(CLI::ExistingFile);
  run->add_option("--amplitude", amplitude);
  run->add_option("--out", out_dir);

  // corpus
  auto* corpus = app.add_subcommand("corpus", "render procedural scenes for benchmarking");
  int corpus_n = 100;
  std::uint64_t corpus_seed = 1;
  std::string corpus_out = "corpus";
  corpus->add_option("--n", corpus_n)->check(CLI::PositiveNumber);
  corpus->add_option("--seed", corpus_seed);
  corpus->add_option("--out", corpus_out);

  // bench
  auto* bench = app.add_subcommand("bench", "attack a corpus and report recovery rates");
  std::string bench_corpus, grid = "std", report_path = "robustness.csv", json_path;
  std::uint64_t bench_seed = 0;
  bool posthoc = false;
  bench->add_option("--corpus", bench_corpus, "directory of PPM images")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--grid", grid, "std, quick or a JSON file of attack specs");
  bench->add_option("--report", report_path);
  bench->add_option("--json", json_path);
  bench->add_option("--seed", bench_seed);
  bench->add_flag("--posthoc", posthoc, "also run the post-hoc protection mode");

  // wm
  auto* wm = app.add_subcommand("wm", "embed or verify a watermark");
  wm->require_subcommand(1);
  auto* embed = wm->add_subcommand("embed");
  auto* verify = wm->add_subcommand("verify");
  std::string image_path, provenance_path, marked_path;
  int offset_x = 0, offset_y = 0;
  for (auto* sub : {embed, verify}) {
    sub->add_option("--image", image_path)->required()->check(CLI::ExistingFile);
    sub->add_option("--provenance", provenance_path)->required();
  }
  embed->add_option("--out", marked_path)->required();
  embed->add_option("--amplitude", amplitude);
  verify->add_option("--offset-x", offset_x, "crop offset in the original frame");
  verify->add_option("--offset-y", offset_y);

  // serve
  auto* serve = app.add_subcommand("serve", "run the session service");
  std::string addr = "127.0.0.1:8080", data_dir = "sessions";
  serve->add_option("--addr", addr);
  serve->add_option("--data", data_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      PipelineConfig config = config_path.empty() ? PipelineConfig{} : config_from_json(read_json(config_path));
      config.seed = seed;
      config.ablations.no_hitl = true;
      for (const auto& a : ablate) {
        if (a == "no-reviewer") config.ablations.no_reviewer = true;
        if (a == "no-integration") config.ablations.no_integration = true;
        if (a == "posthoc-protection") config.ablations.posthoc_protection = true;
      }
      if (amplitude) config.amplitude = *amplitude;
      auto agents = orchestrator::agents_from_environment();
      const std::int64_t created = agents.clock();
      auto runner = orchestrator::run_pipeline(prompt, config, agents, {}, "cli", created);
      fs::create_directories(out_dir);
      write_text(fs::path(out_dir) / "session.jsonl", serialize_session(runner.record()));
      const auto& artifact = runner.artifact();
      write_ppm(fs::path(out_dir) / "artifact.ppm", artifact.image);
      const auto png = encode_png(artifact.image);
      write_text(fs::path(out_dir) / "artifact.png", std::string(png.begin(), png.end()));
      protector::write_provenance(fs::path(out_dir) / "provenance.json", artifact.provenance);
      write_text(fs::path(out_dir) / "metrics.json", to_json(artifact.metrics).dump(2) + "\n");
      std::cout << to_json(artifact.metrics).dump() << "\n";
      return 0;
    }

    if (*corpus) {
      fs::create_directories(corpus_out);
      const auto images = orchestrator::procedural_corpus(corpus_n, corpus_seed);
      for (std::size_t i = 0; i < images.size(); ++i) {
        std::ostringstream name;
        name << "scene_" << std::setw(4) << std::setfill('0') << i << ".ppm";
        write_ppm(fs::path(corpus_out) / name.str(), images[i]);
      }
      std::cout << images.size() << " scenes written to " << corpus_out << "\n";
      return 0;
    }

    if (*bench) {
      std::vector<Image> images;
      std::vector<protector::WatermarkKey> keys;
      const std::string salt = protector::watermark_salt();
      for (const auto& f : ppm_files(bench_corpus)) {
        images.push_back(read_ppm(f));
        keys.push_back(protector::derive_key(content_hash(images.back()), static_cast<std::int64_t>(keys.size()),
                                             salt, {}, images.back().width(), images.back().height()));
      }
      if (images.empty()) throw Error(ErrorCode::kInvalidArgument, "no .ppm files in " + bench_corpus);
      std::vector<attack::AttackSpec> specs;
      if (grid == "std") {
        specs = attack::standard_grid(bench_seed);
      } else if (grid == "quick") {
        specs = attack::quick_suite(bench_seed);
      } else {
        for (const auto& j : read_json(grid)) specs.push_back(attack::attack_from_json(j));
      }
      attack::BenchOptions options;
      options.compare_posthoc = posthoc;
      options.config = {{"corpus", bench_corpus}, {"seed", bench_seed}, {"grid", grid}};
      const auto report = attack::run_bench(images, keys, specs, options);
      write_text(report_path, attack::to_csv(report));
      if (!json_path.empty()) write_text(json_path, attack::to_json(report).dump(2) + "\n");
      std::cout << attack::to_csv(report);
      return 0;
    }

    if (*embed) {
      const Image image = read_ppm(image_path);
      protector::WatermarkParams params;
      if (amplitude) params.amplitude = *amplitude;
      const std::int64_t ts = now_ms();
      const Digest pre = content_hash(image);
      const auto key = protector::derive_key(pre, ts, protector::watermark_salt(), params, image.width(),
                                             image.height());
      const Image marked = attack::protect_integrated(image, key);
      write_ppm(marked_path, marked);
      auto record = protector::make_provenance(key, "cli", ts, pre, content_hash(marked));
      record.config = nlohmann::json::object();
      protector::write_provenance(provenance_path, record);
      std::cout << "psnr " << protector::psnr(image, marked) << " dB\n";
      return 0;
    }

    if (*verify) {
      const Image image = read_ppm(image_path);
      const auto record = protector::read_provenance(provenance_path);
      const auto key = protector::key_from_provenance(record, protector::watermark_salt());
      protector::ExtractionResult result;
      if (image.width() == key.width && image.height() == key.height) {
        result = protector::extract(image, key);
      } else {
        result = protector::extract_cropped(image, key, offset_x, offset_y);
      }
      const bool exact = to_hex(content_hash(image)) == record.digest_post;
      std::cout << nlohmann::json{{"bit_accuracy", result.bit_accuracy},
                                  {"recovered", result.recovered},
                                  {"bits_scored", result.bits_scored},
                                  {"digest_match", exact}}
                       .dump()
                << "\n";
      return result.recovered ? 0 : 1;
    }

    if (*serve) {
      const auto colon = addr.rfind(':');
      if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--addr must be host:port");
      orchestrator::SessionService service(orchestrator::agents_from_environment(), data_dir);
      for (const auto& [file, reason] : service.load_errors()) std::cerr << "not restored: " << file << "\n";
      std::cerr << "listening on " << addr << "\n";
      orchestrator::serve(service, addr.substr(0, colon), std::stoi(addr.substr(colon + 1)));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
