// One line per criterion: PASS or FAIL, the criterion name, what was measured.
// Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jpeg_oracle.hpp"
#include "poisson_oracle.hpp"
#include "provgen/attack/bench.hpp"
#include "provgen/attack/jpeg.hpp"
#include "provgen/core/digest.hpp"
#include "provgen/core/ppm.hpp"
#include "provgen/integrator/scene.hpp"
#include "provgen/orchestrator/pipeline.hpp"
#include "provgen/planner/plan.hpp"
#include "provgen/protector/dct.hpp"
#include "provgen/protector/provenance.hpp"
#include "provgen/protector/watermark.hpp"
#include "provgen/reviewer/gate.hpp"
#include "scenes.hpp"
#include "trace_oracle.hpp"

using namespace provgen;
using namespace provgen::orchestrator;

namespace {

// Pinned tolerances and budgets.
constexpr int kCorpusN = 100;
constexpr std::uint64_t kCorpusSeed = 7;
constexpr std::uint64_t kNoiseSeed = 3;
constexpr double kRoundTripBudgetS = 30.0;
constexpr double kBenchBudgetS = 600.0;
constexpr double kMinRecovery = 0.90;
constexpr double kMinPsnr = 40.0;
constexpr double kDctTol = 1e-9;
constexpr int kDctBlocks = 1000;
constexpr double kPoissonTol = 1e-5;
constexpr int kPoissonFixtures = 20;
constexpr double kJpegTol = 2.0 / 255.0;
constexpr double kLossTol = 1e-12;
constexpr int kHarmonizeScenes = 100;
constexpr int kConformancePrompts = 50;
constexpr std::int64_t kT0 = 1'700'000'000'123;
const std::string kSalt = "acceptance-salt";

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Corpus {
  std::vector<Image> images;
  std::vector<protector::WatermarkKey> keys;
  double render_s = 0;
};

Corpus make_corpus() {
  const auto t = std::chrono::steady_clock::now();
  Corpus c;
  c.images = procedural_corpus(kCorpusN, kCorpusSeed);
  c.render_s = seconds_since(t);
  for (std::size_t i = 0; i < c.images.size(); ++i) {
    const Image& im = c.images[i];
    c.keys.push_back(protector::derive_key(content_hash(im), kT0 + static_cast<std::int64_t>(i), kSalt, {},
                                           im.width(), im.height()));
  }
  return c;
}

Outcome roundtrip(const Corpus& c) {
  const auto t = std::chrono::steady_clock::now();
  int exact = 0, sized = 0;
  for (std::size_t i = 0; i < c.images.size(); ++i) {
    sized += c.images[i].width() == 256 && c.images[i].height() == 256;
    const Image marked = attack::protect_integrated(c.images[i], c.keys[i]);
    const Image delivered = decode_ppm(encode_ppm(marked));
    exact += protector::extract(delivered, c.keys[i]).bit_accuracy == 1.0;
  }
  const double s = seconds_since(t);
  Outcome o;
  o.pass = exact == kCorpusN && sized == kCorpusN && s + c.render_s < kRoundTripBudgetS;
  o.detail = std::to_string(exact) + "/" + std::to_string(kCorpusN) + " images at bit accuracy 1.0 (" +
             std::to_string(sized) + " at 256x256), embed+export+extract " + fmt("%.2f", s) + " s, corpus render " +
             fmt("%.2f", c.render_s) + " s, budget " + fmt("%.0f", kRoundTripBudgetS) + " s";
  return o;
}

struct BenchResult {
  attack::RobustnessReport report;
  double seconds = 0;
};

BenchResult bench(const Corpus& c) {
  const auto t = std::chrono::steady_clock::now();
  attack::BenchOptions opt;
  opt.compare_posthoc = true;
  BenchResult r{attack::run_bench(c.images, c.keys, attack::standard_grid(kNoiseSeed), opt), 0};
  r.seconds = seconds_since(t);
  return r;
}

Outcome robustness(const BenchResult& b, const std::filesystem::path& csv_path) {
  const std::string csv = attack::to_csv(b.report);
  std::ofstream(csv_path) << csv;
  Outcome o;
  const std::vector<std::pair<std::string, std::string>> cells{{"jpeg", "70"}, {"noise", "0.03"}, {"crop", "0.25"}};
  for (const auto& [name, param] : cells) {
    const attack::BenchCell* cell = b.report.find(name, param);
    if (cell == nullptr) {
      o.pass = false;
      o.detail += name + "/" + param + " missing; ";
      continue;
    }
    o.pass = o.pass && cell->recovery_rate >= kMinRecovery && cell->corpus_n == kCorpusN && cell->failures == 0;
    o.detail += name + "/" + param + " " + fmt("%.2f", cell->recovery_rate) + "; ";
  }
  // Full grid: 11 integrated and 11 post-hoc cells, plus the header.
  const std::size_t rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
  int integrated = 0;
  for (const auto& cell : b.report.cells) integrated += cell.mode == "integrated";
  o.pass = o.pass && integrated == 11 && rows == 1 + b.report.cells.size() && b.seconds < kBenchBudgetS;
  o.detail += std::to_string(integrated) + " integrated cells in " + csv_path.filename().string() + ", " +
              fmt("%.1f", b.seconds) + " s for both modes, budget " + fmt("%.0f", kBenchBudgetS) + " s";
  return o;
}

Outcome ablation(const BenchResult& b) {
  const attack::BenchCell* in = b.report.find("jpeg", "70", "integrated");
  const attack::BenchCell* ph = b.report.find("jpeg", "70", "posthoc");
  Outcome o;
  if (in == nullptr || ph == nullptr) return {false, "jpeg/70 cells missing"};
  o.pass = in->recovery_rate >= ph->recovery_rate && in->corpus_n == ph->corpus_n;
  o.detail = "jpeg/70 integrated " + fmt("%.2f", in->recovery_rate) + " vs post-hoc " + fmt("%.2f", ph->recovery_rate);
  const attack::BenchCell* in50 = b.report.find("jpeg", "50", "integrated");
  const attack::BenchCell* ph50 = b.report.find("jpeg", "50", "posthoc");
  if (in50 && ph50) {
    o.detail += " (jpeg/50: " + fmt("%.2f", in50->recovery_rate) + " vs " + fmt("%.2f", ph50->recovery_rate) + ")";
  }
  return o;
}

Outcome imperceptibility(const Corpus& c) {
  double worst = 1e9;
  int ok = 0;
  for (std::size_t i = 0; i < c.images.size(); ++i) {
    const double p = protector::psnr(c.images[i], attack::protect_integrated(c.images[i], c.keys[i]));
    worst = std::min(worst, p);
    ok += p >= kMinPsnr;
  }
  return {ok == kCorpusN, std::to_string(ok) + "/" + std::to_string(kCorpusN) + " images >= " +
                              fmt("%.0f", kMinPsnr) + " dB, minimum " + fmt("%.2f", worst) + " dB"};
}

Outcome kernels() {
  Outcome o;
  Rng rng(99);
  double id_err = 0, parseval_err = 0;
  for (int b = 0; b < kDctBlocks; ++b) {
    protector::Block x{};
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const auto c = protector::dct8(x);
    const auto y = protector::idct8(c);
    double ex = 0, ec = 0;
    for (int i = 0; i < 64; ++i) {
      id_err = std::max(id_err, std::fabs(x[i] - y[i]));
      ex += x[i] * x[i];
      ec += c[i] * c[i];
    }
    parseval_err = std::max(parseval_err, std::fabs(ex - ec));
  }
  o.pass = id_err <= kDctTol && parseval_err <= kDctTol;
  o.detail = "dct identity " + fmt("%.1e", id_err) + ", Parseval " + fmt("%.1e", parseval_err);

  // Seam blend against a dense direct solve: a step edge plus random region fixtures.
  double blend_err = 0;
  bool outside_kept = true;
  std::vector<integrator::Scene> fixtures;
  {
    integrator::Scene s;
    s.image = Image(16, 16);
    s.labels.assign(256, 0);
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        s.image.at(x, y, 0) = x < 8 ? 0.0f : 1.0f;
        s.image.at(x, y, 1) = 0.5f;
        s.image.at(x, y, 2) = 0.25f;
        s.labels[static_cast<std::size_t>(y) * 16 + x] = x < 8 ? 0 : 1;
      }
    }
    fixtures.push_back(s);
  }
  for (int f = 0; f < kPoissonFixtures; ++f) {
    integrator::Scene s;
    s.image = Image(16, 16);
    s.labels.assign(256, 0);
    for (float& v : s.image.samples()) v = static_cast<float>(rng.uniform(0.2, 0.8));
    for (int r = 1; r <= 2; ++r) {
      const int x0 = static_cast<int>(rng.below(10)), y0 = static_cast<int>(rng.below(10));
      const int x1 = x0 + 3 + static_cast<int>(rng.below(4)), y1 = y0 + 3 + static_cast<int>(rng.below(4));
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) s.labels[static_cast<std::size_t>(y) * 16 + x] = r;
      }
    }
    fixtures.push_back(s);
  }
  for (auto& s : fixtures) {
    s.stage = integrator::SceneStage::kHarmonized;
    s.layout.scene_size = 16;
    const integrator::Scene out = integrator::blend_seams(s);
    const auto band = integrator::seam_band(s);
    for (int ch = 0; ch < 3; ++ch) {
      const auto exact = testing_support::dense_seam_solve(s, band, ch);
      for (std::size_t i = 0; i < band.size(); ++i) {
        const int x = static_cast<int>(i % 16), y = static_cast<int>(i / 16);
        if (band[i]) {
          blend_err = std::max(blend_err, std::fabs(out.image.at(x, y, ch) - std::clamp(exact[i], 0.0, 1.0)));
        } else {
          outside_kept = outside_kept && out.image.at(x, y, ch) == s.image.at(x, y, ch);
        }
      }
    }
  }
  o.pass = o.pass && blend_err <= kPoissonTol && outside_kept;
  o.detail += "; seam blend vs dense solve " + fmt("%.1e", blend_err) + " on " + std::to_string(fixtures.size()) +
              " 16x16 fixtures";

  // JPEG against libjpeg's float path on scenes, smooth and noise fixtures.
  std::vector<Image> jf = procedural_corpus(4, 5);
  for (std::uint64_t s = 0; s < 4; ++s) {
    Rng r(s + 40);
    Image im(64 + 8 * static_cast<int>(s), 48 + 5 * static_cast<int>(s));
    const double a = r.uniform(0.2, 0.8), fx = r.uniform(0.02, 0.1), fy = r.uniform(0.02, 0.1);
    for (int y = 0; y < im.height(); ++y) {
      for (int x = 0; x < im.width(); ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          im.at(x, y, ch) = static_cast<float>(std::clamp(a + 0.25 * std::sin(fx * x + ch) * std::cos(fy * y), 0.0, 1.0));
        }
      }
    }
    jf.push_back(im);
  }
  {
    Rng r(77);
    Image im(40, 40);
    for (float& v : im.samples()) v = static_cast<float>(r.uniform());
    jf.push_back(im);
  }
  double jpeg_err = 0;
  for (int q : {50, 70, 95}) {
    for (const auto& im : jf) {
      jpeg_err = std::max(jpeg_err, testing_support::max_abs_diff(attack::jpeg_roundtrip(im, q),
                                                                  testing_support::libjpeg_roundtrip(im, q)));
    }
  }
  o.pass = o.pass && jpeg_err <= kJpegTol;
  o.detail += "; jpeg vs libjpeg " + fmt("%.0f", jpeg_err * 255) + "/255 max on " + std::to_string(jf.size()) +
              " fixtures at q50/70/95";
  return o;
}

Outcome loss_algebra() {
  Outcome o;
  const std::vector<double> scores{0.30, 0.20, 0.25};
  const double hinge = reviewer::review_loss(scores, 0.25);
  const std::vector<double> passing{0.5, 0.9};
  const double hinge0 = reviewer::review_loss(passing, 0.25);
  integrator::FeatureVector e1{}, e2{};
  e1[0] = 1.0;
  e2[1] = 1.0;
  const double same = integrator::coherence_loss({{1, e1}, {2, e1}}, {{1, 2}});
  const double ortho = integrator::coherence_loss({{1, e1}, {2, e2}}, {{1, 2}});
  const double apart = integrator::coherence_loss({{1, e1}, {2, e2}}, {});
  o.pass = std::fabs(hinge - 0.05) <= kLossTol && hinge0 == 0.0 && std::fabs(same) <= kLossTol &&
           std::fabs(ortho - 2.0) <= kLossTol && apart == 0.0;
  o.detail = "hinge " + fmt("%.15g", hinge) + ", coherence " + fmt("%.3g", same) + "/" + fmt("%.15g", ortho);

  Rng rng(5);
  int exact = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(0, 3), b = rng.uniform(0, 3), c = rng.uniform(0, 3), d = rng.uniform(0, 30);
    exact += MetricsReport::make(a, b, c, d).l_joint == a + b + c + d;
  }
  PipelineConfig cfg;
  cfg.seed = 42;
  cfg.ablations.no_hitl = true;
  const SessionRunner r = run_pipeline("a red dragon above a castle at sunset", cfg, local_agents(fixed_clock(kT0), kSalt));
  const MetricsReport& m = r.artifact().metrics;
  const bool session_sum = m.l_joint == m.l_plan + m.l_rev + m.l_int + m.l_prot;
  o.pass = o.pass && exact == 1000 && session_sum;
  o.detail += ", joint sum exact on " + std::to_string(exact) + "/1000 draws and on a session (" +
              fmt("%.6f", m.l_joint) + ")";
  return o;
}

class HarshOnCastles : public reviewer::Scorer {
 public:
  reviewer::AlignmentScore score(const generator::Component& c, const PromptText& p,
                                 const planner::Subtask& s) override {
    reviewer::AlignmentScore out = stub_.score(c, p, s);
    if (s.entity == "castle") out.value = 0.1;
    return out;
  }

 private:
  reviewer::StubScorer stub_;
};

Outcome review_gate() {
  Outcome o;
  Agents agents = local_agents(fixed_clock(kT0), kSalt);
  agents.scorer = std::make_shared<HarshOnCastles>();
  PipelineConfig cfg;
  cfg.seed = 8;
  cfg.max_retries = 3;
  cfg.ablations.no_hitl = true;
  const SessionRunner gated = run_pipeline("a red dragon above a castle at sunset", cfg, agents);
  int castle = -1;
  for (const auto& s : gated.plan()->subtasks) castle = s.entity == "castle" ? s.id : castle;
  int regen = 0, other = 0, max_attempt = 0;
  for (const auto& e : gated.record().events) {
    if (e.kind == EventKind::kRegenerationTriggered) (e.payload.at("subtask_id") == castle ? regen : other) += 1;
    if (e.kind == EventKind::kComponentGenerated && e.payload.at("subtask_id") == castle) {
      max_attempt = std::max(max_attempt, e.payload.at("attempt").get<int>());
    }
  }
  o.pass = gated.state() == SessionState::kDone && regen >= 1 && regen <= cfg.max_retries && other == 0 &&
           max_attempt <= cfg.max_retries;
  o.detail = std::to_string(regen) + " regenerations for the sub-threshold component (max_retries " +
             std::to_string(cfg.max_retries) + ")";

  cfg.ablations.no_reviewer = true;
  const SessionRunner skipped = run_pipeline("a red dragon above a castle at sunset", cfg, agents);
  int regen_off = 0;
  for (const auto& e : skipped.record().events) regen_off += e.kind == EventKind::kRegenerationTriggered;
  o.pass = o.pass && skipped.state() == SessionState::kDone && regen_off == 0;
  o.detail += ", " + std::to_string(regen_off) + " with the reviewer ablated";

  Rng rng(2025);
  int kept = 0;
  for (int i = 0; i < kHarmonizeScenes; ++i) {
    const integrator::Scene s = testing_support::random_scene(rng, 128, 64);
    kept += integrator::coherence_loss(integrator::harmonize(s)) <= integrator::coherence_loss(s);
  }
  o.pass = o.pass && kept == kHarmonizeScenes;
  o.detail += ", harmonize kept coherence on " + std::to_string(kept) + "/" + std::to_string(kHarmonizeScenes) +
              " random scenes";
  return o;
}

using Step = std::optional<Intervention>;

void perform(SessionRunner& r, const Step& s) {
  if (s) {
    r.submit(*s);
  } else {
    r.advance();
  }
}

Outcome conformance() {
  Outcome o;
  const Agents agents = local_agents(fixed_clock(kT0), kSalt);
  Rng rng(31337);
  int conform = 0;
  std::string first_bad;
  for (int i = 0; i < kConformancePrompts; ++i) {
    const std::string prompt = random_prompt(rng);
    PipelineConfig cfg;
    cfg.seed = 500 + static_cast<std::uint64_t>(i);
    cfg.quick_suite = false;
    cfg.ablations.no_hitl = true;
    try {
      const SessionRunner r = run_pipeline(prompt, cfg, agents);
      const auto v = testing_support::check_trace(r.record().events, true);
      SessionRecord folded;
      for (const auto& e : r.record().events) apply_event(folded, e);
      if (v.ok && folded.state == SessionState::kDone) {
        ++conform;
      } else if (first_bad.empty()) {
        first_bad = prompt + ": " + v.why;
      }
    } catch (const std::exception& e) {
      if (first_bad.empty()) first_bad = prompt + ": " + e.what();
    }
  }
  o.pass = conform == kConformancePrompts;
  o.detail = std::to_string(conform) + "/" + std::to_string(kConformancePrompts) + " traces conform";
  if (!first_bad.empty()) o.detail += " (first failure " + first_bad + ")";

  // Scripted human session, run twice and replayed from every cut point.
  PipelineConfig cfg;
  cfg.seed = 77;
  cfg.ablations.no_hitl = false;
  const std::string prompt = "a red dragon above a castle at sunset";
  auto script = [](const SessionRunner& r) {
    int dragon = 0;
    for (const auto& s : r.plan()->subtasks) dragon = s.entity == "dragon" ? s.id : dragon;
    return std::vector<Step>{
        Intervention{EditPlan{planner::plan_edit_from_json(
                         {{"op", "set_attribute"}, {"id", dragon}, {"key", "color"}, {"value", "green"}})},
                     "u"},
        std::nullopt,
        std::nullopt,
        Intervention{OverrideReview{dragon, false}, "u"},
        std::nullopt,
        Intervention{SetProtectionParams{0.02, std::nullopt}, "u"},
        std::nullopt,
        Intervention{AdjustLayout{dragon, 0, -4, std::nullopt}, "u"},
        std::nullopt,
        std::nullopt,
    };
  };
  auto drive = [&](std::vector<std::size_t>* ends) {
    SessionRunner r("acc", prompt, cfg, agents, kT0);
    r.advance();
    if (ends) ends->push_back(r.record().events.size());
    for (const auto& s : script(r)) {
      perform(r, s);
      if (ends) ends->push_back(r.record().events.size());
    }
    return r;
  };
  std::vector<std::size_t> ends;
  const SessionRunner a = drive(&ends);
  const SessionRunner b = drive(nullptr);
  const auto art = encode_ppm(a.artifact().image);
  const std::string prov = protector::serialize_provenance(a.artifact().provenance);
  const bool same = a.state() == SessionState::kDone && art == encode_ppm(b.artifact().image) &&
                    prov == protector::serialize_provenance(b.artifact().provenance);
  o.pass = o.pass && same;
  o.detail += "; scripted session deterministic: " + std::string(same ? "yes" : "no");

  const auto steps = script(a);
  int replays = 0, matched = 0;
  for (std::size_t k = 0; k <= a.record().events.size(); ++k) {
    SessionRecord cut = a.record();
    cut.events.resize(k);
    cut.metrics.reset();
    cut.state = replay_state(cut.events);
    ++replays;
    try {
      SessionRunner r = SessionRunner::resume(deserialize_session(serialize_session(cut)), agents);
      std::size_t next = 0;
      if (k == 0) {
        r.advance();
      } else {
        while (next < steps.size() && ends[next + 1] <= k) ++next;
        if (k > ends[next]) ++next;
      }
      for (std::size_t i = next; i < steps.size(); ++i) perform(r, steps[i]);
      matched += r.state() == SessionState::kDone && encode_ppm(r.artifact().image) == art &&
                 protector::serialize_provenance(r.artifact().provenance) == prov;
    } catch (const std::exception&) {
    }
  }
  o.pass = o.pass && matched == replays;
  o.detail += ", kill-and-replay " + std::to_string(matched) + "/" + std::to_string(replays) + " cut points";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path csv = argc > 1 ? argv[1] : "robustness_grid.csv";
  int failures = 0;
  auto report = [&](const std::string& name, const std::function<Outcome()>& run) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  };

  std::optional<Corpus> corpus;
  std::optional<BenchResult> bench_result;
  try {
    corpus = make_corpus();
    bench_result = bench(*corpus);
  } catch (const std::exception& e) {
    std::printf("setup failed: %s\n", e.what());
  }
  auto need = [&](auto f) {
    return [&, f]() -> Outcome {
      if (!corpus || !bench_result) return {false, "corpus or bench unavailable"};
      return f();
    };
  };
  report("watermark-roundtrip", need([&] { return roundtrip(*corpus); }));
  report("robustness-envelope", need([&] { return robustness(*bench_result, csv); }));
  report("integrated-vs-posthoc", need([&] { return ablation(*bench_result); }));
  report("imperceptibility", need([&] { return imperceptibility(*corpus); }));
  report("numerical-kernels", kernels);
  report("loss-algebra", loss_algebra);
  report("review-gate", review_gate);
  report("control-loop-conformance", conformance);
  return failures;
}
