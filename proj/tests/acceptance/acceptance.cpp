// Acceptance suite: one PASS/FAIL line per criterion. Run all criteria, or
// one with --criterion N.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradcheck.hpp"
#include "rg/data/ablation.hpp"
#include "rg/data/datasets.hpp"
#include "rg/data/pipeline.hpp"
#include "rg/eval/metrics.hpp"
#include "rg/eval/report.hpp"
#include "rg/numerics/gaussian.hpp"
#include "rg/recall/recall.hpp"
#include "rg/video/algebra.hpp"

namespace fs = std::filesystem;
using namespace rg;

namespace {

// Tolerances and thresholds.
constexpr double kAlgebraTol = 1e-12;
constexpr double kGradTol = 1e-4;
constexpr double kClosedFormTol = 1e-9;
constexpr double kConvergenceRatio = 0.2;
constexpr double kDiscLow = 0.2;
constexpr double kDiscHigh = 4.0;
constexpr double kRecallRatio = 0.5;
constexpr double kSelfScoreTol = 1e-6;
constexpr double kNoiseSeparation = 10.0;
constexpr double kFvdRatioTol = 1e-3;

// Seed of the toy shapes datasets used by the training criteria.
constexpr std::uint64_t kDataSeed = 7;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Dyadic grid values keep frame sums and differences exact.
video::Frame grid_frame(video::FrameShape shape, num::Stream& s) {
  std::vector<double> px(shape.pixels());
  for (double& v : px) v = static_cast<double>(static_cast<int>(s.below(257)) - 128) / 128.0;
  return video::Frame(shape, px);
}

video::VideoClip grid_clip(video::FrameShape shape, std::size_t t, num::Stream s) {
  std::vector<video::Frame> frames;
  for (std::size_t i = 0; i < t; ++i) frames.push_back(grid_frame(shape, s));
  return video::VideoClip(frames);
}

video::VideoClip real_clip(video::FrameShape shape, std::size_t t, num::Stream s) {
  std::vector<video::Frame> frames;
  for (std::size_t i = 0; i < t; ++i) {
    video::Frame f(shape);
    for (double& v : f.pixels()) v = 2.0 * s.uniform() - 1.0;
    frames.push_back(f);
  }
  return video::VideoClip(frames);
}

double max_abs_diff(const video::VideoClip& a, const video::VideoClip& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.length(); ++i)
    for (std::size_t p = 0; p < a[i].size(); ++p) worst = std::max(worst, std::abs(a[i][p] - b[i][p]));
  return worst;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const num::Stream root(1);
  const video::FrameShape shape{8, 8, 1};
  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const num::Stream s = root.split("roundtrip").split(i);
    const std::size_t t = 2 + static_cast<std::size_t>(num::Stream(s).split("t").below(15));
    const video::VideoClip g = grid_clip(shape, t, s.split("grid"));
    const video::Decomposition d = video::decompose(g);
    if (!(video::reconstruct(d.content, d.motion) == g)) ++failures;
    const video::VideoClip r = real_clip(shape, t, s.split("real"));
    const video::Decomposition dr = video::decompose(r);
    worst = std::max(worst, max_abs_diff(video::reconstruct(dr.content, dr.motion), r));
  }
  for (std::size_t i = 0; i < 20; ++i) {
    const num::Stream s = root.split("reference").split(i);
    const video::VideoClip g = grid_clip(shape, 8, s.split("grid"));
    const video::VideoClip r = real_clip(shape, 8, s.split("real"));
    const video::DiffSequence gm = video::decompose(g).motion, rm = video::decompose(r).motion;
    for (std::size_t ref = 1; ref <= 8; ++ref) {
      const video::VideoClip back = video::reconstruct_from_reference(g[ref - 1], ref, gm);
      if (!(back == g) || !(video::decompose(back).motion == gm)) ++failures;
      if (ref == 1 && !(back == video::reconstruct(g[0], gm))) ++failures;
      worst = std::max(worst, max_abs_diff(video::reconstruct_from_reference(r[ref - 1], ref, rm), r));
    }
  }
  num::Stream sr = root.split("stitch");
  for (std::size_t i = 0; i < 200; ++i) {
    const std::size_t t = 2 + static_cast<std::size_t>(sr.below(15));
    const std::size_t r = 1 + static_cast<std::size_t>(sr.below(t - 1));
    const std::size_t n = 1 + static_cast<std::size_t>(sr.below(12));
    std::vector<video::VideoClip> clips;
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<video::Frame> frames;
      for (std::size_t k = 0; k < t; ++k) frames.emplace_back(video::FrameShape{1, 1, 1}, static_cast<double>(j * 100 + k));
      clips.emplace_back(frames);
    }
    const video::LongVideo lv = video::stitch(clips, r);
    if (lv.frames.size() != (n - 1) * r + t || video::stitched_length(n, t, r) != (n - 1) * r + t) ++failures;
    // Each position holds the frame the index map assigns to it.
    for (std::size_t pos = 0; pos < lv.frames.size(); ++pos) {
      const std::size_t j = std::min(pos / r, n - 1);
      if (lv.frames[pos][0] != static_cast<double>(j * 100 + (pos - j * r))) {
        ++failures;
        break;
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {failures == 0 && worst <= kAlgebraTol && secs < 10.0,
          "exact_failures=" + std::to_string(failures) + " max_real_error=" + fmt("%.3g", worst) +
              " seconds=" + fmt("%.2f", secs)};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  encgan::ModelConfig c;
  c.clip_length = 4;
  c.frame = {3, 3, 1};
  c.content_dim = 3;
  c.motion_dim = 2;
  c.hidden = 5;
  const encgan::ModelBundle b = encgan::make_bundle(c, 5);
  num::Stream s(9);
  const num::Tensor x = s.uniform_tensor({2, c.clip_width()}, -1, 1);
  const recall::PairBatch pb{x, s.uniform_tensor({2, c.clip_width()}, -1, 1)};
  const num::Stream ls(9);
  using BM = encgan::BoundModel;
  const std::vector<std::pair<const char*, encgan::LossBuilder>> losses{
      {"enc", [&](const BM& m) { return encgan::build_loss_enc(m, x, ls); }},
      {"enc_v", [&](const BM& m) { return encgan::build_loss_enc_v(m, x, ls); }},
      {"gen", [&](const BM& m) { return encgan::build_loss_gen(m, x, ls); }},
      {"d_image", [&](const BM& m) { return encgan::build_loss_d_image(m, x, ls); }},
      {"d_video", [&](const BM& m) { return encgan::build_loss_d_video(m, x, ls); }},
      {"rencg", [&](const BM& m) { return recall::build_loss_rencg(m, pb, ls); }},
      {"d_image_r", [&](const BM& m) { return recall::build_loss_d_image_r(m, pb, ls); }},
      {"d_video_r1", [&](const BM& m) { return recall::build_loss_d_video_r1(m, pb, ls); }},
      {"d_video_merged", [&](const BM& m) { return recall::build_loss_d_video_merged(m, pb, 2, ls); }},
      {"merged_gen", [&](const BM& m) { return recall::build_loss_merged_gen(m, pb, 2, ls); }},
  };
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, build] : losses) {
    const auto r = rg::testing::gradient_check(b, encgan::kAllGroups, build);
    if (r.max_error >= worst) {
      worst = r.max_error;
      worst_name = name;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < kGradTol && secs < 300.0,
          "losses=" + std::to_string(losses.size()) + " max_rel_error=" + fmt("%.3g", worst) + " worst=" +
              worst_name + " seconds=" + fmt("%.2f", secs)};
}

Outcome criterion3() {
  const double ln2 = std::numbers::ln2;
  std::vector<std::pair<std::string, double>> errors;
  {
    num::Tape tape;
    const num::GaussianParams q = num::make_gaussian(tape.constant(num::Tensor({1, 1}, {1.0})),
                                                     tape.constant(num::Tensor({1, 1}, {0.0})));
    errors.emplace_back("kl", std::abs(num::gaussian_kl(q).value().item() - 0.5));
  }
  {
    encgan::ModelConfig c;
    c.clip_length = 4;
    c.frame = {3, 3, 1};
    c.content_dim = 3;
    c.motion_dim = 2;
    c.hidden = 5;
    encgan::ModelBundle b = encgan::make_bundle(c, 6);
    for (num::Mlp* d : b.discriminators()) {
      auto& p = d->params();
      for (std::size_t k = p.size() - 2; k < p.size(); ++k)
        for (double& v : p[k].value.storage()) v = 0.0;
    }
    num::Stream s(2);
    const num::Tensor x = s.uniform_tensor({3, c.clip_width()}, -1, 1);
    const recall::PairBatch pb{x, s.uniform_tensor({3, c.clip_width()}, -1, 1)};
    const num::Stream ls(4);
    errors.emplace_back("d_image", std::abs(encgan::loss_d_image(b, x, ls) - 3 * ln2));
    errors.emplace_back("d_video", std::abs(encgan::loss_d_video(b, x, ls) - 3 * ln2));
    errors.emplace_back("d_video_merged", std::abs(recall::loss_d_video_merged(b, pb, 2, ls) - 3 * ln2));
    errors.emplace_back("d_image_r", std::abs(recall::loss_d_image_r(b, pb, ls) - 2 * ln2));
    errors.emplace_back("d_video_r1", std::abs(recall::loss_d_video_r1(b, pb, ls) - 2 * ln2));
    num::Tape tape;
    const encgan::BoundModel m = encgan::bind(tape, b, 0);
    const num::Var real = tape.constant(x);
    const double rec =
        encgan::squared_error(real, encgan::reconstruct_batch(m, real, ls).output.raw_clip).value().item();
    errors.emplace_back("gen_adversarial", std::abs(encgan::loss_gen(b, x, ls) - rec - 4 * ln2));
  }
  {
    auto fit = [](double mu, double var) {
      return eval::GaussianFit{Eigen::VectorXd::Constant(1, mu), Eigen::MatrixXd::Constant(1, 1, var), 1};
    };
    errors.emplace_back("frechet_mean", std::abs(eval::frechet_distance(fit(0, 1), fit(1, 1)) - 1.0));
    errors.emplace_back("frechet_scale", std::abs(eval::frechet_distance(fit(0, 1), fit(0, 4)) - 1.0));
  }
  {
    const eval::InceptionScore u = eval::inception_score(Eigen::MatrixXd::Constant(8, 4, 0.25));
    errors.emplace_back("is_uniform", std::abs(u.score - 1.0));
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(8, 4);
    for (int i = 0; i < 8; ++i) onehot(i, i % 4) = 1.0;
    errors.emplace_back("is_onehot", std::abs(eval::inception_score(onehot).score - 4.0));
    num::Stream s(5);
    Eigen::MatrixXd p(32, 4);
    for (int i = 0; i < 32; ++i) {
      for (int k = 0; k < 4; ++k) p(i, k) = s.uniform() + 1e-3;
      p.row(i) /= p.row(i).sum();
    }
    const eval::InceptionScore r = eval::inception_score(p);
    errors.emplace_back("is_log_identity", std::abs(std::log(r.score) - (r.inter_entropy - r.intra_entropy)));
  }
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, e] : errors) {
    if (e >= worst) {
      worst = e;
      worst_name = name;
    }
  }
  return {worst <= kClosedFormTol,
          "values=" + std::to_string(errors.size()) + " max_error=" + fmt("%.3g", worst) + " worst=" + worst_name};
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  data::RunConfig c;
  const auto videos = data::shapes_dataset(400, 48, kDataSeed);
  encgan::ModelBundle b = encgan::make_bundle(c.model_config(), c.seed);
  const num::Tensor probe = data::fixed_eval_batch(c, videos, 32);
  double mse10 = 0.0, lo = 1e300, hi = -1e300;
  data::train_encgan(c, videos, b, [&](std::size_t step, const encgan::TrainReport& r) {
    if (step == 10) mse10 = encgan::reconstruction_mse(b, probe);
    if (step + 500 > c.steps) {
      lo = std::min(lo, r.loss_d_image);
      hi = std::max(hi, r.loss_d_image);
    }
  });
  const double final_mse = encgan::reconstruction_mse(b, probe);
  const double ratio = final_mse / mse10;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {ratio < kConvergenceRatio && lo > kDiscLow && hi < kDiscHigh && secs < 600.0,
          "mse10=" + fmt("%.4f", mse10) + " mse2000=" + fmt("%.4f", final_mse) + " ratio=" + fmt("%.3f", ratio) +
              " d_image_range=[" + fmt("%.3f", lo) + "," + fmt("%.3f", hi) + "] seconds=" + fmt("%.0f", secs)};
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  data::RunConfig c;
  const auto videos = data::shapes_dataset(400, 48, kDataSeed);
  const recall::PairSet pairs = data::recall_pairs(c, videos);
  encgan::ModelBundle b = encgan::make_bundle(c.model_config(), c.seed);
  auto mismatch = [&] {
    recall::ChainOptions o = data::chain_options(c, 8);
    o.mode = recall::ChainMode::kMean;
    recall::ChainResult r;
    recall::chain_generate_video(b, o, num::Stream(c.seed).split("acceptance"), &r);
    return r.mean_mismatch;
  };
  const double before = mismatch();
  data::train_recall(c, pairs, b);
  const double after = mismatch();
  const double ratio = after / before;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {ratio <= kRecallRatio && secs < 900.0,
          "untrained=" + fmt("%.4f", before) + " trained=" + fmt("%.4f", after) + " ratio=" + fmt("%.3f", ratio) +
              " seconds=" + fmt("%.0f", secs)};
}

class CountingSink : public recall::FrameSink {
 public:
  void push(const video::Frame&) override { ++count; }
  std::size_t count = 0;
};

Outcome criterion6() {
  data::RunConfig c;
  const encgan::ModelBundle b = encgan::make_bundle(c.model_config(), c.seed);
  recall::ChainOptions o = data::chain_options(c, 127);
  CountingSink sink;
  const recall::ChainResult r = recall::chain_generate(b, o, num::Stream(3), sink);
  const bool ok = sink.count == 1024 && r.frames_emitted == 1024 && r.peak_buffers <= 2 * c.t_c;
  return {ok, "frames=" + std::to_string(sink.count) + " peak_buffers=" + std::to_string(r.peak_buffers) +
                  " bound=" + std::to_string(2 * c.t_c)};
}

Outcome criterion7() {
  const auto all = data::shapes_dataset(400, 48, kDataSeed);
  std::vector<std::vector<video::Frame>> frames;
  for (const auto& v : all) frames.push_back(v.frames);
  const eval::FeatureExtractor fx({16, 16, 1}, 16);

  const eval::SegmentScores self = eval::segmentwise_scores(frames, frames, fx);
  double self_worst = 0.0;
  for (double s : self.scores) self_worst = std::max(self_worst, s);

  const std::size_t half = frames.size() / 2;
  const std::vector<std::vector<video::Frame>> a(frames.begin(), frames.begin() + static_cast<std::ptrdiff_t>(half));
  const std::vector<std::vector<video::Frame>> b(frames.begin() + static_cast<std::ptrdiff_t>(half), frames.end());
  std::vector<std::vector<video::Frame>> noise;
  num::Stream ns(11);
  for (std::size_t i = 0; i < half; ++i) {
    std::vector<video::Frame> v;
    for (std::size_t k = 0; k < 48; ++k) {
      video::Frame f({16, 16, 1});
      for (double& p : f.pixels()) p = 2.0 * ns.uniform() - 1.0;
      v.push_back(f);
    }
    noise.push_back(v);
  }
  const double halves = eval::segmentwise_scores(b, a, fx).average;
  const double vs_noise = eval::segmentwise_scores(noise, a, fx).average;
  const double ratio = eval::fvd_ratio(113.5, 145.9).ratio;
  const bool ok = self_worst < kSelfScoreTol && vs_noise >= kNoiseSeparation * halves &&
                  std::abs(ratio - 0.778) <= kFvdRatioTol;
  return {ok, "self_max=" + fmt("%.3g", self_worst) + " halves=" + fmt("%.4f", halves) + " noise=" +
                  fmt("%.4f", vs_noise) + " separation=" + fmt("%.1f", vs_noise / halves) + " fvd_ratio=" +
                  fmt("%.4f", ratio)};
}

std::string g_cli;
fs::path g_work;

int shell(const std::string& cmd) { return std::system(cmd.c_str()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome criterion8() {
  if (g_cli.empty()) return {false, "no --cli given"};
  const fs::path dir = g_work / "ablate";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string report = (dir / "ablation.tsv").string();
  const int rc = shell(g_cli + " ablate --report " + report + " --text " + (dir / "ablation.txt").string() +
                       " > " + (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string());
  if (rc != 0) return {false, "ablate exited with " + std::to_string(rc)};
  const eval::Report r = eval::read_kv_report_file(report);
  const data::AblationOptions o;
  std::size_t missing = 0, wins = 0;
  std::string margins;
  for (const std::string v : {"OVI", "MGV", "Recall"})
    for (std::size_t len : o.lengths) {
      if (!r.find("ablation." + v + ".mismatch.len" + std::to_string(len))) ++missing;
      if (len >= 16 && !r.find("ablation." + v + ".fvd.len" + std::to_string(len))) ++missing;
    }
  for (std::size_t k : o.overlaps)
    for (std::size_t len : o.lengths) {
      if (k > 0 && !r.find("overlap." + std::to_string(k) + ".mismatch.len" + std::to_string(len))) ++missing;
      if (len >= 16 && !r.find("overlap." + std::to_string(k) + ".fvd.len" + std::to_string(len))) ++missing;
    }
  for (std::size_t len : o.lengths) {
    const auto recall = r.find("ablation.Recall.mismatch.len" + std::to_string(len));
    const auto ovi = r.find("ablation.OVI.mismatch.len" + std::to_string(len));
    if (recall && ovi) {
      wins += *recall < *ovi;
      margins += (margins.empty() ? "" : ",") + fmt("%.4f", *ovi - *recall);
    }
  }
  return {missing == 0 && wins == o.lengths.size(),
          "missing_entries=" + std::to_string(missing) + " recall_beats_ovi=" + std::to_string(wins) + "/" +
              std::to_string(o.lengths.size()) + " ovi_minus_recall=[" + margins + "]"};
}

Outcome criterion9() {
  if (g_cli.empty()) return {false, "no --cli given"};
  const fs::path dir = g_work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  const std::string small = " --set steps=25 --set hidden=16 --set content_dim=8 --set motion_dim=4";
  if (shell(g_cli + " dataset-gen --kind shapes --count 8 --length 40 --seed 3 --out " + p("data") + " > /dev/null") != 0)
    return {false, "dataset-gen failed"};
  struct Step {
    std::string name;
    std::string cmd;
    std::vector<std::string> artifacts;
  };
  const std::vector<Step> steps{
      {"train", "train" + small + " --data " + p("data/manifest.txt") + " --out " + p("a.ck") + " --log " + p("a.log"),
       {"a.ck", "a.log"}},
      {"train-recall",
       "train-recall" + small + " --data " + p("data/manifest.txt") + " --out " + p("r.ck") + " --log " + p("r.log"),
       {"r.ck", "r.log"}},
      {"generate-long", "generate-long --checkpoint " + p("r.ck") + " --length 40 --videos 4 --out " + p("long"),
       {"long/manifest.txt", "long/long_00000.rcg", "long/long_00003.rcg"}},
      {"eval", "eval --generated " + p("long/manifest.txt") + " --reference " + p("data/manifest.txt") +
                   " --report " + p("eval.tsv"),
       {"eval.tsv"}},
  };
  std::string mismatched;
  for (const Step& s : steps) {
    std::vector<std::string> first;
    for (int run = 0; run < 2; ++run) {
      const std::string out = p(s.name + ".stdout");
      if (shell(g_cli + " " + s.cmd + " > " + out) != 0) return {false, s.name + " failed"};
      std::vector<std::string> bytes{slurp(out)};
      for (const auto& a : s.artifacts) bytes.push_back(slurp(dir / a));
      if (run == 0) {
        first = bytes;
      } else if (bytes != first) {
        mismatched += (mismatched.empty() ? "" : ",") + s.name;
      }
    }
  }
  return {mismatched.empty(), mismatched.empty() ? "commands=4 identical" : "differs=" + mismatched};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"frame algebra oracles", criterion1},
    {"loss gradients", criterion2},
    {"closed-form values", criterion3},
    {"short-clip convergence", criterion4},
    {"recall overlap mismatch", criterion5},
    {"fixed-memory long generation", criterion6},
    {"evaluation protocol", criterion7},
    {"ablation harness", criterion8},
    {"determinism", criterion9},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  std::string work = (fs::temp_directory_path() / "rg_acceptance").string();
  app.add_option("--criterion", only, "run a single criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--cli", g_cli, "path to the recallgan executable");
  app.add_option("--work", work, "scratch directory");
  CLI11_PARSE(app, argc, argv);
  g_work = work;
  fs::create_directories(g_work);

  bool all_ok = true;
  for (std::size_t i = 0; i < kCriteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    try {
      o = kCriteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_ok = all_ok && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << kCriteria[i].first
              << "): " << o.detail << std::endl;
  }
  return all_ok ? 0 : 1;
}
