// recallgan: dataset generation, training, generation, evaluation and
// ablation runs over the RCG1 container formats.
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rg/data/ablation.hpp"
#include "rg/data/checkpoint.hpp"
#include "rg/data/config.hpp"
#include "rg/data/container.hpp"
#include "rg/data/datasets.hpp"
#include "rg/data/pipeline.hpp"
#include "rg/error.hpp"
#include "rg/eval/metrics.hpp"
#include "rg/eval/probe.hpp"
#include "rg/eval/report.hpp"
#include "rg/video/algebra.hpp"

namespace fs = std::filesystem;
using namespace rg;

namespace {

// Raised when roundtrip-check finds a failing invariant.
struct CheckFailed {
  std::string message;
};

std::string quote(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return '"' + out + '"';
}

int report_error(const char* kind, int code, const std::string& message) {
  std::cerr << "error kind=" << kind << " exit=" << code << " message=" << quote(message) << '\n';
  return code;
}

// Relative output paths land under $RG_OUTPUT_DIR when it is set.
std::string output_path(const std::string& path) {
  const char* dir = std::getenv("RG_OUTPUT_DIR");
  fs::path p(path);
  if (dir != nullptr && *dir != '\0' && p.is_relative()) p = fs::path(dir) / p;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p.string();
}

std::string output_dir(const std::string& path) {
  const std::string p = output_path(path);
  fs::create_directories(p);
  return p;
}

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "JSON run configuration");
    app->add_option("--set", sets, "key=value override (repeatable)");
  }

  data::Overrides overrides() const {
    data::Overrides out;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      require(eq != std::string::npos && eq > 0, ErrorKind::kConfig,
              "override '" + s + "' is not key=value");
      out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return out;
  }

  data::RunConfig load() const {
    return file.empty() ? data::config_from_json("", overrides())
                        : data::load_config_file(file, overrides());
  }

  // The checkpoint's config with overrides applied; a --config file must
  // describe the same architecture.
  data::Checkpoint checkpoint(const std::string& path) const {
    std::optional<data::RunConfig> expected;
    if (!file.empty()) expected = load();
    data::Checkpoint ck = data::load_checkpoint(path, expected);
    const data::RunConfig merged =
        data::config_from_json(data::config_to_json(expected.value_or(ck.config)), overrides());
    require(merged.same_model(ck.config), ErrorKind::kConfig,
            "overrides change the architecture stored in '" + path + "'");
    ck.config = merged;
    return ck;
  }
};

void check_frames(const data::RunConfig& c, std::span<const data::LabeledVideo> videos) {
  const video::FrameShape want{c.height, c.width, c.channels};
  for (const auto& v : videos) {
    require(!v.frames.empty() && v.frames.front().shape() == want, ErrorKind::kDimensionMismatch,
            "dataset frames are not " + std::to_string(c.height) + "x" + std::to_string(c.width) +
                "x" + std::to_string(c.channels) + " as configured");
  }
}

void print_kv(const std::map<std::string, std::string>& kv) {
  bool first = true;
  for (const auto& [k, v] : kv) {
    std::cout << (first ? "" : " ") << k << '=' << v;
    first = false;
  }
  std::cout << '\n';
}

std::string num_str(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- commands ------------------------------------------------------------------

struct DatasetGenArgs {
  ConfigArgs cfg;
  std::string kind = "shapes";
  std::size_t count = 0;
  std::size_t length = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void run_dataset_gen(const DatasetGenArgs& a) {
  const data::RunConfig c = a.cfg.load();
  require(a.count >= 1, ErrorKind::kInvalidArgument, "--count must be >= 1");
  require(a.length >= 2, ErrorKind::kInvalidArgument, "--length must be >= 2");
  const std::uint64_t seed = a.seed.value_or(c.seed);
  const video::FrameShape shape{c.height, c.width, c.channels};
  std::vector<data::LabeledVideo> videos;
  if (a.kind == "shapes") {
    videos = data::shapes_dataset(a.count, a.length, seed, shape);
  } else if (a.kind == "drift") {
    videos = data::drift_dataset(a.count, a.length, seed, shape);
  } else {
    fail(ErrorKind::kInvalidArgument, "unknown dataset kind '" + a.kind + "'");
  }
  const std::string dir = output_dir(a.out);
  data::write_dataset(dir, videos, c.dtype);
  print_kv({{"manifest", (fs::path(dir) / "manifest.txt").string()},
            {"videos", std::to_string(videos.size())},
            {"frames", std::to_string(a.length)}});
}

struct TrainArgs {
  ConfigArgs cfg;
  std::string data;
  std::string out;
  std::string resume;
  std::string log;
  std::size_t log_every = 100;
};

void run_train(const TrainArgs& a, bool recall_mode) {
  data::Checkpoint start;
  if (!a.resume.empty()) {
    start = a.cfg.checkpoint(a.resume);
  } else {
    start.config = a.cfg.load();
    start.bundle = encgan::make_bundle(start.config.model_config(), start.config.seed);
  }
  const data::RunConfig& c = start.config;
  c.validate();
  const auto videos = data::load_dataset(a.data);
  check_frames(c, videos);

  std::ofstream log;
  if (!a.log.empty()) {
    log.open(output_path(a.log));
    require(log.good(), ErrorKind::kIo, "cannot open log '" + a.log + "'");
  }
  const std::size_t every = std::max<std::size_t>(1, a.log_every);
  std::map<std::string, std::string> last;
  if (recall_mode) {
    const recall::PairSet pairs = data::recall_pairs(c, videos);
    if (log.is_open()) log << "step\tloss_d_image\tloss_d_video\tloss_rencg\tloss_merged_gen\n";
    data::train_recall(c, pairs, start.bundle, [&](std::size_t s, const recall::RecallReport& r) {
      if (log.is_open() && (s % every == 0 || s == c.steps)) {
        log << s << '\t' << num_str(r.loss_d_image) << '\t' << num_str(r.loss_d_video) << '\t'
            << num_str(r.loss_rencg) << '\t' << num_str(r.loss_merged_gen) << '\n';
      }
      last = {{"loss_d_image", num_str(r.loss_d_image)},
              {"loss_d_video", num_str(r.loss_d_video)},
              {"loss_rencg", num_str(r.loss_rencg)}};
    });
    last["pairs"] = std::to_string(pairs.pairs.size());
    last["skipped_videos"] = std::to_string(pairs.skipped.size());
  } else {
    if (log.is_open()) log << "step\tloss_d_image\tloss_d_video\tloss_enc\tloss_gen\n";
    data::train_encgan(c, videos, start.bundle, [&](std::size_t s, const encgan::TrainReport& r) {
      if (log.is_open() && (s % every == 0 || s == c.steps)) {
        log << s << '\t' << num_str(r.loss_d_image) << '\t' << num_str(r.loss_d_video) << '\t'
            << num_str(r.loss_enc) << '\t' << num_str(r.loss_gen) << '\n';
      }
      last = {{"loss_d_image", num_str(r.loss_d_image)},
              {"loss_d_video", num_str(r.loss_d_video)},
              {"loss_enc", num_str(r.loss_enc)}};
    });
  }
  start.bundle.steps = std::max<std::uint64_t>(start.bundle.steps, c.steps);
  const std::string out = output_path(a.out);
  data::save_checkpoint(out, c, start.bundle);
  last["checkpoint"] = out;
  last["steps"] = std::to_string(start.bundle.steps);
  print_kv(last);
}

struct GenerateArgs {
  ConfigArgs cfg;
  std::string checkpoint;
  std::size_t count = 1;
  std::string out;
};

void run_generate(const GenerateArgs& a) {
  const data::Checkpoint ck = a.cfg.checkpoint(a.checkpoint);
  const data::RunConfig& c = ck.config;
  require(a.count >= 1, ErrorKind::kInvalidArgument, "--count must be >= 1");
  const num::Stream root = num::Stream(c.seed).split("generate");
  std::vector<data::LabeledVideo> clips;
  for (std::size_t i = 0; i < a.count; ++i) {
    num::Stream s = root.split(static_cast<std::uint64_t>(i));
    encgan::LatentPair z;
    z.content = s.split("x").normal_tensor({c.content_dim}).storage();
    z.motion = s.split("v").normal_tensor({c.motion_dim}).storage();
    clips.push_back({encgan::generate(ck.bundle, z).clip.frames(), -1});
  }
  const std::string dir = output_dir(a.out);
  data::write_dataset(dir, clips, c.dtype);
  print_kv({{"manifest", (fs::path(dir) / "manifest.txt").string()},
            {"clips", std::to_string(a.count)}});
}

struct GenerateLongArgs {
  ConfigArgs cfg;
  std::string checkpoint;
  std::size_t clips = 0;
  std::size_t length = 0;
  std::size_t videos = 1;
  std::string out;
};

void run_generate_long(const GenerateLongArgs& a) {
  const data::Checkpoint ck = a.cfg.checkpoint(a.checkpoint);
  const data::RunConfig& c = ck.config;
  c.validate();
  require((a.clips > 0) != (a.length > 0), ErrorKind::kInvalidArgument,
          "give exactly one of --clips and --length");
  require(a.videos >= 1, ErrorKind::kInvalidArgument, "--videos must be >= 1");
  recall::ChainOptions o = data::chain_options(c, a.clips);
  const std::size_t length =
      a.length > 0 ? a.length : video::stitched_length(a.clips, c.t_c, c.r);
  if (a.length > 0) o.clip_count = data::clips_for_length(a.length, c.t_c, c.r);
  const video::FrameShape shape{c.height, c.width, c.channels};
  const num::Stream root = num::Stream(c.seed).split("generate_long");

  auto write_one = [&](const std::string& path, std::size_t k, recall::ChainResult& r) {
    data::StreamingVideoWriter writer(path, shape, c.dtype);
    data::ContainerSink sink(writer);
    data::LimitSink limited(sink, length);
    r = recall::chain_generate(ck.bundle, o, root.split(static_cast<std::uint64_t>(k)), limited);
    writer.close();
  };

  double mismatch = 0.0;
  std::size_t peak = 0;
  std::string where;
  if (a.videos == 1) {
    where = output_path(a.out);
    recall::ChainResult r;
    write_one(where, 0, r);
    mismatch = r.mean_mismatch;
    peak = r.peak_buffers;
  } else {
    where = output_dir(a.out);
    data::DatasetManifest manifest;
    for (std::size_t k = 0; k < a.videos; ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "long_%05zu.rcg", k);
      recall::ChainResult r;
      write_one((fs::path(where) / name).string(), k, r);
      mismatch += r.mean_mismatch / static_cast<double>(a.videos);
      peak = std::max(peak, r.peak_buffers);
      manifest.records.push_back({name, length, c.height, c.width, c.channels, -1});
    }
    data::write_manifest((fs::path(where) / "manifest.txt").string(), manifest);
  }
  print_kv({{"output", where},
            {"frames", std::to_string(length)},
            {"clips", std::to_string(o.clip_count)},
            {"videos", std::to_string(a.videos)},
            {"mode", recall::chain_mode_name(c.gen_mode)},
            {"peak_buffers", std::to_string(peak)},
            {"mismatch", num_str(mismatch)}});
}

struct EvalArgs {
  ConfigArgs cfg;
  std::string generated;
  std::string reference;
  std::string report;
  std::size_t seg_len = 16;
  std::size_t full_len = 128;
};

void run_eval(const EvalArgs& a) {
  const data::RunConfig c = a.cfg.load();
  const auto gen = data::load_dataset(a.generated);
  const auto ref = data::load_dataset(a.reference);
  require(!gen.empty() && !ref.empty(), ErrorKind::kInvalidArgument, "empty dataset");
  const video::FrameShape shape = ref.front().frames.front().shape();
  for (const auto* set : {&gen, &ref}) {
    for (const auto& v : *set) {
      require(v.frames.front().shape() == shape, ErrorKind::kDimensionMismatch,
              "generated and reference frames differ in shape");
    }
  }
  std::vector<std::vector<video::Frame>> g, r;
  for (const auto& v : gen) g.push_back(v.frames);
  for (const auto& v : ref) r.push_back(v.frames);

  eval::Report report;
  const eval::FeatureExtractor fx(shape, a.seg_len, eval::kFeatureDim, c.seed);
  const eval::SegmentScores seg = eval::segmentwise_scores(g, r, fx);
  eval::add_segment_scores(report, seg);

  // First-segment versus full-length score when both sets are long enough.
  auto long_clips = [&](const std::vector<std::vector<video::Frame>>& set) {
    std::vector<video::VideoClip> out;
    for (const auto& v : set) {
      if (v.size() >= a.full_len) {
        out.emplace_back(std::vector<video::Frame>(v.begin(), v.begin() + static_cast<long>(a.full_len)));
      }
    }
    return out;
  };
  const auto gl = long_clips(g);
  const auto rl = long_clips(r);
  if (a.full_len > a.seg_len && gl.size() == g.size() && rl.size() >= 2) {
    const eval::FeatureExtractor fx_full(shape, a.full_len, eval::kFeatureDim, c.seed);
    const double full =
        eval::frechet_distance(eval::fit_gaussian(fx_full.features(gl)), eval::fit_gaussian(fx_full.features(rl)));
    if (seg.scores.front() > 0.0 && full > 0.0) {
      eval::add_fvd_ratio(report, eval::fvd_ratio(seg.scores.front(), full));
    }
  }

  std::set<int> labels;
  for (const auto& v : ref) labels.insert(v.label);
  if (labels.size() >= 2 && *labels.begin() >= 0) {
    const eval::LabeledClips train = eval::leading_clips(ref, a.seg_len);
    const eval::ProbeClassifier probe =
        eval::train_probe(train.clips, train.labels, num::Stream(c.seed).split("probe"));
    std::vector<video::VideoClip> segs;
    for (const auto& v : g) {
      for (auto& s : video::segment_nonoverlapping(v, a.seg_len)) segs.push_back(std::move(s));
    }
    eval::add_inception_score(report, eval::inception_score(probe.probabilities(segs)));
    report.add("probe_train_accuracy", probe.accuracy(train.clips, train.labels));
  }

  eval::write_text_report(std::cout, report);
  if (!a.report.empty()) eval::write_kv_report_file(output_path(a.report), report);
}

struct RoundtripArgs {
  ConfigArgs cfg;
  std::string data;
};

void run_roundtrip_check(const RoundtripArgs& a) {
  const data::RunConfig c = a.cfg.load();
  const auto videos = data::load_dataset(a.data);
  const std::size_t t = c.t_c;
  struct Check {
    std::string name;
    std::size_t cases = 0;
    std::string failure;
  };
  std::vector<Check> checks;
  for (const char* name : {"container_roundtrip", "decompose_reconstruct", "reconstruct_from_reference",
                           "stitch_segments", "stitch_length"}) {
    checks.push_back({name, 0, {}});
  }
  auto fail_once = [](Check& ch, const std::string& why) {
    if (ch.failure.empty()) ch.failure = why;
  };

  for (std::size_t i = 0; i < videos.size(); ++i) {
    const auto& frames = videos[i].frames;
    const std::string tag = "video " + std::to_string(i);
    {
      std::stringstream buf;
      const std::vector<double> flat = video::flatten(frames);
      const video::FrameShape s = frames.front().shape();
      const std::vector<std::uint64_t> dims{frames.size(), s.height, s.width, s.channels};
      data::write_container(buf, dims, flat, data::Dtype::kF64);
      const data::ContainerData back = data::read_container(buf);
      ++checks[0].cases;
      if (back.dims != dims || back.values != flat) fail_once(checks[0], tag);
    }
    for (const auto& clip : video::segment_nonoverlapping(frames, t)) {
      const video::Decomposition d = video::decompose(clip);
      ++checks[1].cases;
      if (!(video::reconstruct(d.content, d.motion) == clip)) fail_once(checks[1], tag);
      for (std::size_t r = 1; r <= t; ++r) {
        const video::VideoClip back = video::reconstruct_from_reference(clip[r - 1], r, d.motion);
        ++checks[2].cases;
        for (std::size_t k = 0; k < t; ++k) {
          for (std::size_t p = 0; p < clip[k].size(); ++p) {
            if (std::abs(back[k][p] - clip[k][p]) > 1e-12) {
              fail_once(checks[2], tag + " r=" + std::to_string(r));
            }
          }
        }
      }
    }
    if (frames.size() >= t) {
      const auto clips = video::segment_overlapping(frames, t, c.r);
      const video::LongVideo joined = video::stitch(clips, c.r);
      ++checks[3].cases;
      ++checks[4].cases;
      if (joined.frames.size() != video::stitched_length(clips.size(), t, c.r)) {
        fail_once(checks[4], tag);
      }
      if (!std::equal(joined.frames.begin(), joined.frames.end(), frames.begin())) {
        fail_once(checks[3], tag);
      }
    }
  }
  bool ok = true;
  for (const auto& ch : checks) {
    if (ch.failure.empty()) {
      std::cout << "PASS " << ch.name << " cases=" << ch.cases << '\n';
    } else {
      ok = false;
      std::cout << "FAIL " << ch.name << " cases=" << ch.cases << " first=" << quote(ch.failure) << '\n';
    }
  }
  if (!ok) throw CheckFailed{"one or more invariants failed"};
}

struct AblateArgs {
  ConfigArgs cfg;
  std::string data;
  std::size_t videos = 400;
  std::size_t length = 48;
  std::size_t chains = 8;
  std::string mode = "seeded";
  std::string report;
  std::string text;
};

void run_ablate(const AblateArgs& a) {
  data::AblationOptions o;
  o.base = a.cfg.load();
  o.chains = a.chains;
  o.mode = recall::parse_chain_mode(a.mode);
  std::vector<data::LabeledVideo> videos;
  if (!a.data.empty()) {
    videos = data::load_dataset(a.data);
  } else {
    videos = data::shapes_dataset(a.videos, a.length, o.base.seed,
                                  {o.base.height, o.base.width, o.base.channels});
  }
  check_frames(o.base, videos);
  const data::AblationResult result = data::run_ablation(
      o, videos, [](const std::string& s) { std::cerr << s << '\n'; });
  data::write_ablation_text(std::cout, o, result);
  if (!a.text.empty()) {
    std::ofstream out(output_path(a.text));
    require(out.good(), ErrorKind::kIo, "cannot open '" + a.text + "'");
    data::write_ablation_text(out, o, result);
  }
  if (!a.report.empty()) eval::write_kv_report_file(output_path(a.report), data::ablation_report(result));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stream VAE-GAN video generator with recall chaining"};
  app.require_subcommand(1);

  DatasetGenArgs dg;
  auto* cmd_dg = app.add_subcommand("dataset-gen", "Write a synthetic dataset");
  dg.cfg.attach(cmd_dg);
  cmd_dg->add_option("--kind", dg.kind, "shapes or drift");
  cmd_dg->add_option("--count", dg.count, "number of videos")->required();
  cmd_dg->add_option("--length", dg.length, "frames per video")->required();
  cmd_dg->add_option("--seed", dg.seed, "dataset seed (default: config seed)");
  cmd_dg->add_option("--out", dg.out, "output directory")->required();

  TrainArgs tr;
  auto* cmd_tr = app.add_subcommand("train", "Train the short-clip model");
  TrainArgs trr;
  auto* cmd_trr = app.add_subcommand("train-recall", "Train with overlapping pairs and merged clips");
  for (auto [cmd, args] : {std::pair{cmd_tr, &tr}, std::pair{cmd_trr, &trr}}) {
    args->cfg.attach(cmd);
    cmd->add_option("--data", args->data, "dataset manifest")->required();
    cmd->add_option("--out", args->out, "checkpoint to write")->required();
    cmd->add_option("--resume", args->resume, "continue from a checkpoint");
    cmd->add_option("--log", args->log, "tab-separated loss log");
    cmd->add_option("--log-every", args->log_every, "log interval in steps");
  }

  GenerateArgs gn;
  auto* cmd_gn = app.add_subcommand("generate", "Sample short clips from the prior");
  gn.cfg.attach(cmd_gn);
  cmd_gn->add_option("--checkpoint", gn.checkpoint)->required();
  cmd_gn->add_option("--count", gn.count, "number of clips");
  cmd_gn->add_option("--out", gn.out, "output directory")->required();

  GenerateLongArgs gl;
  auto* cmd_gl = app.add_subcommand("generate-long", "Chain clips into long videos");
  gl.cfg.attach(cmd_gl);
  cmd_gl->add_option("--checkpoint", gl.checkpoint)->required();
  cmd_gl->add_option("--clips", gl.clips, "number of chained clips");
  cmd_gl->add_option("--length", gl.length, "output length in frames");
  cmd_gl->add_option("--videos", gl.videos, "number of videos; > 1 writes a dataset directory");
  cmd_gl->add_option("--out", gl.out, "output container (or directory)")->required();

  EvalArgs ev;
  auto* cmd_ev = app.add_subcommand("eval", "Segment-wise proxy scores against a reference set");
  ev.cfg.attach(cmd_ev);
  cmd_ev->add_option("--generated", ev.generated, "generated dataset manifest")->required();
  cmd_ev->add_option("--reference", ev.reference, "reference dataset manifest")->required();
  cmd_ev->add_option("--report", ev.report, "key-value report file");
  cmd_ev->add_option("--seg-len", ev.seg_len, "segment length");
  cmd_ev->add_option("--full-len", ev.full_len, "clip length for the full-length score");

  RoundtripArgs rt;
  auto* cmd_rt = app.add_subcommand("roundtrip-check", "Frame algebra invariants on a dataset");
  rt.cfg.attach(cmd_rt);
  cmd_rt->add_option("--data", rt.data, "dataset manifest")->required();

  AblateArgs ab;
  auto* cmd_ab = app.add_subcommand("ablate", "OVI / MGV / Recall and overlap sweeps");
  ab.cfg.attach(cmd_ab);
  cmd_ab->add_option("--data", ab.data, "dataset manifest (default: generated shapes)");
  cmd_ab->add_option("--videos", ab.videos, "generated dataset size");
  cmd_ab->add_option("--length", ab.length, "generated video length");
  cmd_ab->add_option("--chains", ab.chains, "chains per cell");
  cmd_ab->add_option("--mode", ab.mode, "chain mode: sampled, mean or seeded");
  cmd_ab->add_option("--report", ab.report, "key-value report file");
  cmd_ab->add_option("--text", ab.text, "text table file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(error_kind_name(ErrorKind::kInvalidArgument),
                        exit_code_for(ErrorKind::kInvalidArgument), e.what());
  }

  try {
    if (cmd_dg->parsed()) run_dataset_gen(dg);
    if (cmd_tr->parsed()) run_train(tr, false);
    if (cmd_trr->parsed()) run_train(trr, true);
    if (cmd_gn->parsed()) run_generate(gn);
    if (cmd_gl->parsed()) run_generate_long(gl);
    if (cmd_ev->parsed()) run_eval(ev);
    if (cmd_rt->parsed()) run_roundtrip_check(rt);
    if (cmd_ab->parsed()) run_ablate(ab);
  } catch (const Error& e) {
    return report_error(error_kind_name(e.kind()), exit_code_for(e.kind()), e.what());
  } catch (const CheckFailed& e) {
    return report_error("check", 1, e.message);
  } catch (const fs::filesystem_error& e) {
    return report_error(error_kind_name(ErrorKind::kIo), exit_code_for(ErrorKind::kIo), e.what());
  } catch (const std::exception& e) {
    return report_error("other", 1, e.what());
  }
  return 0;
}
