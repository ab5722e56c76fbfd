#include "rg/data/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "rg/error.hpp"

namespace rg::data {

bool uniform_phase(const RunConfig& config, std::size_t step) {
  switch (config.sampling) {
    case Sampling::kUniform:
      return true;
    case Sampling::kStep:
      return false;
    case Sampling::kSchedule:
      return static_cast<double>(step) <
             std::floor(config.uniform_fraction * static_cast<double>(config.steps));
  }
  return false;
}

video::VideoClip sample_training_clip(const RunConfig& config, std::span<const video::Frame> video,
                                      std::size_t step, num::Stream rng) {
  const std::size_t t = config.t_c;
  require(video.size() >= t, ErrorKind::kInvalidArgument,
          "training video of " + std::to_string(video.size()) + " frames is shorter than t_c=" +
              std::to_string(t));
  if (uniform_phase(config, step)) return uniform_sample(video, t, rng);
  std::size_t stride = config.sample_step;
  while (stride > 1 && stride * (t - 1) >= video.size()) --stride;
  const std::size_t span = stride * (t - 1) + 1;
  const std::size_t start = static_cast<std::size_t>(rng.below(video.size() - span + 1));
  return step_sample(video, start, stride, t);
}

num::Tensor sample_clip_batch(const RunConfig& config, std::span<const LabeledVideo> videos,
                              std::size_t step, num::Stream rng) {
  require(!videos.empty(), ErrorKind::kInvalidArgument, "empty training set");
  std::vector<video::VideoClip> clips;
  clips.reserve(config.batch);
  for (std::size_t b = 0; b < config.batch; ++b) {
    num::Stream s = rng.split(static_cast<std::uint64_t>(b));
    const auto v = static_cast<std::size_t>(s.split("video").below(videos.size()));
    clips.push_back(sample_training_clip(config, videos[v].frames, step, s.split("clip")));
  }
  return encgan::clips_to_tensor(clips);
}

num::Tensor fixed_eval_batch(const RunConfig& config, std::span<const LabeledVideo> videos,
                             std::size_t count) {
  require(count >= 1 && count <= videos.size(), ErrorKind::kInvalidArgument,
          "evaluation batch size out of range");
  std::vector<video::VideoClip> clips;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& frames = videos[i].frames;
    std::size_t stride = config.sample_step;
    while (stride > 1 && stride * (config.t_c - 1) >= frames.size()) --stride;
    clips.push_back(step_sample(frames, 0, stride, config.t_c));
  }
  return encgan::clips_to_tensor(clips);
}

void train_encgan(const RunConfig& config, std::span<const LabeledVideo> videos,
                  encgan::ModelBundle& bundle, const EncGanCallback& callback) {
  const num::Stream root = num::Stream(config.seed).split("train");
  const encgan::TrainOptions options{config.loss_variant};
  for (std::size_t s = bundle.steps; s < config.steps; ++s) {
    const num::Tensor batch =
        sample_clip_batch(config, videos, s, root.split("batch").split(static_cast<std::uint64_t>(s)));
    const encgan::TrainReport report = encgan::train_step(
        bundle, batch, root.split("step").split(static_cast<std::uint64_t>(s)), options);
    if (callback) callback(s + 1, report);
  }
}

std::size_t pair_stride(const RunConfig& config) { return config.ovi ? config.r : config.t_c; }

recall::PairSet recall_pairs(const RunConfig& config, std::span<const LabeledVideo> videos) {
  std::vector<std::vector<video::Frame>> frames;
  frames.reserve(videos.size());
  for (const LabeledVideo& v : videos) frames.push_back(v.frames);
  return recall::make_training_pairs(frames, config.t_c, pair_stride(config));
}

void train_recall(const RunConfig& config, const recall::PairSet& pairs,
                  encgan::ModelBundle& bundle, const RecallCallback& callback) {
  require(!pairs.pairs.empty(), ErrorKind::kInvalidArgument,
          "no training pairs: every video is shorter than t_c + stride");
  const num::Stream root = num::Stream(config.seed).split("train_recall");
  const recall::RecallOptions options{config.r, config.mgv};
  std::vector<recall::ClipPair> picked(config.batch);
  for (std::size_t s = bundle.steps; s < config.steps; ++s) {
    num::Stream pick = root.split("batch").split(static_cast<std::uint64_t>(s));
    for (auto& p : picked) p = pairs.pairs[static_cast<std::size_t>(pick.below(pairs.pairs.size()))];
    const recall::PairBatch batch = recall::pairs_to_batch(picked);
    const recall::RecallReport report = recall::train_step_recall(
        bundle, batch, root.split("step").split(static_cast<std::uint64_t>(s)), options);
    if (callback) callback(s + 1, report);
  }
}

recall::ChainOptions chain_options(const RunConfig& config, std::size_t clip_count) {
  recall::ChainOptions o;
  o.clip_count = clip_count;
  o.stride = config.r;
  o.mode = config.gen_mode;
  return o;
}

std::size_t clips_for_length(std::size_t length, std::size_t clip_length, std::size_t stride) {
  require(stride >= 1, ErrorKind::kInvalidArgument, "stride must be >= 1");
  if (length <= clip_length) return 1;
  return (length - clip_length + stride - 1) / stride + 1;
}

void LimitSink::push(const video::Frame& frame) {
  if (forwarded_ >= limit_) return;
  inner_.push(frame);
  ++forwarded_;
}

std::vector<video::Frame> generate_long(const encgan::ModelBundle& bundle,
                                        const recall::ChainOptions& options, std::size_t length,
                                        num::Stream rng, recall::ChainResult* result,
                                        std::size_t min_clips) {
  require(length >= 1, ErrorKind::kInvalidArgument, "video length must be positive");
  recall::ChainOptions o = options;
  o.clip_count =
      std::max(min_clips, clips_for_length(length, bundle.config.clip_length, options.stride));
  recall::VectorSink frames;
  LimitSink sink(frames, length);
  const recall::ChainResult r = recall::chain_generate(bundle, o, rng, sink);
  if (result != nullptr) *result = r;
  return std::move(frames.frames);
}

}  // namespace rg::data
