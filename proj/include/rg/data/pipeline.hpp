#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rg/data/config.hpp"
#include "rg/data/datasets.hpp"
#include "rg/encgan/encgan3.hpp"
#include "rg/recall/recall.hpp"

// Training loops over in-memory datasets, shared by the CLI, the bindings and
// the acceptance runs.
namespace rg::data {

// True while `step` falls in the uniform-sampling phase of the schedule.
bool uniform_phase(const RunConfig& config, std::size_t step);

// One t_c-frame training clip from `video` according to the sampling
// strategy. Step sampling shrinks the stride when the video is too short.
video::VideoClip sample_training_clip(const RunConfig& config, std::span<const video::Frame> video,
                                      std::size_t step, num::Stream rng);

num::Tensor sample_clip_batch(const RunConfig& config, std::span<const LabeledVideo> videos,
                              std::size_t step, num::Stream rng);

// Step-sampled clips starting at frame 0 of the first `count` videos.
num::Tensor fixed_eval_batch(const RunConfig& config, std::span<const LabeledVideo> videos,
                             std::size_t count);

using EncGanCallback = std::function<void(std::size_t, const encgan::TrainReport&)>;
using RecallCallback = std::function<void(std::size_t, const recall::RecallReport&)>;

// Continues from bundle.steps up to config.steps.
void train_encgan(const RunConfig& config, std::span<const LabeledVideo> videos,
                  encgan::ModelBundle& bundle, const EncGanCallback& callback = {});

// Pair stride: r with overlapping inputs, t_c otherwise.
std::size_t pair_stride(const RunConfig& config);
recall::PairSet recall_pairs(const RunConfig& config, std::span<const LabeledVideo> videos);

void train_recall(const RunConfig& config, const recall::PairSet& pairs,
                  encgan::ModelBundle& bundle, const RecallCallback& callback = {});

recall::ChainOptions chain_options(const RunConfig& config, std::size_t clip_count);

// Smallest clip count whose chain covers `length` frames.
std::size_t clips_for_length(std::size_t length, std::size_t clip_length, std::size_t stride);

// Forwards the first `limit` frames to `inner` and drops the rest.
class LimitSink : public recall::FrameSink {
 public:
  LimitSink(recall::FrameSink& inner, std::size_t limit) : inner_(inner), limit_(limit) {}
  void push(const video::Frame& frame) override;
  std::size_t forwarded() const { return forwarded_; }

 private:
  recall::FrameSink& inner_;
  std::size_t limit_;
  std::size_t forwarded_ = 0;
};

// Chains enough clips for `length` frames (at least `min_clips`) and keeps
// the first `length`.
std::vector<video::Frame> generate_long(const encgan::ModelBundle& bundle,
                                        const recall::ChainOptions& options, std::size_t length,
                                        num::Stream rng, recall::ChainResult* result = nullptr,
                                        std::size_t min_clips = 1);

}  // namespace rg::data
