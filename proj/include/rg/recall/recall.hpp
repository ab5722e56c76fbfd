#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rg/encgan/losses.hpp"
#include "rg/encgan/model.hpp"
#include "rg/numerics/random.hpp"
#include "rg/video/frame.hpp"

namespace rg::recall {

using encgan::BoundModel;
using encgan::ModelBundle;
using num::Tensor;
using num::Var;

// Two consecutive clips of one source video, `stride` frames apart.
struct ClipPair {
  video::VideoClip first;
  video::VideoClip second;
  std::size_t source = 0;
  std::size_t offset = 0;
};

struct PairSet {
  std::vector<ClipPair> pairs;
  // Indices of source videos shorter than T_c + stride.
  std::vector<std::size_t> skipped;
};

// Pairs (k*stride, (k+1)*stride) for every k whose second clip fits. A stride
// equal to T_c yields adjacent non-overlapping clips.
PairSet make_training_pairs(std::span<const std::vector<video::Frame>> videos,
                            std::size_t clip_length, std::size_t stride);

// Flattened batches of the pairs' first and second clips.
struct PairBatch {
  Tensor first;
  Tensor second;
};
PairBatch pairs_to_batch(std::span<const ClipPair> pairs);

// 0-based index of the mid-clip reference frame x_{T_c/2}.
std::size_t reference_index(std::size_t clip_length);

// ---- Losses ------------------------------------------------------------------
// All builders treat the first and second clip of each pair as independent
// samples except the merged-clip loss, which chains generations at `stride`.

Var build_loss_rencg(const BoundModel& m, const PairBatch& batch, num::Stream rng);
Var build_loss_d_image_r(const BoundModel& m, const PairBatch& batch, num::Stream rng);
Var build_loss_d_video_r1(const BoundModel& m, const PairBatch& batch, num::Stream rng);
Var build_loss_d_video_merged(const BoundModel& m, const PairBatch& batch, std::size_t stride,
                              num::Stream rng);
// Generator side of the merged-clip game: -log D_V on both merged fakes.
Var build_loss_merged_gen(const BoundModel& m, const PairBatch& batch, std::size_t stride,
                          num::Stream rng);

// Logits of the merged-clip fakes: the window straddling the seam of the
// chained pair, and the chained second clip.
struct MergedFakes {
  Var window;
  Var second;
};
MergedFakes merged_fakes(const BoundModel& m, Var real_first, std::size_t stride, num::Stream rng);

double loss_rencg(const ModelBundle& b, const PairBatch& batch, num::Stream rng);
double loss_d_image_r(const ModelBundle& b, const PairBatch& batch, num::Stream rng);
double loss_d_video_r1(const ModelBundle& b, const PairBatch& batch, num::Stream rng);
double loss_d_video_merged(const ModelBundle& b, const PairBatch& batch, std::size_t stride,
                           num::Stream rng);

struct RecallOptions {
  std::size_t stride = 8;
  // Merged-clip video discriminator; off falls back to the two-term loss.
  bool merged = true;
};

struct RecallReport {
  double loss_d_image = 0.0;
  double loss_d_video = 0.0;
  double loss_rencg = 0.0;
  double loss_merged_gen = 0.0;
};

// Discriminators first, then one joint encoder+generator update.
RecallReport train_step_recall(ModelBundle& bundle, const PairBatch& batch, num::Stream rng,
                               const RecallOptions& options);

// ---- Chained generation ---------------------------------------------------------

enum class ChainMode { kSampled, kMean, kSeeded };

ChainMode parse_chain_mode(const std::string& name);
const char* chain_mode_name(ChainMode mode);

class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void push(const video::Frame& frame) = 0;
};

class VectorSink : public FrameSink {
 public:
  void push(const video::Frame& frame) override { frames.push_back(frame); }
  std::vector<video::Frame> frames;
};

// Live and peak counts of frame buffers held by a chain.
class FrameBudget {
 public:
  void acquire(std::size_t n);
  void release(std::size_t n);
  std::size_t live() const { return live_; }
  std::size_t peak() const { return peak_; }

 private:
  std::size_t live_ = 0;
  std::size_t peak_ = 0;
};

// Frames whose count is charged to a budget for as long as they are held.
class TrackedFrames {
 public:
  TrackedFrames() = default;
  TrackedFrames(std::vector<video::Frame> frames, FrameBudget* budget);
  TrackedFrames(const TrackedFrames&) = delete;
  TrackedFrames& operator=(const TrackedFrames&) = delete;
  TrackedFrames(TrackedFrames&& other) noexcept;
  TrackedFrames& operator=(TrackedFrames&& other) noexcept;
  ~TrackedFrames();

  const std::vector<video::Frame>& frames() const { return frames_; }
  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }

 private:
  void reset();

  std::vector<video::Frame> frames_;
  FrameBudget* budget_ = nullptr;
};

// Carried between clips: the overlap tail of the last clip and the latents of
// the next one.
struct ChainState {
  TrackedFrames tail;
  std::vector<double> next_content;
  std::vector<double> next_motion;
  std::size_t clip = 0;
};

struct ChainOptions {
  std::size_t clip_count = 1;
  std::size_t stride = 8;
  ChainMode mode = ChainMode::kMean;
  // Content anchor; defaults to the mid-clip reference frame.
  std::optional<std::size_t> ref0;
  // Called with every generated clip before its frames are emitted.
  std::function<void(std::size_t, const video::VideoClip&)> on_clip;
};

struct ChainResult {
  std::size_t frames_emitted = 0;
  std::size_t clip_count = 0;
  std::size_t peak_buffers = 0;
  std::size_t seams = 0;
  // Mean over seams of the overlap mismatch; zero when nothing overlaps.
  double mean_mismatch = 0.0;
};

ChainResult chain_generate(const ModelBundle& bundle, const ChainOptions& options, num::Stream rng,
                           FrameSink& sink);

// Convenience wrapper collecting the frames.
video::LongVideo chain_generate_video(const ModelBundle& bundle, const ChainOptions& options,
                                      num::Stream rng, ChainResult* result = nullptr);

}  // namespace rg::recall
