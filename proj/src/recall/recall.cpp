#include "rg/recall/recall.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "rg/error.hpp"
#include "rg/numerics/ops.hpp"

namespace rg::recall {

using namespace rg::num;
using encgan::GeneratorOutput;
using encgan::Posterior;
using encgan::Reconstruction;

namespace {

void check_batch(const BoundModel& m, const PairBatch& batch) {
  const std::size_t width = m.bundle->config.clip_width();
  require(batch.first.numel() > 0 && batch.first.rows() > 0, ErrorKind::kInvalidArgument,
          "empty pair batch");
  require(batch.first.shape() == batch.second.shape(), ErrorKind::kDimensionMismatch,
          "pair batch halves differ in shape");
  require(batch.first.cols() == width, ErrorKind::kDimensionMismatch,
          "pair batch width " + std::to_string(batch.first.cols()) + " does not match T*P = " +
              std::to_string(width));
}

void check_stride(std::size_t stride, std::size_t clip_length) {
  require(stride >= 1 && stride <= clip_length, ErrorKind::kInvalidArgument,
          "stride " + std::to_string(stride) + " outside 1.." + std::to_string(clip_length));
}

// Both clips of every pair stacked as one batch of independent samples.
Var both_clips(const BoundModel& m, const PairBatch& batch) {
  const std::array<Var, 2> parts{m.tape->constant(batch.first), m.tape->constant(batch.second)};
  return concat_rows(parts);
}

std::size_t chain_content_index(std::size_t ref0, std::size_t stride, std::size_t clip_length) {
  return std::min(ref0 + stride, clip_length - 1);
}

}  // namespace

PairSet make_training_pairs(std::span<const std::vector<video::Frame>> videos,
                            std::size_t clip_length, std::size_t stride) {
  require(clip_length >= 2, ErrorKind::kInvalidArgument, "clip length must be >= 2");
  check_stride(stride, clip_length);
  PairSet out;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const auto& frames = videos[v];
    if (frames.size() < clip_length + stride) {
      out.skipped.push_back(v);
      continue;
    }
    video::check_homogeneous(frames, "make_training_pairs");
    for (std::size_t off = 0; off + stride + clip_length <= frames.size(); off += stride) {
      auto clip_at = [&](std::size_t start) {
        return video::VideoClip(std::vector<video::Frame>(
            frames.begin() + static_cast<std::ptrdiff_t>(start),
            frames.begin() + static_cast<std::ptrdiff_t>(start + clip_length)));
      };
      ClipPair p{clip_at(off), clip_at(off + stride), v, off};
      for (std::size_t i = 0; i + stride < clip_length; ++i) {
        require(p.first[stride + i] == p.second[i], ErrorKind::kNumeric,
                "make_training_pairs: overlap region differs");
      }
      out.pairs.push_back(std::move(p));
    }
  }
  return out;
}

PairBatch pairs_to_batch(std::span<const ClipPair> pairs) {
  require(!pairs.empty(), ErrorKind::kInvalidArgument, "empty pair list");
  std::vector<video::VideoClip> a;
  std::vector<video::VideoClip> b;
  a.reserve(pairs.size());
  b.reserve(pairs.size());
  for (const ClipPair& p : pairs) {
    a.push_back(p.first);
    b.push_back(p.second);
  }
  return {encgan::clips_to_tensor(a), encgan::clips_to_tensor(b)};
}

std::size_t reference_index(std::size_t clip_length) {
  require(clip_length >= 2, ErrorKind::kInvalidArgument, "clip length must be >= 2");
  return clip_length / 2 - 1;
}

Var build_loss_rencg(const BoundModel& m, const PairBatch& batch, Stream rng) {
  check_batch(m, batch);
  const encgan::ModelConfig& c = m.bundle->config;
  const std::size_t px = c.pixels();
  const std::size_t ref0 = reference_index(c.clip_length);
  Var real = both_clips(m, batch);
  Reconstruction r = encgan::reconstruct_batch(m, real, rng, ref0);
  const auto idx = encgan::pick_frames(real.rows(), c.clip_length, rng.split("frame_idx"));

  Var loss = encgan::squared_error(encgan::clip_frame(real, px, ref0),
                                   encgan::clip_frame(r.output.raw_clip, px, ref0));
  loss = add(loss, encgan::squared_error(real, r.output.raw_clip));
  loss = add(loss, add(gaussian_kl(r.posterior.content), gaussian_kl(r.posterior.motion)));
  loss = add(loss, encgan::generator_adversarial(encgan::video_logits(m, r.output.clip)));
  loss = add(loss, encgan::generator_adversarial(
                       encgan::image_logits(m, select_blocks(r.output.clip, px, idx))));
  return loss;
}

Var build_loss_d_image_r(const BoundModel& m, const PairBatch& batch, Stream rng) {
  check_batch(m, batch);
  const encgan::ModelConfig& c = m.bundle->config;
  const std::size_t px = c.pixels();
  Var real = both_clips(m, batch);
  Reconstruction r =
      encgan::reconstruct_batch(m, real, rng, reference_index(c.clip_length));
  const auto idx = encgan::pick_frames(real.rows(), c.clip_length, rng.split("frame_idx"));
  const std::array<Var, 1> fakes{encgan::image_logits(m, select_blocks(r.output.clip, px, idx))};
  return encgan::discriminator_objective(encgan::image_logits(m, select_blocks(real, px, idx)),
                                         fakes);
}

Var build_loss_d_video_r1(const BoundModel& m, const PairBatch& batch, Stream rng) {
  check_batch(m, batch);
  const encgan::ModelConfig& c = m.bundle->config;
  Var real = both_clips(m, batch);
  Reconstruction r =
      encgan::reconstruct_batch(m, real, rng, reference_index(c.clip_length));
  const std::array<Var, 1> fakes{encgan::video_logits(m, r.output.clip)};
  return encgan::discriminator_objective(encgan::video_logits(m, real), fakes);
}

MergedFakes merged_fakes(const BoundModel& m, Var real_first, std::size_t stride, Stream rng) {
  const encgan::ModelConfig& c = m.bundle->config;
  const std::size_t t = c.clip_length;
  const std::size_t px = c.pixels();
  check_stride(stride, t);
  const std::size_t ref0 = reference_index(t);

  Reconstruction first = encgan::reconstruct_batch(m, real_first, rng.split("first"), ref0);
  Var g1 = first.output.clip;
  Posterior q = encgan::encode(m, encgan::clip_frame(g1, px, chain_content_index(ref0, stride, t)),
                               encgan::clip_motion(g1, px, t));
  Stream zx = rng.split("chain_x");
  Stream zv = rng.split("chain_v");
  Var z_content = reparameterize(q.content, zx);
  Var z_motion = reparameterize(q.motion, zv);
  Var g2 = encgan::generate(m, z_content, z_motion, ref0).clip;

  Var window = g1;
  if (stride < t) {
    const std::array<Var, 2> parts{slice_cols(g1, 0, stride * px),
                                   slice_cols(g2, 0, (t - stride) * px)};
    window = concat_cols(parts);
  }
  return {encgan::video_logits(m, window), encgan::video_logits(m, g2)};
}

Var build_loss_d_video_merged(const BoundModel& m, const PairBatch& batch, std::size_t stride,
                              Stream rng) {
  check_batch(m, batch);
  Var real = m.tape->constant(batch.first);
  MergedFakes f = merged_fakes(m, real, stride, rng.split("merged"));
  const std::array<Var, 2> fakes{f.window, f.second};
  return encgan::discriminator_objective(encgan::video_logits(m, real), fakes);
}

Var build_loss_merged_gen(const BoundModel& m, const PairBatch& batch, std::size_t stride,
                          Stream rng) {
  check_batch(m, batch);
  MergedFakes f = merged_fakes(m, m.tape->constant(batch.first), stride, rng.split("merged"));
  return add(encgan::generator_adversarial(f.window), encgan::generator_adversarial(f.second));
}

double loss_rencg(const ModelBundle& b, const PairBatch& batch, Stream rng) {
  return encgan::loss_value(b, [&](const BoundModel& m) { return build_loss_rencg(m, batch, rng); });
}

double loss_d_image_r(const ModelBundle& b, const PairBatch& batch, Stream rng) {
  return encgan::loss_value(b,
                            [&](const BoundModel& m) { return build_loss_d_image_r(m, batch, rng); });
}

double loss_d_video_r1(const ModelBundle& b, const PairBatch& batch, Stream rng) {
  return encgan::loss_value(
      b, [&](const BoundModel& m) { return build_loss_d_video_r1(m, batch, rng); });
}

double loss_d_video_merged(const ModelBundle& b, const PairBatch& batch, std::size_t stride,
                           Stream rng) {
  return encgan::loss_value(b, [&](const BoundModel& m) {
    return build_loss_d_video_merged(m, batch, stride, rng);
  });
}

RecallReport train_step_recall(ModelBundle& bundle, const PairBatch& batch, Stream rng,
                               const RecallOptions& options) {
  check_stride(options.stride, bundle.config.clip_length);
  RecallReport report;
  {
    Stream s = rng.split("disc");
    Tape tape;
    BoundModel m = encgan::bind(tape, bundle, encgan::kDiscriminators);
    Var li = build_loss_d_image_r(m, batch, s);
    Var lv = options.merged ? build_loss_d_video_merged(m, batch, options.stride, s)
                            : build_loss_d_video_r1(m, batch, s);
    report.loss_d_image = li.value().item();
    report.loss_d_video = lv.value().item();
    const auto grads = tape.backward(add(li, lv), m.leaves(encgan::kDiscriminators));
    adam_step(bundle.opt_disc, encgan::group_params(bundle, encgan::kDiscriminators), grads);
  }
  {
    const unsigned joint = encgan::kEncoders | encgan::kGenerator;
    Stream s = rng.split("joint");
    Tape tape;
    BoundModel m = encgan::bind(tape, bundle, joint);
    Var loss = build_loss_rencg(m, batch, s);
    report.loss_rencg = loss.value().item();
    if (options.merged) {
      Var lg = build_loss_merged_gen(m, batch, options.stride, s);
      report.loss_merged_gen = lg.value().item();
      loss = add(loss, lg);
    }
    auto grads = tape.backward(loss, m.leaves(joint));
    std::vector<Tensor*> enc = encgan::group_params(bundle, encgan::kEncoders);
    std::vector<Tensor*> gen = encgan::group_params(bundle, encgan::kGenerator);
    const std::span<const Tensor> all(grads);
    adam_step(bundle.opt_enc, enc, all.subspan(0, enc.size()));
    adam_step(bundle.opt_gen, gen, all.subspan(enc.size()));
  }
  bundle.steps += 1;
  return report;
}

ChainMode parse_chain_mode(const std::string& name) {
  if (name == "sampled") return ChainMode::kSampled;
  if (name == "mean") return ChainMode::kMean;
  if (name == "seeded") return ChainMode::kSeeded;
  fail(ErrorKind::kInvalidArgument, "unknown generation mode '" + name + "'");
}

const char* chain_mode_name(ChainMode mode) {
  switch (mode) {
    case ChainMode::kSampled:
      return "sampled";
    case ChainMode::kMean:
      return "mean";
    case ChainMode::kSeeded:
      return "seeded";
  }
  return "unknown";
}

void FrameBudget::acquire(std::size_t n) {
  live_ += n;
  peak_ = std::max(peak_, live_);
}

void FrameBudget::release(std::size_t n) { live_ -= std::min(n, live_); }

TrackedFrames::TrackedFrames(std::vector<video::Frame> frames, FrameBudget* budget)
    : frames_(std::move(frames)), budget_(budget) {
  if (budget_ != nullptr) budget_->acquire(frames_.size());
}

TrackedFrames::TrackedFrames(TrackedFrames&& other) noexcept
    : frames_(std::move(other.frames_)), budget_(other.budget_) {
  other.frames_.clear();
  other.budget_ = nullptr;
}

TrackedFrames& TrackedFrames::operator=(TrackedFrames&& other) noexcept {
  if (this != &other) {
    reset();
    frames_ = std::move(other.frames_);
    budget_ = other.budget_;
    other.frames_.clear();
    other.budget_ = nullptr;
  }
  return *this;
}

TrackedFrames::~TrackedFrames() { reset(); }

void TrackedFrames::reset() {
  if (budget_ != nullptr) budget_->release(frames_.size());
  frames_.clear();
  budget_ = nullptr;
}

ChainResult chain_generate(const ModelBundle& bundle, const ChainOptions& options, Stream rng,
                           FrameSink& sink) {
  const encgan::ModelConfig& c = bundle.config;
  const std::size_t t = c.clip_length;
  const std::size_t px = c.pixels();
  require(options.clip_count >= 1, ErrorKind::kInvalidArgument, "clip count must be >= 1");
  check_stride(options.stride, t);
  const std::size_t stride = options.stride;
  const std::size_t ref0 = options.ref0.value_or(reference_index(t));
  require(ref0 < t, ErrorKind::kInvalidArgument, "content anchor outside the clip");

  FrameBudget budget;
  ChainState state;
  ChainResult result;
  double mismatch_sum = 0.0;

  for (std::size_t j = 0; j < options.clip_count; ++j) {
    Stream s = rng.split(static_cast<std::uint64_t>(j));
    Tensor zx({1, c.content_dim});
    Tensor zv({1, c.motion_dim});
    if (j == 0) {
      if (options.mode != ChainMode::kMean) {
        zx = s.split("prior_x").normal_tensor({1, c.content_dim});
        zv = s.split("prior_v").normal_tensor({1, c.motion_dim});
      }
    } else {
      zx = Tensor({1, c.content_dim}, state.next_content);
      zv = options.mode == ChainMode::kSampled
               ? s.split("prior_v").normal_tensor({1, c.motion_dim})
               : Tensor({1, c.motion_dim}, state.next_motion);
    }

    TrackedFrames current;
    {
      Tape tape;
      BoundModel m = encgan::bind(tape, bundle, 0);
      GeneratorOutput out =
          encgan::generate(m, tape.constant(std::move(zx)), tape.constant(std::move(zv)), ref0);
      current = TrackedFrames(video::unflatten(out.clip.value().data(), c.frame, t), &budget);
    }
    if (options.on_clip) options.on_clip(j, video::VideoClip(current.frames()));

    if (!state.tail.empty()) {
      double total = 0.0;
      const auto& tail = state.tail.frames();
      for (std::size_t i = 0; i < tail.size(); ++i) {
        for (std::size_t p = 0; p < px; ++p) total += std::abs(tail[i][p] - current.frames()[i][p]);
      }
      mismatch_sum += total / static_cast<double>(tail.size() * px);
      result.seams += 1;
    }

    const bool last = j + 1 == options.clip_count;
    const std::size_t emit = last ? t : stride;
    for (std::size_t i = 0; i < emit; ++i) sink.push(current.frames()[i]);
    result.frames_emitted += emit;

    if (!last) {
      Tape tape;
      BoundModel m = encgan::bind(tape, bundle, 0);
      Var x = tape.constant(Tensor({1, t * px}, video::flatten(current.frames())));
      Posterior q = encgan::encode(
          m, encgan::clip_frame(x, px, chain_content_index(ref0, stride, t)),
          encgan::clip_motion(x, px, t));
      if (options.mode == ChainMode::kSampled) {
        Stream zs = s.split("posterior_x");
        state.next_content = reparameterize(q.content, zs).value().storage();
      } else {
        state.next_content = q.content.mu.value().storage();
        state.next_motion = q.motion.mu.value().storage();
      }
      state.tail = TrackedFrames();
      state.tail = TrackedFrames(
          std::vector<video::Frame>(current.frames().begin() + static_cast<std::ptrdiff_t>(stride),
                                    current.frames().end()),
          &budget);
    }
    state.clip = j + 1;
  }

  result.clip_count = options.clip_count;
  result.peak_buffers = budget.peak();
  result.mean_mismatch = result.seams > 0 ? mismatch_sum / static_cast<double>(result.seams) : 0.0;
  return result;
}

video::LongVideo chain_generate_video(const ModelBundle& bundle, const ChainOptions& options,
                                      Stream rng, ChainResult* result) {
  VectorSink sink;
  ChainResult r = chain_generate(bundle, options, rng, sink);
  if (result != nullptr) *result = r;
  return {std::move(sink.frames), options.clip_count, options.stride, bundle.config.clip_length};
}

}  // namespace rg::recall
