#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rg/numerics/gaussian.hpp"
#include "rg/numerics/mlp.hpp"
#include "rg/numerics/params.hpp"
#include "rg/video/frame.hpp"

namespace rg::encgan {

using num::Scalar;
using num::Tensor;
using num::Var;

inline constexpr Scalar kLogitBound = 15.0;
// Initial encoder log-variance output.
inline constexpr Scalar kInitLogVar = -4.0;
// Fusion residuals are bounded to +-kFusionRange per pixel.
inline constexpr Scalar kFusionRange = 0.25;

struct ModelConfig {
  std::size_t clip_length = 16;
  video::FrameShape frame{16, 16, 1};
  std::size_t content_dim = 64;
  std::size_t motion_dim = 10;
  std::size_t hidden = 64;
  // Ablation switches; a disabled stream emits zeros.
  bool content_stream = true;
  bool motion_stream = true;
  bool fusion = true;
  num::AdamConfig adam;

  std::size_t pixels() const { return frame.pixels(); }
  std::size_t clip_width() const { return clip_length * pixels(); }
  std::size_t motion_width() const { return (clip_length - 1) * pixels(); }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Parameters of the two encoders, the three-stream generator and the two
// discriminators, plus one Adam state per update group.
struct ModelBundle {
  ModelConfig config;
  num::Mlp content_encoder;
  num::Mlp motion_encoder;
  num::Mlp gen_content;
  num::Mlp gen_motion;
  num::Mlp gen_fusion;
  num::Mlp disc_image;
  num::Mlp disc_video;
  num::AdamState opt_disc;
  num::AdamState opt_enc;
  num::AdamState opt_gen;
  std::uint64_t steps = 0;

  std::vector<num::Mlp*> encoders() { return {&content_encoder, &motion_encoder}; }
  std::vector<num::Mlp*> generator() { return {&gen_content, &gen_motion, &gen_fusion}; }
  std::vector<num::Mlp*> discriminators() { return {&disc_image, &disc_video}; }
  // Every network, in the fixed order used for checkpoints.
  std::vector<num::Mlp*> all_networks();
  std::vector<const num::Mlp*> all_networks() const;
};

ModelBundle make_bundle(const ModelConfig& config, std::uint64_t seed);

// Parameter groups that receive gradients.
enum Group : unsigned {
  kEncoders = 1u,
  kGenerator = 2u,
  kDiscriminators = 4u,
  kAllGroups = 7u,
};

// The bundle's parameters registered on one tape; groups in the mask are
// tracked leaves, the rest constants.
struct BoundModel {
  num::Tape* tape = nullptr;
  const ModelBundle* bundle = nullptr;
  std::vector<Var> content_encoder;
  std::vector<Var> motion_encoder;
  std::vector<Var> gen_content;
  std::vector<Var> gen_motion;
  std::vector<Var> gen_fusion;
  std::vector<Var> disc_image;
  std::vector<Var> disc_video;

  // Tracked leaves in group order (encoders, generator, discriminators).
  std::vector<Var> leaves(unsigned groups) const;
};

BoundModel bind(num::Tape& tape, const ModelBundle& bundle, unsigned trainable);
std::vector<Tensor*> group_params(ModelBundle& bundle, unsigned groups);

struct Posterior {
  num::GaussianParams content;
  num::GaussianParams motion;
};

struct GeneratorOutput {
  Var content;   // [B, P] content stream output
  Var motion;    // [B, (T-1)P] motion stream output
  Var raw_clip;  // [B, T*P] recursion + fusion residuals, unclamped
  Var clip;      // raw_clip clamped to [-1, 1]
};

// Encodes a content frame [B,P] and difference maps [B,(T-1)P].
Posterior encode(const BoundModel& m, Var content_frame, Var motion);

// ref0 is the 0-based frame index the content frame is anchored at.
GeneratorOutput generate(const BoundModel& m, Var z_content, Var z_motion, std::size_t ref0);

// Discriminator logits, clamped to [-kLogitBound, kLogitBound].
Var image_logits(const BoundModel& m, Var frames);
Var video_logits(const BoundModel& m, Var clips);

// Frame differences of flattened clips [B,T*P] -> [B,(T-1)P].
Var clip_motion(Var clips, std::size_t pixels, std::size_t frames);
Var clip_frame(Var clips, std::size_t pixels, std::size_t index);

// Flattened clip batches.
Tensor clips_to_tensor(std::span<const video::VideoClip> clips);
video::VideoClip clip_from_row(const Tensor& t, std::size_t row, const ModelConfig& config);

}  // namespace rg::encgan
