#pragma once

#include <vector>

#include "rg/encgan/losses.hpp"
#include "rg/encgan/model.hpp"
#include "rg/video/frame.hpp"

namespace rg::encgan {

struct GaussianValue {
  std::vector<double> mu;
  std::vector<double> log_var;
};

struct EncodedClip {
  GaussianValue content;
  GaussianValue motion;
};

struct LatentPair {
  std::vector<double> content;
  std::vector<double> motion;

  friend bool operator==(const LatentPair&, const LatentPair&) = default;
};

struct GeneratedClip {
  video::Frame content;
  video::DiffSequence motion;
  video::VideoClip clip;
};

// q(z_x | frame 0) and q(z_v | difference maps) of one clip.
EncodedClip encode(const ModelBundle& bundle, const video::VideoClip& clip);
// Deterministic clip synthesis from a latent pair, content anchored at frame 0.
GeneratedClip generate(const ModelBundle& bundle, const LatentPair& z);
// Elementwise sum of content codes and of motion codes.
LatentPair latent_combine(const LatentPair& a, const LatentPair& b);

enum class EncoderLoss { kFrames, kDiffs };

struct TrainOptions {
  EncoderLoss encoder_loss = EncoderLoss::kFrames;
};

struct TrainReport {
  double loss_d_image = 0.0;
  double loss_d_video = 0.0;
  double loss_enc = 0.0;
  double loss_gen = 0.0;
};

// One EncGAN3 iteration: a discriminator update (image + video losses), then
// an encoder update, then a generator update.
TrainReport train_step(ModelBundle& bundle, const Tensor& clips, num::Stream rng,
                       const TrainOptions& options = {});

// Per-pixel mean squared error of clips regenerated from posterior means.
double reconstruction_mse(const ModelBundle& bundle, const Tensor& clips);

}  // namespace rg::encgan
