#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rg/encgan/model.hpp"
#include "rg/numerics/random.hpp"
#include "rg/video/frame.hpp"

namespace rg::encgan {

// ---- Term-level building blocks -------------------------------------------
// Batch expectations are means over rows; squared errors are summed over all
// pixels of all frames of a sample, then averaged over samples.

Var squared_error(Var target, Var recon);
Var disc_prob(Var logits);
// Non-saturating generator term: mean(-log D(fake)).
Var generator_adversarial(Var fake_logits);
// mean(-log D(real)) + sum_k mean(-log(1 - D(fake_k))).
Var discriminator_objective(Var real_logits, std::span<const Var> fake_logits);

// Frame-recursion reconstruction plus both KL terms.
Var encoder_objective(Var real_clips, Var recon_clips, const Posterior& q);
// Difference-map variant: first frame + motion reconstruction plus both KLs.
Var encoder_objective_diff(Var real_first, Var recon_first, Var real_motion, Var recon_motion,
                           const Posterior& q);

// ---- Model-level loss builders ---------------------------------------------
// `clips` is a flattened batch [B, T*P]. The same stream yields the same
// latent samples and frame picks in every builder, so a loss evaluated twice
// with one stream is a deterministic function of the parameters.

struct Reconstruction {
  Posterior posterior;
  GeneratorOutput output;
};

// Encodes the clips with content anchored at frame ref0 and regenerates them
// from reparameterized posterior samples.
Reconstruction reconstruct_batch(const BoundModel& m, Var clips, num::Stream rng,
                                 std::size_t ref0 = 0);
GeneratorOutput generate_from_prior(const BoundModel& m, std::size_t batch, num::Stream rng,
                                    std::size_t ref0 = 0);
// One random frame index per row.
std::vector<std::size_t> pick_frames(std::size_t batch, std::size_t frames, num::Stream rng);

Var build_loss_enc(const BoundModel& m, const Tensor& clips, num::Stream rng);
Var build_loss_enc_v(const BoundModel& m, const Tensor& clips, num::Stream rng);
Var build_loss_gen(const BoundModel& m, const Tensor& clips, num::Stream rng);
Var build_loss_d_image(const BoundModel& m, const Tensor& clips, num::Stream rng);
Var build_loss_d_video(const BoundModel& m, const Tensor& clips, num::Stream rng);

// ---- Evaluation ---------------------------------------------------------------

using LossBuilder = std::function<Var(const BoundModel&)>;

struct LossEval {
  double value = 0.0;
  // Gradients for the tracked groups in BoundModel::leaves() order.
  std::vector<Tensor> grads;
};

LossEval evaluate_loss(const ModelBundle& bundle, unsigned groups, const LossBuilder& build);
double loss_value(const ModelBundle& bundle, const LossBuilder& build);

double loss_enc(const ModelBundle& b, const Tensor& clips, num::Stream rng);
double loss_enc_v(const ModelBundle& b, const Tensor& clips, num::Stream rng);
double loss_gen(const ModelBundle& b, const Tensor& clips, num::Stream rng);
double loss_d_image(const ModelBundle& b, const Tensor& clips, num::Stream rng);
double loss_d_video(const ModelBundle& b, const Tensor& clips, num::Stream rng);

}  // namespace rg::encgan
