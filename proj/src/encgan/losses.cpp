#include "rg/encgan/losses.hpp"

#include <array>

#include "rg/error.hpp"
#include "rg/numerics/ops.hpp"

namespace rg::encgan {

using namespace rg::num;

namespace {

void check_batch(const BoundModel& m, const Tensor& clips) {
  require(clips.numel() > 0 && clips.rows() > 0, ErrorKind::kInvalidArgument, "empty batch");
  require(clips.cols() == m.bundle->config.clip_width(), ErrorKind::kDimensionMismatch,
          "batch width " + std::to_string(clips.cols()) + " does not match T*P = " +
              std::to_string(m.bundle->config.clip_width()));
}

}  // namespace

Var squared_error(Var target, Var recon) {
  return scale(sum(square(sub(target, recon))), 1.0 / static_cast<Scalar>(target.rows()));
}

Var disc_prob(Var logits) { return sigmoid(clamp(logits, -kLogitBound, kLogitBound)); }

Var generator_adversarial(Var fake_logits) { return neg(mean(log(disc_prob(fake_logits)))); }

Var discriminator_objective(Var real_logits, std::span<const Var> fake_logits) {
  Var total = neg(mean(log(disc_prob(real_logits))));
  for (const Var& f : fake_logits) {
    total = add(total, neg(mean(log(add_scalar(neg(disc_prob(f)), 1.0)))));
  }
  return total;
}

Var encoder_objective(Var real_clips, Var recon_clips, const Posterior& q) {
  return add(squared_error(real_clips, recon_clips),
             add(gaussian_kl(q.content), gaussian_kl(q.motion)));
}

Var encoder_objective_diff(Var real_first, Var recon_first, Var real_motion, Var recon_motion,
                           const Posterior& q) {
  Var rec = add(squared_error(real_first, recon_first), squared_error(real_motion, recon_motion));
  return add(rec, add(gaussian_kl(q.content), gaussian_kl(q.motion)));
}

Reconstruction reconstruct_batch(const BoundModel& m, Var clips, Stream rng, std::size_t ref0) {
  const ModelConfig& c = m.bundle->config;
  Posterior q = encode(m, clip_frame(clips, c.pixels(), ref0),
                       clip_motion(clips, c.pixels(), c.clip_length));
  Stream zx = rng.split("posterior_x");
  Stream zv = rng.split("posterior_v");
  Var z_content = reparameterize(q.content, zx);
  Var z_motion = reparameterize(q.motion, zv);
  return {q, generate(m, z_content, z_motion, ref0)};
}

GeneratorOutput generate_from_prior(const BoundModel& m, std::size_t batch, Stream rng,
                                    std::size_t ref0) {
  const ModelConfig& c = m.bundle->config;
  Stream px = rng.split("prior_x");
  Stream pv = rng.split("prior_v");
  Var z_content = m.tape->constant(px.normal_tensor({batch, c.content_dim}));
  Var z_motion = m.tape->constant(pv.normal_tensor({batch, c.motion_dim}));
  return generate(m, z_content, z_motion, ref0);
}

std::vector<std::size_t> pick_frames(std::size_t batch, std::size_t frames, Stream rng) {
  std::vector<std::size_t> idx(batch);
  for (std::size_t& i : idx) i = rng.below(frames);
  return idx;
}

Var build_loss_enc(const BoundModel& m, const Tensor& clips, Stream rng) {
  check_batch(m, clips);
  Var real = m.tape->constant(clips);
  Reconstruction r = reconstruct_batch(m, real, rng);
  return encoder_objective(real, r.output.raw_clip, r.posterior);
}

Var build_loss_enc_v(const BoundModel& m, const Tensor& clips, Stream rng) {
  check_batch(m, clips);
  const ModelConfig& c = m.bundle->config;
  Var real = m.tape->constant(clips);
  Reconstruction r = reconstruct_batch(m, real, rng);
  return encoder_objective_diff(clip_frame(real, c.pixels(), 0),
                                clip_frame(r.output.raw_clip, c.pixels(), 0),
                                clip_motion(real, c.pixels(), c.clip_length), r.output.motion,
                                r.posterior);
}

Var build_loss_gen(const BoundModel& m, const Tensor& clips, Stream rng) {
  check_batch(m, clips);
  const ModelConfig& c = m.bundle->config;
  Var real = m.tape->constant(clips);
  Reconstruction r = reconstruct_batch(m, real, rng);
  GeneratorOutput prior = generate_from_prior(m, clips.rows(), rng);
  const auto idx = pick_frames(clips.rows(), c.clip_length, rng.split("frame_idx"));

  Var adv = generator_adversarial(image_logits(m, select_blocks(r.output.clip, c.pixels(), idx)));
  adv = add(adv, generator_adversarial(image_logits(m, select_blocks(prior.clip, c.pixels(), idx))));
  adv = add(adv, generator_adversarial(video_logits(m, r.output.clip)));
  adv = add(adv, generator_adversarial(video_logits(m, prior.clip)));
  return add(squared_error(real, r.output.raw_clip), adv);
}

Var build_loss_d_image(const BoundModel& m, const Tensor& clips, Stream rng) {
  check_batch(m, clips);
  const ModelConfig& c = m.bundle->config;
  Var real = m.tape->constant(clips);
  Reconstruction r = reconstruct_batch(m, real, rng);
  GeneratorOutput prior = generate_from_prior(m, clips.rows(), rng);
  const auto idx = pick_frames(clips.rows(), c.clip_length, rng.split("frame_idx"));
  const std::array<Var, 2> fakes{
      image_logits(m, select_blocks(r.output.clip, c.pixels(), idx)),
      image_logits(m, select_blocks(prior.clip, c.pixels(), idx)),
  };
  return discriminator_objective(image_logits(m, select_blocks(real, c.pixels(), idx)), fakes);
}

Var build_loss_d_video(const BoundModel& m, const Tensor& clips, Stream rng) {
  check_batch(m, clips);
  Var real = m.tape->constant(clips);
  Reconstruction r = reconstruct_batch(m, real, rng);
  GeneratorOutput prior = generate_from_prior(m, clips.rows(), rng);
  const std::array<Var, 2> fakes{video_logits(m, r.output.clip), video_logits(m, prior.clip)};
  return discriminator_objective(video_logits(m, real), fakes);
}

LossEval evaluate_loss(const ModelBundle& bundle, unsigned groups, const LossBuilder& build) {
  Tape tape;
  BoundModel m = bind(tape, bundle, groups);
  Var loss = build(m);
  const std::vector<Var> leaves = m.leaves(groups);
  LossEval out;
  out.value = loss.value().item();
  out.grads = tape.backward(loss, leaves);
  return out;
}

double loss_value(const ModelBundle& bundle, const LossBuilder& build) {
  Tape tape;
  BoundModel m = bind(tape, bundle, 0);
  return build(m).value().item();
}

double loss_enc(const ModelBundle& b, const Tensor& clips, Stream rng) {
  return loss_value(b, [&](const BoundModel& m) { return build_loss_enc(m, clips, rng); });
}

double loss_enc_v(const ModelBundle& b, const Tensor& clips, Stream rng) {
  return loss_value(b, [&](const BoundModel& m) { return build_loss_enc_v(m, clips, rng); });
}

double loss_gen(const ModelBundle& b, const Tensor& clips, Stream rng) {
  return loss_value(b, [&](const BoundModel& m) { return build_loss_gen(m, clips, rng); });
}

double loss_d_image(const ModelBundle& b, const Tensor& clips, Stream rng) {
  return loss_value(b, [&](const BoundModel& m) { return build_loss_d_image(m, clips, rng); });
}

double loss_d_video(const ModelBundle& b, const Tensor& clips, Stream rng) {
  return loss_value(b, [&](const BoundModel& m) { return build_loss_d_video(m, clips, rng); });
}

}  // namespace rg::encgan
