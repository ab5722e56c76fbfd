#include "rg/encgan/encgan3.hpp"

#include <array>

#include "rg/error.hpp"
#include "rg/numerics/ops.hpp"

namespace rg::encgan {

using namespace rg::num;

namespace {

std::vector<double> row_values(const Tensor& t) { return t.storage(); }

Tensor as_row(const std::vector<double>& v) { return Tensor::row(v); }

void apply(AdamState& state, std::vector<Tensor*> params, const std::vector<Tensor>& grads) {
  adam_step(state, params, grads);
}

}  // namespace

EncodedClip encode(const ModelBundle& bundle, const video::VideoClip& clip) {
  const ModelConfig& c = bundle.config;
  require(clip.length() == c.clip_length && clip.frame_shape() == c.frame,
          ErrorKind::kDimensionMismatch, "encode: clip does not match configured dimensions");
  Tape tape;
  BoundModel m = bind(tape, bundle, 0);
  const std::array<video::VideoClip, 1> one{clip};
  Var x = tape.constant(clips_to_tensor(one));
  Posterior q = encode(m, clip_frame(x, c.pixels(), 0), clip_motion(x, c.pixels(), c.clip_length));
  return {{row_values(q.content.mu.value()), row_values(q.content.log_var.value())},
          {row_values(q.motion.mu.value()), row_values(q.motion.log_var.value())}};
}

GeneratedClip generate(const ModelBundle& bundle, const LatentPair& z) {
  Tape tape;
  BoundModel m = bind(tape, bundle, 0);
  GeneratorOutput out =
      generate(m, tape.constant(as_row(z.content)), tape.constant(as_row(z.motion)), 0);
  const ModelConfig& c = bundle.config;
  GeneratedClip g{
      video::Frame(c.frame, out.content.value().storage()),
      {video::unflatten(out.motion.value().data(), c.frame, c.clip_length - 1)},
      clip_from_row(out.clip.value(), 0, c),
  };
  return g;
}

LatentPair latent_combine(const LatentPair& a, const LatentPair& b) {
  require(a.content.size() == b.content.size() && a.motion.size() == b.motion.size(),
          ErrorKind::kDimensionMismatch, "latent_combine: latent dimensions differ");
  LatentPair out = a;
  for (std::size_t i = 0; i < out.content.size(); ++i) out.content[i] += b.content[i];
  for (std::size_t i = 0; i < out.motion.size(); ++i) out.motion[i] += b.motion[i];
  return out;
}

TrainReport train_step(ModelBundle& bundle, const Tensor& clips, Stream rng,
                       const TrainOptions& options) {
  TrainReport report;
  {
    // Both discriminator losses share one set of fakes: the substream names
    // match those of the standalone builders.
    Stream s = rng.split("disc");
    Tape tape;
    BoundModel m = bind(tape, bundle, kDiscriminators);
    Var li = build_loss_d_image(m, clips, s);
    Var lv = build_loss_d_video(m, clips, s);
    report.loss_d_image = li.value().item();
    report.loss_d_video = lv.value().item();
    const auto grads = tape.backward(add(li, lv), m.leaves(kDiscriminators));
    apply(bundle.opt_disc, group_params(bundle, kDiscriminators), grads);
  }
  {
    Stream s = rng.split("enc");
    Tape tape;
    BoundModel m = bind(tape, bundle, kEncoders);
    Var l = options.encoder_loss == EncoderLoss::kFrames ? build_loss_enc(m, clips, s)
                                                         : build_loss_enc_v(m, clips, s);
    report.loss_enc = l.value().item();
    apply(bundle.opt_enc, group_params(bundle, kEncoders), tape.backward(l, m.leaves(kEncoders)));
  }
  {
    Stream s = rng.split("gen");
    Tape tape;
    BoundModel m = bind(tape, bundle, kGenerator);
    Var l = build_loss_gen(m, clips, s);
    report.loss_gen = l.value().item();
    apply(bundle.opt_gen, group_params(bundle, kGenerator), tape.backward(l, m.leaves(kGenerator)));
  }
  bundle.steps += 1;
  return report;
}

double reconstruction_mse(const ModelBundle& bundle, const Tensor& clips) {
  const ModelConfig& c = bundle.config;
  Tape tape;
  BoundModel m = bind(tape, bundle, 0);
  Var x = tape.constant(clips);
  Posterior q = encode(m, clip_frame(x, c.pixels(), 0), clip_motion(x, c.pixels(), c.clip_length));
  GeneratorOutput out = generate(m, q.content.mu, q.motion.mu, 0);
  const Tensor& a = clips;
  const Tensor& b = out.clip.value();
  double total = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
  return total / static_cast<double>(a.numel());
}

}  // namespace rg::encgan
