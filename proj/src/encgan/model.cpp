#include "rg/encgan/model.hpp"

#include <array>
#include <string>

#include "rg/error.hpp"
#include "rg/numerics/ops.hpp"

namespace rg::encgan {

using num::Activation;
using num::Mlp;

void ModelConfig::validate() const {
  require(clip_length >= 2, ErrorKind::kConfig, "clip length must be >= 2");
  require(frame.height > 0 && frame.width > 0 && frame.channels > 0, ErrorKind::kConfig,
          "frame dimensions must be positive");
  require(content_dim > 0 && motion_dim > 0 && hidden > 0, ErrorKind::kConfig,
          "latent and hidden dimensions must be positive");
  require(adam.lr >= 0.0 && adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 &&
              adam.beta2 < 1.0 && adam.eps > 0.0,
          ErrorKind::kConfig, "invalid Adam hyper-parameters");
}

std::vector<Mlp*> ModelBundle::all_networks() {
  return {&content_encoder, &motion_encoder, &gen_content, &gen_motion,
          &gen_fusion,      &disc_image,     &disc_video};
}

std::vector<const Mlp*> ModelBundle::all_networks() const {
  return {&content_encoder, &motion_encoder, &gen_content, &gen_motion,
          &gen_fusion,      &disc_image,     &disc_video};
}

ModelBundle make_bundle(const ModelConfig& c, std::uint64_t seed) {
  c.validate();
  const num::Stream root = num::Stream(seed).split("init");
  const std::size_t px = c.pixels();
  const std::size_t h = c.hidden;
  const std::size_t latent = c.content_dim + c.motion_dim;

  ModelBundle b;
  b.config = c;
  b.content_encoder = Mlp("enc_content", {px, h, 2 * c.content_dim}, Activation::kRelu,
                          Activation::kIdentity, root.split("enc_content"));
  b.motion_encoder = Mlp("enc_motion", {c.motion_width(), h, 2 * c.motion_dim}, Activation::kRelu,
                         Activation::kIdentity, root.split("enc_motion"));
  for (Mlp* enc : {&b.content_encoder, &b.motion_encoder}) {
    Tensor& bias = enc->params()[enc->params().size() - 1].value;
    const std::size_t half = bias.numel() / 2;
    for (std::size_t i = half; i < bias.numel(); ++i) bias[i] = kInitLogVar;
  }
  b.gen_content = Mlp("gen_content", {c.content_dim, h, px}, Activation::kRelu, Activation::kTanh,
                      root.split("gen_content"));
  b.gen_motion = Mlp("gen_motion", {latent, h, c.motion_width()}, Activation::kRelu,
                     Activation::kTanh, root.split("gen_motion"));
  b.gen_fusion = Mlp("gen_fusion", {latent, h, c.clip_width()}, Activation::kRelu,
                     Activation::kTanh, root.split("gen_fusion"));
  b.disc_image = Mlp("disc_image", {px, h, 1}, Activation::kTanh, Activation::kIdentity,
                     root.split("disc_image"));
  b.disc_video = Mlp("disc_video", {c.clip_width(), h, 1}, Activation::kTanh,
                     Activation::kIdentity, root.split("disc_video"));

  b.opt_disc = num::make_adam_state(c.adam, group_params(b, kDiscriminators));
  b.opt_enc = num::make_adam_state(c.adam, group_params(b, kEncoders));
  b.opt_gen = num::make_adam_state(c.adam, group_params(b, kGenerator));
  return b;
}

std::vector<Var> BoundModel::leaves(unsigned groups) const {
  std::vector<Var> out;
  auto append = [&out](const std::vector<Var>& v) { out.insert(out.end(), v.begin(), v.end()); };
  if (groups & kEncoders) {
    append(content_encoder);
    append(motion_encoder);
  }
  if (groups & kGenerator) {
    append(gen_content);
    append(gen_motion);
    append(gen_fusion);
  }
  if (groups & kDiscriminators) {
    append(disc_image);
    append(disc_video);
  }
  return out;
}

BoundModel bind(num::Tape& tape, const ModelBundle& b, unsigned trainable) {
  auto bind_one = [&tape](const Mlp& net, bool track) {
    return track ? net.params().bind(tape) : net.params().bind_constant(tape);
  };
  BoundModel m;
  m.tape = &tape;
  m.bundle = &b;
  m.content_encoder = bind_one(b.content_encoder, trainable & kEncoders);
  m.motion_encoder = bind_one(b.motion_encoder, trainable & kEncoders);
  m.gen_content = bind_one(b.gen_content, trainable & kGenerator);
  m.gen_motion = bind_one(b.gen_motion, trainable & kGenerator);
  m.gen_fusion = bind_one(b.gen_fusion, trainable & kGenerator);
  m.disc_image = bind_one(b.disc_image, trainable & kDiscriminators);
  m.disc_video = bind_one(b.disc_video, trainable & kDiscriminators);
  return m;
}

std::vector<Tensor*> group_params(ModelBundle& b, unsigned groups) {
  std::vector<Tensor*> out;
  auto append = [&out](std::vector<Mlp*> nets) {
    for (Mlp* n : nets) {
      auto p = n->params().pointers();
      out.insert(out.end(), p.begin(), p.end());
    }
  };
  if (groups & kEncoders) append(b.encoders());
  if (groups & kGenerator) append(b.generator());
  if (groups & kDiscriminators) append(b.discriminators());
  return out;
}

Posterior encode(const BoundModel& m, Var content_frame, Var motion) {
  const ModelConfig& c = m.bundle->config;
  Var hc = m.bundle->content_encoder.forward(m.content_encoder, content_frame);
  Var hm = m.bundle->motion_encoder.forward(m.motion_encoder, motion);
  return {
      num::make_gaussian(num::slice_cols(hc, 0, c.content_dim),
                         num::slice_cols(hc, c.content_dim, c.content_dim)),
      num::make_gaussian(num::slice_cols(hm, 0, c.motion_dim),
                         num::slice_cols(hm, c.motion_dim, c.motion_dim)),
  };
}

GeneratorOutput generate(const BoundModel& m, Var z_content, Var z_motion, std::size_t ref0) {
  const ModelConfig& c = m.bundle->config;
  require(z_content.cols() == c.content_dim && z_motion.cols() == c.motion_dim,
          ErrorKind::kDimensionMismatch,
          "generate: latent widths " + std::to_string(z_content.cols()) + "/" +
              std::to_string(z_motion.cols()) + " do not match configured " +
              std::to_string(c.content_dim) + "/" + std::to_string(c.motion_dim));
  require(z_content.rows() == z_motion.rows(), ErrorKind::kDimensionMismatch,
          "generate: latent batch sizes differ");
  num::Tape& tape = *m.tape;
  const std::size_t batch = z_content.rows();
  const std::array<Var, 2> joint_parts{z_content, z_motion};
  Var joint = num::concat_cols(joint_parts);

  GeneratorOutput out;
  out.content = c.content_stream ? m.bundle->gen_content.forward(m.gen_content, z_content)
                                 : tape.constant(Tensor({batch, c.pixels()}));
  // Difference maps live in [-2, 2].
  out.motion = c.motion_stream
                   ? num::scale(m.bundle->gen_motion.forward(m.gen_motion, joint), 2.0)
                   : tape.constant(Tensor({batch, c.motion_width()}));
  Var recursion = num::integrate_motion(out.content, out.motion, ref0, c.clip_length);
  out.raw_clip = c.fusion ? num::add(recursion, num::scale(m.bundle->gen_fusion.forward(m.gen_fusion, joint),
                                                           kFusionRange))
                          : recursion;
  out.clip = num::clamp(out.raw_clip, -1.0, 1.0);
  return out;
}

Var image_logits(const BoundModel& m, Var frames) {
  return num::clamp(m.bundle->disc_image.forward(m.disc_image, frames), -kLogitBound, kLogitBound);
}

Var video_logits(const BoundModel& m, Var clips) {
  return num::clamp(m.bundle->disc_video.forward(m.disc_video, clips), -kLogitBound, kLogitBound);
}

Var clip_motion(Var clips, std::size_t pixels, std::size_t frames) {
  const std::size_t w = (frames - 1) * pixels;
  return num::sub(num::slice_cols(clips, pixels, w), num::slice_cols(clips, 0, w));
}

Var clip_frame(Var clips, std::size_t pixels, std::size_t index) {
  return num::slice_cols(clips, index * pixels, pixels);
}

Tensor clips_to_tensor(std::span<const video::VideoClip> clips) {
  require(!clips.empty(), ErrorKind::kInvalidArgument, "empty clip batch");
  const std::size_t width = clips[0].length() * clips[0].frame_shape().pixels();
  Tensor t({clips.size(), width});
  for (std::size_t b = 0; b < clips.size(); ++b) {
    require(clips[b].length() == clips[0].length() &&
                clips[b].frame_shape() == clips[0].frame_shape(),
            ErrorKind::kDimensionMismatch, "clip batch is not homogeneous");
    const std::vector<double> row = video::flatten(clips[b].frames());
    std::copy(row.begin(), row.end(), &t.at(b, 0));
  }
  return t;
}

video::VideoClip clip_from_row(const Tensor& t, std::size_t row, const ModelConfig& c) {
  require(t.cols() == c.clip_width(), ErrorKind::kDimensionMismatch,
          "clip_from_row: row width does not match configuration");
  std::span<const double> data(&t.at(row, 0), c.clip_width());
  return video::VideoClip(video::unflatten(data, c.frame, c.clip_length));
}

}  // namespace rg::encgan
