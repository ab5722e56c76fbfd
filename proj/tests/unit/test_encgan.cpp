#include <cmath>
#include <numbers>

#include <doctest.h>

#include "expect_error.hpp"
#include "gradcheck.hpp"
#include "rg/encgan/encgan3.hpp"
#include "rg/encgan/losses.hpp"
#include "rg/numerics/ops.hpp"

using namespace rg;
using namespace rg::encgan;
using rg::testing::kind_of;

namespace {

constexpr double kLn2 = std::numbers::ln2;

ModelConfig tiny_config() {
  ModelConfig c;
  c.clip_length = 4;
  c.frame = {3, 3, 1};
  c.content_dim = 3;
  c.motion_dim = 2;
  c.hidden = 5;
  return c;
}

// Zeroes the discriminators' output layers so D = 0.5 everywhere.
void neutralize_discriminators(ModelBundle& b) {
  for (num::Mlp* d : b.discriminators()) {
    auto& p = d->params();
    for (std::size_t k = p.size() - 2; k < p.size(); ++k)
      for (double& v : p[k].value.storage()) v = 0.0;
  }
}

num::Tensor random_batch(const ModelConfig& c, std::size_t rows, std::uint64_t seed) {
  return num::Stream(seed).uniform_tensor({rows, c.clip_width()}, -1, 1);
}

}  // namespace

TEST_SUITE("encgan") {

TEST_CASE("bundle construction is deterministic in the seed") {
  const ModelConfig c = tiny_config();
  const ModelBundle a = make_bundle(c, 3), b = make_bundle(c, 3), d = make_bundle(c, 4);
  for (std::size_t k = 0; k < a.all_networks().size(); ++k)
    CHECK(a.all_networks()[k]->params() == b.all_networks()[k]->params());
  CHECK_FALSE(a.disc_video.params() == d.disc_video.params());
}

TEST_CASE("encoder log-variance starts at the configured offset") {
  const ModelConfig c = tiny_config();
  const ModelBundle b = make_bundle(c, 1);
  const auto& bias = b.content_encoder.params()[b.content_encoder.params().size() - 1].value;
  for (std::size_t i = c.content_dim; i < bias.numel(); ++i) CHECK(bias[i] == kInitLogVar);
}

TEST_CASE("config validation") {
  ModelConfig c = tiny_config();
  CHECK_NOTHROW(c.validate());
  c.clip_length = 1;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::kConfig);
  c = tiny_config();
  c.adam.beta1 = 1.0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::kConfig);
  c = tiny_config();
  c.motion_dim = 0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::kConfig);
}

TEST_CASE("generated clips hold the content frame at the anchor without fusion") {
  ModelConfig c = tiny_config();
  c.fusion = false;
  const ModelBundle b = make_bundle(c, 2);
  for (std::size_t ref0 = 0; ref0 < c.clip_length; ++ref0) {
    num::Tape tape;
    BoundModel m = bind(tape, b, 0);
    num::Stream s(8);
    GeneratorOutput out = generate(m, tape.constant(s.normal_tensor({2, c.content_dim})),
                                   tape.constant(s.normal_tensor({2, c.motion_dim})), ref0);
    CHECK(out.raw_clip.shape() == num::Shape{2, c.clip_width()});
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t p = 0; p < c.pixels(); ++p)
        CHECK(out.raw_clip.value().at(r, ref0 * c.pixels() + p) == out.content.value().at(r, p));
    // Consecutive frames differ by the motion stream.
    for (std::size_t k = 0; k + 1 < c.clip_length; ++k)
      CHECK(out.raw_clip.value().at(1, (k + 1) * c.pixels()) - out.raw_clip.value().at(1, k * c.pixels()) ==
            doctest::Approx(out.motion.value().at(1, k * c.pixels())).epsilon(1e-12));
  }
}

TEST_CASE("clip output is clamped and motion bounded") {
  const ModelConfig c = tiny_config();
  const ModelBundle b = make_bundle(c, 2);
  num::Tape tape;
  BoundModel m = bind(tape, b, 0);
  num::Stream s(1);
  num::Tensor big = s.normal_tensor({4, 3});
  for (double& v : big.storage()) v *= 10.0;
  GeneratorOutput out = generate(m, tape.constant(big), tape.constant(s.normal_tensor({4, 2})), 0);
  for (double v : out.clip.value().storage()) CHECK(std::abs(v) <= 1.0);
  for (double v : out.motion.value().storage()) CHECK(std::abs(v) <= 2.0);
}

TEST_CASE("disabled streams emit zeros") {
  ModelConfig c = tiny_config();
  c.content_stream = false;
  c.motion_stream = false;
  c.fusion = false;
  const ModelBundle b = make_bundle(c, 2);
  num::Tape tape;
  BoundModel m = bind(tape, b, 0);
  num::Stream s(1);
  GeneratorOutput out =
      generate(m, tape.constant(s.normal_tensor({1, 3})), tape.constant(s.normal_tensor({1, 2})), 0);
  for (double v : out.clip.value().storage()) CHECK(v == 0.0);
}

TEST_CASE("generate rejects latent width mismatches") {
  const ModelConfig c = tiny_config();
  const ModelBundle b = make_bundle(c, 2);
  num::Tape tape;
  BoundModel m = bind(tape, b, 0);
  CHECK(kind_of([&] { generate(m, tape.constant(num::Tensor({1, 4})), tape.constant(num::Tensor({1, 2})), 0); }) ==
        ErrorKind::kDimensionMismatch);
  CHECK(kind_of([&] { loss_enc(b, num::Tensor({2, 5}), num::Stream(1)); }) == ErrorKind::kDimensionMismatch);
}

TEST_CASE("term-level objectives") {
  num::Tape tape;
  // Two samples: per-sample summed squared errors 4 and 2, mean 3.
  Var target = tape.constant(num::Tensor({2, 2}, {1, 1, 0, 0}));
  Var recon = tape.constant(num::Tensor({2, 2}, {-1, 1, 1, 1}));
  CHECK(squared_error(target, recon).value().item() == 3.0);
  Var zero = tape.constant(num::Tensor({3, 1}));
  CHECK(disc_prob(zero).value()[0] == 0.5);
  CHECK(generator_adversarial(zero).value().item() == doctest::Approx(kLn2).epsilon(1e-14));
  const std::array<Var, 2> fakes{zero, zero};
  CHECK(discriminator_objective(zero, fakes).value().item() == doctest::Approx(3 * kLn2).epsilon(1e-14));
  // A saturated logit stays finite.
  Var big = tape.constant(num::Tensor({1, 1}, {1e6}));
  const std::array<Var, 1> one{big};
  CHECK(std::isfinite(discriminator_objective(big, one).value().item()));
}

TEST_CASE("discriminator losses at D = 0.5") {
  const ModelConfig c = tiny_config();
  ModelBundle b = make_bundle(c, 6);
  neutralize_discriminators(b);
  const num::Tensor x = random_batch(c, 3, 2);
  const num::Stream s(4);
  CHECK(loss_d_image(b, x, s) == doctest::Approx(3 * kLn2).epsilon(1e-12));
  CHECK(loss_d_video(b, x, s) == doctest::Approx(3 * kLn2).epsilon(1e-12));
}

TEST_CASE("generator loss at D = 0.5 is reconstruction plus 4 ln 2") {
  const ModelConfig c = tiny_config();
  ModelBundle b = make_bundle(c, 6);
  neutralize_discriminators(b);
  const num::Tensor x = random_batch(c, 3, 2);
  const num::Stream s(4);
  num::Tape tape;
  BoundModel m = bind(tape, b, 0);
  Var real = tape.constant(x);
  const double rec = squared_error(real, reconstruct_batch(m, real, s).output.raw_clip).value().item();
  CHECK(loss_gen(b, x, s) == doctest::Approx(rec + 4 * kLn2).epsilon(1e-12));
}

TEST_CASE("encoder loss splits into reconstruction and KL") {
  const ModelConfig c = tiny_config();
  const ModelBundle b = make_bundle(c, 6);
  const num::Tensor x = random_batch(c, 3, 2);
  const num::Stream s(4);
  num::Tape tape;
  BoundModel m = bind(tape, b, 0);
  Var real = tape.constant(x);
  Reconstruction r = reconstruct_batch(m, real, s);
  const double rec = squared_error(real, r.output.raw_clip).value().item();
  const double kl = num::gaussian_kl(r.posterior.content).value().item() +
                    num::gaussian_kl(r.posterior.motion).value().item();
  CHECK(kl > 0.0);
  CHECK(loss_enc(b, x, s) == doctest::Approx(rec + kl).epsilon(1e-12));
  CHECK(loss_enc_v(b, x, s) != loss_enc(b, x, s));
}

TEST_CASE("losses are deterministic in the stream") {
  const ModelConfig c = tiny_config();
  const ModelBundle b = make_bundle(c, 6);
  const num::Tensor x = random_batch(c, 3, 2);
  CHECK(loss_gen(b, x, num::Stream(1)) == loss_gen(b, x, num::Stream(1)));
  CHECK(loss_gen(b, x, num::Stream(1)) != loss_gen(b, x, num::Stream(2)));
}

TEST_CASE("analytic gradients match central differences") {
  const ModelConfig c = tiny_config();
  const ModelBundle b = make_bundle(c, 5);
  const num::Tensor x = random_batch(c, 2, 9);
  const num::Stream s(9);
  auto check = [&](const LossBuilder& f) {
    const auto r = rg::testing::gradient_check(b, kAllGroups, f);
    INFO(r.worst);
    CHECK(r.tensors == 7 * 4);
    CHECK(r.max_error < 1e-6);
  };
  SUBCASE("enc") { check([&](const BoundModel& m) { return build_loss_enc(m, x, s); }); }
  SUBCASE("enc_v") { check([&](const BoundModel& m) { return build_loss_enc_v(m, x, s); }); }
  SUBCASE("gen") { check([&](const BoundModel& m) { return build_loss_gen(m, x, s); }); }
  SUBCASE("d_image") { check([&](const BoundModel& m) { return build_loss_d_image(m, x, s); }); }
  SUBCASE("d_video") { check([&](const BoundModel& m) { return build_loss_d_video(m, x, s); }); }
}

TEST_CASE("group masks restrict the tracked parameters") {
  const ModelConfig c = tiny_config();
  const ModelBundle b = make_bundle(c, 5);
  const num::Tensor x = random_batch(c, 2, 9);
  const LossEval e = evaluate_loss(b, kDiscriminators, [&](const BoundModel& m) {
    return build_loss_d_video(m, x, num::Stream(1));
  });
  CHECK(e.grads.size() == 8);
  // The image discriminator does not enter the video loss.
  for (std::size_t k = 0; k < 4; ++k)
    for (double v : e.grads[k].storage()) CHECK(v == 0.0);
}

TEST_CASE("train_step is deterministic and updates every group") {
  const ModelConfig c = tiny_config();
  ModelBundle a = make_bundle(c, 5), b = make_bundle(c, 5);
  const num::Tensor x = random_batch(c, 4, 3);
  const TrainReport ra = train_step(a, x, num::Stream(2));
  const TrainReport rb = train_step(b, x, num::Stream(2));
  CHECK(ra.loss_gen == rb.loss_gen);
  CHECK(a.gen_motion.params() == b.gen_motion.params());
  const ModelBundle fresh = make_bundle(c, 5);
  CHECK_FALSE(a.content_encoder.params() == fresh.content_encoder.params());
  CHECK_FALSE(a.gen_fusion.params() == fresh.gen_fusion.params());
  CHECK_FALSE(a.disc_image.params() == fresh.disc_image.params());
  CHECK(a.opt_disc.step == 1);
  CHECK(a.opt_enc.step == 1);
  CHECK(a.opt_gen.step == 1);
}

TEST_CASE("training reduces reconstruction error on a fixed batch") {
  ModelConfig c = tiny_config();
  c.adam.lr = 2e-3;
  ModelBundle b = make_bundle(c, 5);
  const num::Tensor x = random_batch(c, 4, 3);
  const double before = reconstruction_mse(b, x);
  for (int i = 0; i < 200; ++i) train_step(b, x, num::Stream(10).split(static_cast<std::uint64_t>(i)));
  CHECK(reconstruction_mse(b, x) < 0.5 * before);
}

TEST_CASE("clip-level encode and generate") {
  const ModelConfig c = tiny_config();
  const ModelBundle b = make_bundle(c, 5);
  const num::Tensor x = random_batch(c, 1, 3);
  const video::VideoClip clip = clip_from_row(x, 0, c);
  CHECK(clips_to_tensor(std::vector<video::VideoClip>{clip}) == x);
  const EncodedClip e = encode(b, clip);
  CHECK(e.content.mu.size() == c.content_dim);
  CHECK(e.motion.log_var.size() == c.motion_dim);
  const GeneratedClip g = generate(b, LatentPair{e.content.mu, e.motion.mu});
  CHECK(g.clip.length() == c.clip_length);
  CHECK(g.motion.length() == c.clip_length - 1);
  const LatentPair sum = latent_combine({{1, 2, 3}, {4, 5}}, {{1, 1, 1}, {-4, 0}});
  CHECK(sum == LatentPair{{2, 3, 4}, {0, 5}});
  CHECK(kind_of([&] { latent_combine({{1}, {}}, {{1, 2}, {}}); }) == ErrorKind::kDimensionMismatch);
}

}
