#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "expect_error.hpp"
#include "gradcheck.hpp"
#include "rg/numerics/ops.hpp"
#include "rg/recall/recall.hpp"
#include "rg/video/algebra.hpp"

using namespace rg;
using namespace rg::recall;
using rg::testing::kind_of;

namespace {

constexpr double kLn2 = std::numbers::ln2;

encgan::ModelConfig tiny_config(std::size_t t = 4) {
  encgan::ModelConfig c;
  c.clip_length = t;
  c.frame = {3, 3, 1};
  c.content_dim = 3;
  c.motion_dim = 2;
  c.hidden = 5;
  return c;
}

std::vector<video::Frame> ramp_video(std::size_t n, double offset) {
  std::vector<video::Frame> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(video::FrameShape{3, 3, 1}, offset + 0.01 * static_cast<double>(i));
  return out;
}

PairBatch random_pairs(const encgan::ModelConfig& c, std::size_t rows, std::uint64_t seed) {
  num::Stream s(seed);
  return {s.uniform_tensor({rows, c.clip_width()}, -1, 1), s.uniform_tensor({rows, c.clip_width()}, -1, 1)};
}

}  // namespace

TEST_SUITE("recall") {

TEST_CASE("training pairs share the overlap region") {
  const std::vector<std::vector<video::Frame>> videos{ramp_video(20, 0.0), ramp_video(5, 0.5), ramp_video(12, -0.5)};
  const PairSet set = make_training_pairs(videos, 4, 2);
  CHECK(set.skipped == std::vector<std::size_t>{1});
  // (20 - 6) / 2 + 1 = 8 pairs from the first video, (12 - 6) / 2 + 1 = 4 from the third.
  CHECK(set.pairs.size() == 12);
  for (const ClipPair& p : set.pairs) {
    CHECK(p.first[2] == p.second[0]);
    CHECK(p.first[3] == p.second[1]);
    CHECK(p.second[0] == videos[p.source][p.offset + 2]);
  }
  const PairSet adjacent = make_training_pairs(videos, 4, 4);
  for (const ClipPair& p : adjacent.pairs) CHECK(p.second[0] == videos[p.source][p.offset + 4]);
  CHECK(kind_of([&] { make_training_pairs(videos, 4, 0); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { make_training_pairs(videos, 4, 5); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("reference index is the mid-clip frame") {
  CHECK(reference_index(16) == 7);
  CHECK(reference_index(4) == 1);
  CHECK(reference_index(2) == 0);
}

TEST_CASE("pair batches flatten both clips") {
  const std::vector<std::vector<video::Frame>> videos{ramp_video(10, 0.0)};
  const PairSet set = make_training_pairs(videos, 4, 2);
  const PairBatch b = pairs_to_batch(set.pairs);
  CHECK(b.first.rows() == set.pairs.size());
  CHECK(b.second.cols() == 4 * 9);
  CHECK(b.second.at(1, 0) == set.pairs[1].second[0][0]);
}

TEST_CASE("discriminator and merged losses at D = 0.5") {
  const encgan::ModelConfig c = tiny_config();
  ModelBundle b = encgan::make_bundle(c, 6);
  for (num::Mlp* d : b.discriminators()) {
    auto& p = d->params();
    for (std::size_t k = p.size() - 2; k < p.size(); ++k)
      for (double& v : p[k].value.storage()) v = 0.0;
  }
  const PairBatch pb = random_pairs(c, 3, 2);
  const num::Stream s(4);
  CHECK(loss_d_image_r(b, pb, s) == doctest::Approx(2 * kLn2).epsilon(1e-12));
  CHECK(loss_d_video_r1(b, pb, s) == doctest::Approx(2 * kLn2).epsilon(1e-12));
  for (std::size_t stride = 1; stride <= 4; ++stride)
    CHECK(loss_d_video_merged(b, pb, stride, s) == doctest::Approx(3 * kLn2).epsilon(1e-12));
  const double g = encgan::loss_value(b, [&](const BoundModel& m) { return build_loss_merged_gen(m, pb, 2, s); });
  CHECK(g == doctest::Approx(2 * kLn2).epsilon(1e-12));
}

TEST_CASE("merged fakes chain a second clip off the reconstructed first") {
  const encgan::ModelConfig c = tiny_config();
  const ModelBundle b = encgan::make_bundle(c, 6);
  const PairBatch pb = random_pairs(c, 2, 3);
  const std::size_t px = c.pixels(), t = c.clip_length, ref0 = reference_index(t);
  for (std::size_t stride = 1; stride <= t; ++stride) {
    num::Tape tape;
    BoundModel m = encgan::bind(tape, b, 0);
    Var real = tape.constant(pb.first);
    const num::Stream rng(5);
    const MergedFakes f = merged_fakes(m, real, stride, rng);

    const Var g1 = encgan::reconstruct_batch(m, real, rng.split("first"), ref0).output.clip;
    const std::size_t anchor = std::min(ref0 + stride, t - 1);
    const encgan::Posterior q =
        encgan::encode(m, encgan::clip_frame(g1, px, anchor), encgan::clip_motion(g1, px, t));
    num::Stream zx = rng.split("chain_x"), zv = rng.split("chain_v");
    const Var g2 = encgan::generate(m, num::reparameterize(q.content, zx),
                                    num::reparameterize(q.motion, zv), ref0)
                       .clip;
    // Window: the first `stride` frames of g1 followed by the head of g2.
    num::Tensor window({2, t * px});
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t k = 0; k < t; ++k)
        for (std::size_t p = 0; p < px; ++p)
          window.at(r, k * px + p) =
              k < stride ? g1.value().at(r, k * px + p) : g2.value().at(r, (k - stride) * px + p);
    CHECK(f.window.value() == encgan::video_logits(m, tape.constant(window)).value());
    CHECK(f.second.value() == encgan::video_logits(m, g2).value());
  }
}

TEST_CASE("recall gradients match central differences") {
  const encgan::ModelConfig c = tiny_config();
  const ModelBundle b = encgan::make_bundle(c, 5);
  const PairBatch pb = random_pairs(c, 2, 9);
  const num::Stream s(9);
  auto check = [&](const encgan::LossBuilder& f) {
    const auto r = rg::testing::gradient_check(b, encgan::kAllGroups, f);
    INFO(r.worst);
    CHECK(r.max_error < 1e-6);
  };
  SUBCASE("rencg") { check([&](const BoundModel& m) { return build_loss_rencg(m, pb, s); }); }
  SUBCASE("d_image") { check([&](const BoundModel& m) { return build_loss_d_image_r(m, pb, s); }); }
  SUBCASE("d_video") { check([&](const BoundModel& m) { return build_loss_d_video_r1(m, pb, s); }); }
  SUBCASE("merged") { check([&](const BoundModel& m) { return build_loss_d_video_merged(m, pb, 2, s); }); }
  SUBCASE("merged_gen") { check([&](const BoundModel& m) { return build_loss_merged_gen(m, pb, 2, s); }); }
}

TEST_CASE("train_step_recall is deterministic and honours the merged switch") {
  const encgan::ModelConfig c = tiny_config();
  ModelBundle a = encgan::make_bundle(c, 5), b = encgan::make_bundle(c, 5), d = encgan::make_bundle(c, 5);
  const PairBatch pb = random_pairs(c, 3, 1);
  const RecallReport ra = train_step_recall(a, pb, num::Stream(2), {2, true});
  const RecallReport rb = train_step_recall(b, pb, num::Stream(2), {2, true});
  const RecallReport rd = train_step_recall(d, pb, num::Stream(2), {2, false});
  CHECK(ra.loss_rencg == rb.loss_rencg);
  CHECK(a.disc_video.params() == b.disc_video.params());
  CHECK(ra.loss_d_video != rd.loss_d_video);
  CHECK(rd.loss_merged_gen == 0.0);
  CHECK(a.steps == 1);
}

TEST_CASE("chain length, seams and buffer peak") {
  for (std::size_t t : {4, 6}) {
    const ModelBundle b = encgan::make_bundle(tiny_config(t), 3);
    for (std::size_t stride = 1; stride <= t; ++stride)
      for (std::size_t n : {1, 2, 5}) {
        ChainOptions o;
        o.clip_count = n;
        o.stride = stride;
        ChainResult r;
        const video::LongVideo lv = chain_generate_video(b, o, num::Stream(1), &r);
        CHECK(lv.frames.size() == video::stitched_length(n, t, stride));
        CHECK(r.frames_emitted == lv.frames.size());
        CHECK(r.seams == (stride < t ? n - 1 : 0));
        CHECK(r.peak_buffers <= 2 * t);
        if (stride == t || n == 1) CHECK(r.mean_mismatch == 0.0);
      }
  }
}

TEST_CASE("chain emits the head of each clip and the whole last clip") {
  const encgan::ModelConfig c = tiny_config();
  const ModelBundle b = encgan::make_bundle(c, 3);
  std::vector<video::VideoClip> clips;
  ChainOptions o;
  o.clip_count = 3;
  o.stride = 2;
  o.mode = ChainMode::kSampled;
  o.on_clip = [&](std::size_t, const video::VideoClip& clip) { clips.push_back(clip); };
  const video::LongVideo lv = chain_generate_video(b, o, num::Stream(4));
  REQUIRE(clips.size() == 3);
  const video::LongVideo expect = video::stitch(clips, 2);
  CHECK(lv.frames == expect.frames);
}

TEST_CASE("mean mode starts from zero latents and feeds posterior means forward") {
  const encgan::ModelConfig c = tiny_config();
  const ModelBundle b = encgan::make_bundle(c, 3);
  std::vector<video::VideoClip> clips;
  ChainOptions o;
  o.clip_count = 2;
  o.stride = 1;
  o.mode = ChainMode::kMean;
  o.on_clip = [&](std::size_t, const video::VideoClip& clip) { clips.push_back(clip); };
  chain_generate_video(b, o, num::Stream(4));
  const std::size_t ref0 = reference_index(c.clip_length);

  num::Tape tape;
  BoundModel m = encgan::bind(tape, b, 0);
  const auto first = encgan::generate(m, tape.constant(num::Tensor({1, 3})), tape.constant(num::Tensor({1, 2})), ref0);
  CHECK(video::flatten(clips[0].frames()) == first.clip.value().storage());
  // The next content frame is the frame `stride` after the anchor.
  Var x = tape.constant(first.clip.value());
  const encgan::Posterior q = encgan::encode(m, encgan::clip_frame(x, c.pixels(), ref0 + 1),
                                             encgan::clip_motion(x, c.pixels(), c.clip_length));
  const auto second = encgan::generate(m, tape.constant(q.content.mu.value()), tape.constant(q.motion.mu.value()), ref0);
  CHECK(video::flatten(clips[1].frames()) == second.clip.value().storage());
}

TEST_CASE("chain modes differ and are reproducible") {
  const ModelBundle b = encgan::make_bundle(tiny_config(), 3);
  auto run = [&](ChainMode mode, std::uint64_t seed) {
    ChainOptions o;
    o.clip_count = 3;
    o.stride = 2;
    o.mode = mode;
    return video::flatten(chain_generate_video(b, o, num::Stream(seed)).frames);
  };
  CHECK(run(ChainMode::kMean, 1) == run(ChainMode::kMean, 2));
  CHECK(run(ChainMode::kSeeded, 1) == run(ChainMode::kSeeded, 1));
  CHECK(run(ChainMode::kSeeded, 1) != run(ChainMode::kSeeded, 2));
  CHECK(run(ChainMode::kSampled, 1) != run(ChainMode::kSeeded, 1));
  CHECK(parse_chain_mode("seeded") == ChainMode::kSeeded);
  CHECK(std::string(chain_mode_name(ChainMode::kSampled)) == "sampled");
  CHECK(kind_of([] { parse_chain_mode("bogus"); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("frame budget and tracked frames") {
  FrameBudget budget;
  {
    TrackedFrames a(ramp_video(3, 0), &budget);
    TrackedFrames b(ramp_video(2, 0), &budget);
    CHECK(budget.live() == 5);
    TrackedFrames c = std::move(a);
    CHECK(budget.live() == 5);
    c = TrackedFrames();
    CHECK(budget.live() == 2);
  }
  CHECK(budget.live() == 0);
  CHECK(budget.peak() == 5);
}

TEST_CASE("chain argument validation") {
  const ModelBundle b = encgan::make_bundle(tiny_config(), 3);
  ChainOptions o;
  o.clip_count = 0;
  CHECK(kind_of([&] { chain_generate_video(b, o, num::Stream(1)); }) == ErrorKind::kInvalidArgument);
  o.clip_count = 2;
  o.stride = 5;
  CHECK(kind_of([&] { chain_generate_video(b, o, num::Stream(1)); }) == ErrorKind::kInvalidArgument);
  o.stride = 2;
  o.ref0 = 4;
  CHECK(kind_of([&] { chain_generate_video(b, o, num::Stream(1)); }) == ErrorKind::kInvalidArgument);
}

}
