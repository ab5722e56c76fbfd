#include <cmath>
#include <cstring>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "expect_error.hpp"
#include "rg/data/checkpoint.hpp"
#include "rg/data/config.hpp"
#include "rg/data/container.hpp"
#include "rg/data/datasets.hpp"
#include "rg/data/pipeline.hpp"
#include "rg/video/algebra.hpp"

using namespace rg;
using namespace rg::data;
using rg::testing::kind_of;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("rg_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig tiny_run() {
  RunConfig c;
  c.t_c = 4;
  c.r = 2;
  c.height = 8;
  c.width = 8;
  c.content_dim = 3;
  c.motion_dim = 2;
  c.hidden = 5;
  c.batch = 2;
  c.steps = 3;
  return c;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("container header layout") {
  std::stringstream ss;
  const std::vector<std::uint64_t> dims{2, 3};
  const std::vector<double> values{1, 2, 3, 4, 5, 6};
  write_container(ss, dims, values, Dtype::kF64);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 4 + 4 + 4 + 4 + 2 * 8 + 6 * 8);
  CHECK(bytes.substr(0, 4) == "RCG1");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 2);
  CHECK(bytes[12] == 2);
  CHECK(bytes[16] == 2);
  CHECK(bytes[24] == 3);
}

TEST_CASE("container round trip is bit exact for both dtypes") {
  num::Stream s(5);
  for (const std::vector<std::uint64_t>& dims :
       {std::vector<std::uint64_t>{7}, {3, 4}, {2, 3, 4, 1}, {1, 1, 1}}) {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    std::vector<double> f64(n), f32(n);
    for (std::size_t i = 0; i < n; ++i) {
      f64[i] = s.normal();
      f32[i] = static_cast<float>(s.normal());
    }
    f64[0] = -0.0;
    for (auto [dtype, values] : {std::pair{Dtype::kF64, f64}, std::pair{Dtype::kF32, f32}}) {
      std::stringstream ss;
      write_container(ss, dims, values, dtype);
      const ContainerData d = read_container(ss);
      CHECK(d.dtype == dtype);
      CHECK(d.dims == dims);
      REQUIRE(d.values.size() == n);
      CHECK(std::memcmp(d.values.data(), values.data(), n * sizeof(double)) == 0);
    }
  }
}

TEST_CASE("container errors") {
  std::stringstream bad("RCGX....");
  CHECK(kind_of([&] { read_container(bad); }) == ErrorKind::kIo);
  std::stringstream ss;
  const std::vector<std::uint64_t> dims{4};
  CHECK(kind_of([&] { write_container(ss, dims, std::vector<double>(3), Dtype::kF64); }) ==
        ErrorKind::kDimensionMismatch);
  write_container(ss, dims, std::vector<double>(4), Dtype::kF64);
  std::stringstream truncated(ss.str().substr(0, ss.str().size() - 3));
  CHECK(kind_of([&] { read_container(truncated); }) == ErrorKind::kIo);
  CHECK(kind_of([] { read_container_file("/nonexistent/x.rcg"); }) == ErrorKind::kIo);
  CHECK(kind_of([] { parse_dtype("f16"); }) == ErrorKind::kConfig);
}

TEST_CASE("video files and streaming writer") {
  TempDir tmp("video");
  const auto v = shapes_video(0, 10, 1);
  write_video(tmp.file("a.rcg"), v.frames, Dtype::kF64);
  CHECK(read_video(tmp.file("a.rcg")) == v.frames);
  {
    StreamingVideoWriter w(tmp.file("b.rcg"), {16, 16, 1}, Dtype::kF64);
    for (const auto& f : v.frames) w.append(f);
    CHECK(w.frames() == 10);
    CHECK(kind_of([&] { w.append(video::Frame({2, 2, 1})); }) == ErrorKind::kDimensionMismatch);
    w.close();
  }
  CHECK(slurp(tmp.file("a.rcg")) == slurp(tmp.file("b.rcg")));
  CHECK(read_container_header(tmp.file("b.rcg")).dims == std::vector<std::uint64_t>{10, 16, 16, 1});
}

TEST_CASE("manifest round trip and validation") {
  TempDir tmp("manifest");
  const auto vids = shapes_dataset(4, 8, 2);
  const DatasetManifest m = write_dataset(tmp.path.string(), vids, Dtype::kF32);
  CHECK(m.records.size() == 4);
  CHECK(read_manifest(tmp.file("manifest.txt")) == m);
  CHECK_NOTHROW(validate_manifest(m, tmp.path.string()));
  const auto loaded = load_dataset(tmp.file("manifest.txt"));
  REQUIRE(loaded.size() == 4);
  CHECK(loaded[2].label == vids[2].label);
  // Shapes frames are exact in f32.
  CHECK(loaded[1].frames == vids[1].frames);

  DatasetManifest wrong = m;
  wrong.records[0].frames = 9;
  CHECK(kind_of([&] { validate_manifest(wrong, tmp.path.string()); }) == ErrorKind::kDimensionMismatch);
  DatasetManifest missing = m;
  missing.records[0].path = "nope.rcg";
  CHECK(kind_of([&] { validate_manifest(missing, tmp.path.string()); }) == ErrorKind::kIo);

  std::ofstream(tmp.file("bad.txt")) << "# header\n\nvideo_00000.rcg 8 16 16\n";
  CHECK(kind_of([&] { read_manifest(tmp.file("bad.txt")); }) == ErrorKind::kConfig);
}

TEST_CASE("shapes dataset properties") {
  const auto a = shapes_dataset(8, 20, 3), b = shapes_dataset(8, 20, 3);
  std::array<int, kShapeClasses> counts{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].frames == b[i].frames);
    counts[static_cast<std::size_t>(a[i].label)] += 1;
    for (const auto& f : a[i].frames)
      for (double p : f.pixels()) CHECK((p == -1.0 || p == 1.0));
    const auto d = video::decompose(video::VideoClip(a[i].frames));
    for (const auto& diff : d.motion.diffs) {
      std::size_t nonzero = 0;
      for (double p : diff.pixels()) nonzero += p != 0.0;
      CHECK(nonzero <= 2 * 4);
      CHECK(nonzero > 0);
    }
  }
  CHECK(counts == std::array<int, kShapeClasses>{2, 2, 2, 2});
  CHECK(shapes_dataset(8, 20, 4)[0].frames != a[0].frames);
  CHECK(kind_of([] { shapes_video(0, 5, 1, {4, 4, 1}, 4); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("drift dataset properties") {
  const auto a = drift_dataset(3, 12, 5);
  CHECK(a[0].frames == drift_dataset(3, 12, 5)[0].frames);
  const double bound = kDriftAmplitude * 2.0 * std::numbers::pi * kDriftMaxSpeed / kDriftPeriod;
  for (const auto& v : a) {
    CHECK(v.label == -1);
    for (std::size_t k = 0; k + 1 < v.frames.size(); ++k) {
      CHECK(v.frames[k] != v.frames[k + 1]);
      double sum = 0.0;
      for (std::size_t p = 0; p < v.frames[k].size(); ++p) sum += std::abs(v.frames[k + 1][p] - v.frames[k][p]);
      CHECK(sum / static_cast<double>(v.frames[k].size()) < bound);
    }
  }
}

TEST_CASE("step sampling") {
  const auto v = shapes_video(0, 48, 1).frames;
  const video::VideoClip c = step_sample(v, 0, 3, 16);
  CHECK(c.length() == 16);
  for (std::size_t i = 0; i < 16; ++i) CHECK(c[i] == v[3 * i]);
  CHECK(step_sample(v, 5, 1, 4)[3] == v[8]);
  CHECK(kind_of([&] { step_sample(v, 4, 3, 16); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("uniform sampling") {
  const auto idx16 = uniform_sample_indices(16, 16, num::Stream(1));
  for (std::size_t i = 0; i < 16; ++i) CHECK(idx16[i] == i);
  const auto idx = uniform_sample_indices(160, 16, num::Stream(2));
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(idx[i] / 10 == i);
    if (i > 0) CHECK(idx[i] > idx[i - 1]);
  }
  CHECK(idx == uniform_sample_indices(160, 16, num::Stream(2)));
  // Remainder joins the last bin.
  const auto odd = uniform_sample_indices(35, 16, num::Stream(3));
  CHECK(odd[15] >= 30);
  CHECK(odd[15] < 35);
  CHECK(kind_of([] { uniform_sample_indices(10, 16, num::Stream(1)); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("training-phase sampling schedule") {
  RunConfig c;
  c.steps = 100;
  c.uniform_fraction = 0.1;
  CHECK(uniform_phase(c, 9));
  CHECK_FALSE(uniform_phase(c, 10));
  c.sampling = Sampling::kUniform;
  CHECK(uniform_phase(c, 99));
  c.sampling = Sampling::kStep;
  CHECK_FALSE(uniform_phase(c, 0));
}

TEST_CASE("config defaults, overrides and validation") {
  const RunConfig d = config_from_json("");
  CHECK(d.t_c == 16);
  CHECK(d.r == 8);
  CHECK(d.lr == 2e-4);
  CHECK(d.beta1 == 0.5);
  CHECK(d.batch == 8);
  CHECK(d.content_dim == 64);
  CHECK(d.motion_dim == 10);
  CHECK(config_from_json(R"({"t_c": 8})").r == 4);
  const RunConfig o = config_from_json(R"({"t_c": 8, "seed": 3})", {{"seed", "9"}, {"gen_mode", "seeded"}});
  CHECK(o.seed == 9);
  CHECK(o.gen_mode == recall::ChainMode::kSeeded);
  CHECK(config_from_json(config_to_json(o)) == o);
  CHECK(kind_of([] { config_from_json(R"({"bogus": 1})"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { config_from_json(R"({"r": 16})"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { config_from_json(R"({"batch": -1})"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { config_from_json("{not json"); }) == ErrorKind::kConfig);
  CHECK(kind_of([] { config_from_json("", {{"sampling", "sometimes"}}); }) == ErrorKind::kConfig);
}

TEST_CASE("checkpoint round trip, resume and conflicts") {
  TempDir tmp("checkpoint");
  RunConfig c = tiny_run();
  const auto data = shapes_dataset(4, 10, 1, {8, 8, 1});

  encgan::ModelBundle straight = encgan::make_bundle(c.model_config(), c.seed);
  c.steps = 6;
  train_encgan(c, data, straight);

  RunConfig half = c;
  half.steps = 3;
  encgan::ModelBundle first = encgan::make_bundle(c.model_config(), c.seed);
  train_encgan(half, data, first);
  save_checkpoint(tmp.file("a.ck"), half, first);
  Checkpoint ck = load_checkpoint(tmp.file("a.ck"));
  CHECK(ck.config == half);
  CHECK(ck.bundle.steps == 3);
  CHECK(ck.bundle.opt_gen == first.opt_gen);
  train_encgan(c, data, ck.bundle);
  for (std::size_t k = 0; k < straight.all_networks().size(); ++k)
    CHECK(straight.all_networks()[k]->params() == ck.bundle.all_networks()[k]->params());

  save_checkpoint(tmp.file("b.ck"), half, first);
  CHECK(slurp(tmp.file("a.ck")) == slurp(tmp.file("b.ck")));

  RunConfig other = half;
  other.hidden = 7;
  CHECK(kind_of([&] { load_checkpoint(tmp.file("a.ck"), other); }) == ErrorKind::kConfig);
  other = half;
  other.seed = 99;
  CHECK_NOTHROW(load_checkpoint(tmp.file("a.ck"), other));
  std::ofstream(tmp.file("junk.ck")) << "nope";
  CHECK(kind_of([&] { load_checkpoint(tmp.file("junk.ck")); }) == ErrorKind::kIo);
}

TEST_CASE("long generation keeps the requested prefix") {
  const RunConfig c = tiny_run();
  const encgan::ModelBundle b = encgan::make_bundle(c.model_config(), 1);
  CHECK(clips_for_length(4, 4, 2) == 1);
  CHECK(clips_for_length(5, 4, 2) == 2);
  CHECK(clips_for_length(160, 16, 8) == 19);
  recall::ChainResult r;
  const auto frames = generate_long(b, chain_options(c, 1), 9, num::Stream(2), &r);
  CHECK(frames.size() == 9);
  CHECK(r.clip_count == 4);
  const auto full = recall::chain_generate_video(b, chain_options(c, 4), num::Stream(2));
  CHECK(std::equal(frames.begin(), frames.end(), full.frames.begin()));
  const auto two = generate_long(b, chain_options(c, 1), 3, num::Stream(2), &r, 2);
  CHECK(two.size() == 3);
  CHECK(r.clip_count == 2);
}

TEST_CASE("recall pairs follow the ovi switch") {
  RunConfig c = tiny_run();
  const auto vids = shapes_dataset(2, 10, 1, {8, 8, 1});
  CHECK(pair_stride(c) == 2);
  CHECK(recall_pairs(c, vids).pairs.size() == 2 * 3);
  c.ovi = false;
  CHECK(pair_stride(c) == 4);
  CHECK(recall_pairs(c, vids).pairs.size() == 2 * 1);
}

}
