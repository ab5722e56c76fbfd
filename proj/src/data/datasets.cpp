#include "rg/data/datasets.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "rg/error.hpp"

namespace rg::data {
namespace fs = std::filesystem;

namespace {

void check_shape(video::FrameShape shape) {
  require(shape.height > 0 && shape.width > 0 && shape.channels > 0, ErrorKind::kInvalidArgument,
          "frame dimensions must be positive");
}

// Folds an unbounded coordinate back into [0, m] by reflection at both ends.
std::size_t reflect(long long q, long long m) {
  if (m == 0) return 0;
  const long long period = 2 * m;
  long long u = q % period;
  if (u < 0) u += period;
  return static_cast<std::size_t>(u <= m ? u : period - u);
}

}  // namespace

void write_manifest(const std::string& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot open manifest '" + path + "' for writing");
  out << "# path frames height width channels label\n";
  for (const ManifestRecord& r : manifest.records) {
    require(r.path.find_first_of(" \t\n") == std::string::npos, ErrorKind::kInvalidArgument,
            "manifest paths may not contain whitespace: '" + r.path + "'");
    out << r.path << ' ' << r.frames << ' ' << r.height << ' ' << r.width << ' ' << r.channels
        << ' ' << r.label << '\n';
  }
  require(out.good(), ErrorKind::kIo, "manifest write failed");
}

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open manifest '" + path + "'");
  DatasetManifest m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    ManifestRecord r;
    long long frames = 0, h = 0, w = 0, c = 0;
    std::string extra;
    if (!(ss >> r.path >> frames >> h >> w >> c >> r.label) || (ss >> extra) || frames <= 0 ||
        h <= 0 || w <= 0 || c <= 0) {
      fail(ErrorKind::kConfig,
           "malformed manifest record at " + path + ":" + std::to_string(lineno));
    }
    r.frames = static_cast<std::size_t>(frames);
    r.height = static_cast<std::size_t>(h);
    r.width = static_cast<std::size_t>(w);
    r.channels = static_cast<std::size_t>(c);
    m.records.push_back(std::move(r));
  }
  return m;
}

void validate_manifest(const DatasetManifest& manifest, const std::string& base_dir) {
  for (const ManifestRecord& r : manifest.records) {
    const std::string full = (fs::path(base_dir) / r.path).string();
    require(fs::exists(full), ErrorKind::kIo, "manifest references missing container '" + full + "'");
    const ContainerHeader h = read_container_header(full);
    const std::vector<std::uint64_t> want{r.frames, r.height, r.width, r.channels};
    require(h.dims == want, ErrorKind::kDimensionMismatch,
            "container '" + r.path + "' dims disagree with its manifest record");
  }
}

std::vector<LabeledVideo> load_dataset(const std::string& manifest_path) {
  const DatasetManifest m = read_manifest(manifest_path);
  const std::string base = fs::path(manifest_path).parent_path().string();
  validate_manifest(m, base);
  std::vector<LabeledVideo> out;
  out.reserve(m.records.size());
  for (const ManifestRecord& r : m.records) {
    out.push_back({read_video((fs::path(base) / r.path).string()), r.label});
  }
  return out;
}

LabeledVideo shapes_video(std::size_t index, std::size_t length, std::uint64_t seed,
                          video::FrameShape shape, std::size_t square) {
  check_shape(shape);
  require(length >= 1, ErrorKind::kInvalidArgument, "video length must be positive");
  require(square >= 1 && square < shape.height && square < shape.width,
          ErrorKind::kInvalidArgument, "square must be smaller than the frame");
  num::Stream s = num::Stream(seed).split("shapes").split(static_cast<std::uint64_t>(index));
  const int label = static_cast<int>(index % kShapeClasses);
  const bool horizontal = label < 2;
  const long long dir = (label % 2 == 0) ? 1 : -1;
  const long long along_max = static_cast<long long>((horizontal ? shape.width : shape.height) - square);
  const long long across_max =
      static_cast<long long>((horizontal ? shape.height : shape.width) - square);
  const long long third = along_max / 3;
  const long long offset = static_cast<long long>(s.below(static_cast<std::uint64_t>(third + 1)));
  const long long start = dir > 0 ? offset : along_max - offset;
  const std::size_t across =
      static_cast<std::size_t>(s.below(static_cast<std::uint64_t>(across_max + 1)));

  LabeledVideo v;
  v.label = label;
  v.frames.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const std::size_t along = reflect(start + dir * static_cast<long long>(t), along_max);
    const std::size_t x0 = horizontal ? along : across;
    const std::size_t y0 = horizontal ? across : along;
    video::Frame f(shape, -1.0);
    for (std::size_t y = y0; y < y0 + square; ++y) {
      for (std::size_t x = x0; x < x0 + square; ++x) {
        for (std::size_t c = 0; c < shape.channels; ++c) f.at(y, x, c) = 1.0;
      }
    }
    v.frames.push_back(std::move(f));
  }
  return v;
}

LabeledVideo drift_video(std::size_t index, std::size_t length, std::uint64_t seed,
                         video::FrameShape shape) {
  check_shape(shape);
  require(length >= 1, ErrorKind::kInvalidArgument, "video length must be positive");
  num::Stream s = num::Stream(seed).split("drift").split(static_cast<std::uint64_t>(index));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double theta = two_pi * s.uniform();
  const double speed = kDriftMaxSpeed * (0.5 + 0.5 * s.uniform());
  const double phase = two_pi * s.uniform();
  const double kx = std::cos(theta);
  const double ky = std::sin(theta);

  LabeledVideo v;
  v.frames.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    video::Frame f(shape);
    for (std::size_t y = 0; y < shape.height; ++y) {
      for (std::size_t x = 0; x < shape.width; ++x) {
        const double u = (kx * static_cast<double>(x) + ky * static_cast<double>(y) -
                          speed * static_cast<double>(t)) /
                         kDriftPeriod;
        const double value = kDriftAmplitude * std::sin(two_pi * u + phase);
        for (std::size_t c = 0; c < shape.channels; ++c) f.at(y, x, c) = value;
      }
    }
    v.frames.push_back(std::move(f));
  }
  return v;
}

std::vector<LabeledVideo> shapes_dataset(std::size_t count, std::size_t length, std::uint64_t seed,
                                         video::FrameShape shape) {
  std::vector<LabeledVideo> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(shapes_video(i, length, seed, shape));
  return out;
}

std::vector<LabeledVideo> drift_dataset(std::size_t count, std::size_t length, std::uint64_t seed,
                                        video::FrameShape shape) {
  std::vector<LabeledVideo> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(drift_video(i, length, seed, shape));
  return out;
}

DatasetManifest write_dataset(const std::string& dir, const std::vector<LabeledVideo>& videos,
                              Dtype dtype) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::kIo, "cannot create directory '" + dir + "': " + ec.message());
  DatasetManifest m;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "video_%05zu.rcg", i);
    const auto& frames = videos[i].frames;
    require(!frames.empty(), ErrorKind::kInvalidArgument, "cannot write an empty video");
    write_video((fs::path(dir) / name).string(), frames, dtype);
    const video::FrameShape& s = frames[0].shape();
    m.records.push_back({name, frames.size(), s.height, s.width, s.channels, videos[i].label});
  }
  write_manifest((fs::path(dir) / "manifest.txt").string(), m);
  return m;
}

video::VideoClip step_sample(std::span<const video::Frame> video, std::size_t start,
                             std::size_t step, std::size_t count) {
  require(step >= 1 && count >= 2, ErrorKind::kInvalidArgument,
          "step_sample: step must be >= 1 and count >= 2");
  require(start + step * (count - 1) < video.size(), ErrorKind::kInvalidArgument,
          "step_sample: frames " + std::to_string(start) + ".." +
              std::to_string(start + step * (count - 1)) + " exceed video length " +
              std::to_string(video.size()));
  std::vector<video::Frame> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) frames.push_back(video[start + i * step]);
  return video::VideoClip(std::move(frames));
}

std::vector<std::size_t> uniform_sample_indices(std::size_t length, std::size_t bins,
                                                num::Stream rng) {
  require(bins >= 1, ErrorKind::kInvalidArgument, "uniform_sample: bins must be >= 1");
  require(length >= bins, ErrorKind::kInvalidArgument,
          "uniform_sample: video length " + std::to_string(length) + " shorter than " +
              std::to_string(bins) + " bins");
  const std::size_t width = length / bins;
  std::vector<std::size_t> idx(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const std::size_t lo = k * width;
    const std::size_t hi = (k + 1 == bins) ? length : lo + width;
    idx[k] = lo + static_cast<std::size_t>(rng.below(hi - lo));
  }
  return idx;
}

video::VideoClip uniform_sample(std::span<const video::Frame> video, std::size_t bins,
                                num::Stream rng) {
  require(bins >= 2, ErrorKind::kInvalidArgument, "uniform_sample: a clip needs >= 2 bins");
  std::vector<video::Frame> frames;
  frames.reserve(bins);
  for (std::size_t i : uniform_sample_indices(video.size(), bins, rng)) frames.push_back(video[i]);
  return video::VideoClip(std::move(frames));
}

}  // namespace rg::data
