#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rg/data/container.hpp"
#include "rg/numerics/random.hpp"
#include "rg/video/frame.hpp"

namespace rg::data {

struct ManifestRecord {
  std::string path;  // relative to the manifest's directory
  std::size_t frames = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  int label = -1;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

// Text manifest, one record per line:
//   <path> <frames> <height> <width> <channels> <label>
// Blank lines and lines starting with '#' are ignored.
struct DatasetManifest {
  std::vector<ManifestRecord> records;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

void write_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::string& path);
// Checks every referenced container exists and matches its declared dims.
void validate_manifest(const DatasetManifest& manifest, const std::string& base_dir);

struct LabeledVideo {
  std::vector<video::Frame> frames;
  int label = -1;
};

// Reads and validates a manifest plus every referenced video.
std::vector<LabeledVideo> load_dataset(const std::string& manifest_path);

inline constexpr int kShapeClasses = 4;

// Square of side `square` moving one pixel per frame right/left/down/up
// (labels 0..3, assigned round-robin) and bouncing at the borders.
LabeledVideo shapes_video(std::size_t index, std::size_t length, std::uint64_t seed,
                          video::FrameShape shape = {16, 16, 1}, std::size_t square = 4);

// Low-frequency sinusoidal texture translating smoothly; label -1.
LabeledVideo drift_video(std::size_t index, std::size_t length, std::uint64_t seed,
                         video::FrameShape shape = {16, 16, 1});

inline constexpr double kDriftAmplitude = 0.8;
inline constexpr double kDriftPeriod = 8.0;
inline constexpr double kDriftMaxSpeed = 0.5;

std::vector<LabeledVideo> shapes_dataset(std::size_t count, std::size_t length, std::uint64_t seed,
                                         video::FrameShape shape = {16, 16, 1});
std::vector<LabeledVideo> drift_dataset(std::size_t count, std::size_t length, std::uint64_t seed,
                                        video::FrameShape shape = {16, 16, 1});

// Writes the videos as video_NNNNN.rcg containers plus manifest.txt into
// `dir`; returns the manifest.
DatasetManifest write_dataset(const std::string& dir, const std::vector<LabeledVideo>& videos,
                              Dtype dtype);

// Frames start, start+step, ...; `count` of them.
video::VideoClip step_sample(std::span<const video::Frame> video, std::size_t start,
                             std::size_t step, std::size_t count = 16);

// One uniformly drawn frame from each of `bins` equal-length bins; the
// remainder joins the last bin.
std::vector<std::size_t> uniform_sample_indices(std::size_t length, std::size_t bins,
                                                num::Stream rng);
video::VideoClip uniform_sample(std::span<const video::Frame> video, std::size_t bins,
                                num::Stream rng);

}  // namespace rg::data
