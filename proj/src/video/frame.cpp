#include "rg/video/frame.hpp"

#include <algorithm>
#include <string>

#include "rg/error.hpp"

namespace rg::video {

static void check_shape(const FrameShape& s) {
  require(s.height > 0 && s.width > 0 && s.channels > 0, ErrorKind::kInvalidArgument,
          "frame dimensions must be positive");
}

Frame::Frame(FrameShape shape, double fill) : shape_(shape) {
  check_shape(shape_);
  pixels_.assign(shape_.pixels(), fill);
}

Frame::Frame(FrameShape shape, std::vector<double> pixels)
    : shape_(shape), pixels_(std::move(pixels)) {
  check_shape(shape_);
  require(pixels_.size() == shape_.pixels(), ErrorKind::kDimensionMismatch,
          "frame pixel count " + std::to_string(pixels_.size()) + " != H*W*C " +
              std::to_string(shape_.pixels()));
}

VideoClip::VideoClip(std::vector<Frame> frames) : frames_(std::move(frames)) {
  require(frames_.size() >= 2, ErrorKind::kInvalidArgument,
          "a clip needs at least 2 frames, got " + std::to_string(frames_.size()));
  check_homogeneous(frames_, "clip");
}

void check_homogeneous(std::span<const Frame> frames, const char* what) {
  for (const Frame& f : frames) {
    require(f.shape() == frames.front().shape(), ErrorKind::kDimensionMismatch,
            std::string(what) + ": frames have differing dimensions");
  }
}

Frame clamp(const Frame& f, double lo, double hi) {
  Frame out = f;
  for (double& v : out.pixels()) v = std::clamp(v, lo, hi);
  return out;
}

VideoClip clamp(const VideoClip& clip, double lo, double hi) {
  std::vector<Frame> frames;
  frames.reserve(clip.length());
  for (const Frame& f : clip.frames()) frames.push_back(clamp(f, lo, hi));
  return VideoClip(std::move(frames));
}

std::vector<double> flatten(std::span<const Frame> frames) {
  std::vector<double> out;
  if (frames.empty()) return out;
  out.reserve(frames.size() * frames.front().size());
  for (const Frame& f : frames) out.insert(out.end(), f.pixels().begin(), f.pixels().end());
  return out;
}

std::vector<Frame> unflatten(std::span<const double> data, FrameShape shape, std::size_t count) {
  const std::size_t px = shape.pixels();
  require(data.size() == px * count, ErrorKind::kDimensionMismatch,
          "unflatten: " + std::to_string(data.size()) + " values for " + std::to_string(count) +
              " frames of " + std::to_string(px) + " pixels");
  std::vector<Frame> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.emplace_back(shape, std::vector<double>(data.begin() + i * px, data.begin() + (i + 1) * px));
  }
  return out;
}

}  // namespace rg::video
