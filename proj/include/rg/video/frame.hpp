#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rg::video {

struct FrameShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t pixels() const { return height * width * channels; }
  friend bool operator==(const FrameShape&, const FrameShape&) = default;
};

// A frame-shaped array of reals. Used both for image frames (nominally in
// [-1, 1]) and for signed difference maps (in [-2, 2]).
class Frame {
 public:
  Frame() = default;
  explicit Frame(FrameShape shape, double fill = 0.0);
  Frame(FrameShape shape, std::vector<double> pixels);

  const FrameShape& shape() const { return shape_; }
  std::size_t size() const { return pixels_.size(); }
  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }

  double& operator[](std::size_t i) { return pixels_[i]; }
  double operator[](std::size_t i) const { return pixels_[i]; }
  double& at(std::size_t y, std::size_t x, std::size_t c = 0) {
    return pixels_[(y * shape_.width + x) * shape_.channels + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return pixels_[(y * shape_.width + x) * shape_.channels + c];
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  FrameShape shape_;
  std::vector<double> pixels_;
};

// T_c >= 2 frames of identical shape.
class VideoClip {
 public:
  VideoClip() = default;
  explicit VideoClip(std::vector<Frame> frames);

  std::size_t length() const { return frames_.size(); }
  const FrameShape& frame_shape() const { return frames_.front().shape(); }
  const Frame& operator[](std::size_t i) const { return frames_[i]; }
  const std::vector<Frame>& frames() const { return frames_; }

  friend bool operator==(const VideoClip&, const VideoClip&) = default;

 private:
  std::vector<Frame> frames_;
};

// T_c - 1 signed frame differences.
struct DiffSequence {
  std::vector<Frame> diffs;

  std::size_t length() const { return diffs.size(); }
  friend bool operator==(const DiffSequence&, const DiffSequence&) = default;
};

struct LongVideo {
  std::vector<Frame> frames;
  std::size_t clip_count = 0;
  std::size_t ref = 0;
  std::size_t clip_length = 0;
};

// Checks that all frames share one shape; throws kDimensionMismatch otherwise.
void check_homogeneous(std::span<const Frame> frames, const char* what);

Frame clamp(const Frame& f, double lo = -1.0, double hi = 1.0);
VideoClip clamp(const VideoClip& clip, double lo = -1.0, double hi = 1.0);

// Row-major concatenation of all frames, and the inverse.
std::vector<double> flatten(std::span<const Frame> frames);
std::vector<Frame> unflatten(std::span<const double> data, FrameShape shape, std::size_t count);

}  // namespace rg::video
