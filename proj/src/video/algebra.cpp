#include "rg/video/algebra.hpp"

#include <cmath>
#include <string>

#include "rg/error.hpp"

namespace rg::video {
namespace {

void check_motion(const FrameShape& shape, const DiffSequence& motion) {
  for (const Frame& d : motion.diffs) {
    require(d.shape() == shape, ErrorKind::kDimensionMismatch,
            "motion difference map does not match frame dimensions");
  }
}

void check_stride(std::size_t clip_length, std::size_t r) {
  require(r >= 1 && r <= clip_length, ErrorKind::kInvalidArgument,
          "reference stride r=" + std::to_string(r) + " outside 1.." + std::to_string(clip_length));
}

}  // namespace

Decomposition decompose(const VideoClip& clip) {
  require(clip.length() >= 2, ErrorKind::kInvalidArgument, "decompose: clip needs >= 2 frames");
  Decomposition out{clip[0], {}};
  out.motion.diffs.reserve(clip.length() - 1);
  for (std::size_t i = 0; i + 1 < clip.length(); ++i) {
    Frame d(clip.frame_shape());
    for (std::size_t p = 0; p < d.size(); ++p) d[p] = clip[i + 1][p] - clip[i][p];
    out.motion.diffs.push_back(std::move(d));
  }
  return out;
}

VideoClip reconstruct(const Frame& content, const DiffSequence& motion) {
  return reconstruct_from_reference(content, 1, motion);
}

VideoClip reconstruct_from_reference(const Frame& ref, std::size_t r, const DiffSequence& motion) {
  const std::size_t frames = motion.length() + 1;
  require(motion.length() >= 1, ErrorKind::kInvalidArgument,
          "reconstruct: motion must hold at least one difference map");
  require(r >= 1 && r <= frames, ErrorKind::kInvalidArgument,
          "reconstruct: reference index " + std::to_string(r) + " outside 1.." +
              std::to_string(frames));
  check_motion(ref.shape(), motion);

  const std::size_t ref0 = r - 1;
  std::vector<Frame> out(frames, Frame(ref.shape()));
  out[ref0] = ref;
  for (std::size_t i = ref0 + 1; i < frames; ++i) {
    for (std::size_t p = 0; p < ref.size(); ++p) out[i][p] = out[i - 1][p] + motion.diffs[i - 1][p];
  }
  for (std::size_t i = ref0; i-- > 0;) {
    for (std::size_t p = 0; p < ref.size(); ++p) out[i][p] = out[i + 1][p] - motion.diffs[i][p];
  }
  return VideoClip(std::move(out));
}

std::size_t stitched_length(std::size_t clip_count, std::size_t clip_length, std::size_t r) {
  require(clip_count >= 1, ErrorKind::kInvalidArgument, "stitch: need at least one clip");
  check_stride(clip_length, r);
  return (clip_count - 1) * r + clip_length;
}

StitchSource stitch_source(std::size_t pos, std::size_t clip_count, std::size_t clip_length,
                           std::size_t r) {
  const std::size_t total = stitched_length(clip_count, clip_length, r);
  require(pos < total, ErrorKind::kInvalidArgument, "stitch_source: position out of range");
  const std::size_t head = (clip_count - 1) * r;
  if (pos < head) return {pos / r, pos % r};
  return {clip_count - 1, pos - head};
}

LongVideo stitch(std::span<const VideoClip> clips, std::size_t r) {
  require(!clips.empty(), ErrorKind::kInvalidArgument, "stitch: empty clip list");
  const std::size_t tc = clips.front().length();
  for (const VideoClip& c : clips) {
    require(c.length() == tc && c.frame_shape() == clips.front().frame_shape(),
            ErrorKind::kDimensionMismatch, "stitch: clips differ in length or frame dimensions");
  }
  LongVideo out;
  out.clip_count = clips.size();
  out.ref = r;
  out.clip_length = tc;
  const std::size_t total = stitched_length(clips.size(), tc, r);
  out.frames.reserve(total);
  for (std::size_t pos = 0; pos < total; ++pos) {
    const StitchSource s = stitch_source(pos, clips.size(), tc, r);
    out.frames.push_back(clips[s.clip][s.frame]);
  }
  return out;
}

std::vector<VideoClip> segment_overlapping(std::span<const Frame> video, std::size_t clip_length,
                                           std::size_t r) {
  require(clip_length >= 2, ErrorKind::kInvalidArgument, "segment: clip length must be >= 2");
  check_stride(clip_length, r);
  require(video.size() >= clip_length, ErrorKind::kInvalidArgument,
          "segment: video of " + std::to_string(video.size()) + " frames is shorter than T_c=" +
              std::to_string(clip_length));
  check_homogeneous(video, "segment");
  const std::size_t count = (video.size() - clip_length) / r + 1;
  std::vector<VideoClip> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto first = video.begin() + static_cast<std::ptrdiff_t>(k * r);
    out.emplace_back(std::vector<Frame>(first, first + static_cast<std::ptrdiff_t>(clip_length)));
  }
  return out;
}

std::vector<VideoClip> segment_nonoverlapping(std::span<const Frame> video, std::size_t seg_len) {
  require(seg_len >= 2, ErrorKind::kInvalidArgument, "segment: segment length must be >= 2");
  require(video.size() >= seg_len, ErrorKind::kInvalidArgument,
          "segment: video of " + std::to_string(video.size()) +
              " frames is shorter than the segment length " + std::to_string(seg_len));
  return segment_overlapping(video, seg_len, seg_len);
}

double overlap_mismatch(const VideoClip& prev, const VideoClip& next, std::size_t r) {
  const std::size_t tc = prev.length();
  require(next.length() == tc && next.frame_shape() == prev.frame_shape(),
          ErrorKind::kDimensionMismatch, "overlap_mismatch: clips differ in dimensions");
  require(r >= 1 && r < tc, ErrorKind::kInvalidArgument,
          "overlap_mismatch: stride must leave at least one shared frame");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + r < tc; ++i) {
    const Frame& a = prev[r + i];
    const Frame& b = next[i];
    for (std::size_t p = 0; p < a.size(); ++p) total += std::abs(a[p] - b[p]);
    count += a.size();
  }
  return total / static_cast<double>(count);
}

}  // namespace rg::video
