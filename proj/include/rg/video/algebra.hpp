#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rg/video/frame.hpp"

// Pure-function algebra of frames, difference maps, clips and long videos.
// Reference indices `r` are 1-based frame positions, matching the usual
// clip notation x_1..x_Tc. A stride r equal to the clip length means
// consecutive clips share no frames.
namespace rg::video {

struct Decomposition {
  Frame content;
  DiffSequence motion;
};

// content = frame 0, motion[i] = frame[i+1] - frame[i] (signed).
Decomposition decompose(const VideoClip& clip);

// frame[0] = content, frame[j] = frame[j-1] + motion[j-1].
VideoClip reconstruct(const Frame& content, const DiffSequence& motion);

// frame r (1-based) = ref; earlier frames by backward subtraction
// x_i = x_{i+1} - v_{i+1}, later frames by forward addition x_i = x_{i-1} + v_i.
VideoClip reconstruct_from_reference(const Frame& ref, std::size_t r, const DiffSequence& motion);

std::size_t stitched_length(std::size_t clip_count, std::size_t clip_length, std::size_t r);

struct StitchSource {
  std::size_t clip;   // 0-based clip index
  std::size_t frame;  // 0-based frame within the clip
};

// Which clip frame lands at output position `pos` (0-based) of a stitched
// video: clip j supplies its first r frames at offset j*r, and the final
// clip additionally supplies its tail.
StitchSource stitch_source(std::size_t pos, std::size_t clip_count, std::size_t clip_length,
                           std::size_t r);

// Chains clips into a video of (N-1)*r + T_c frames.
LongVideo stitch(std::span<const VideoClip> clips, std::size_t r);

// Clips of length clip_length starting at 0, r, 2r, ...; trailing frames that
// do not fill a clip are dropped.
std::vector<VideoClip> segment_overlapping(std::span<const Frame> video, std::size_t clip_length,
                                           std::size_t r);

// floor(L / seg_len) disjoint consecutive segments; remainder dropped.
std::vector<VideoClip> segment_nonoverlapping(std::span<const Frame> video,
                                              std::size_t seg_len = 16);

// Mean absolute difference between the tail of `prev` (frames r+1..T_c) and
// the head of `next` (frames 1..T_c-r). Zero-overlap strides are rejected.
double overlap_mismatch(const VideoClip& prev, const VideoClip& next, std::size_t r);

}  // namespace rg::video
