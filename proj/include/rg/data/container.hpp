#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rg/recall/recall.hpp"
#include "rg/video/frame.hpp"

// "RCG1" tensor container: magic, u32 version, u32 dtype tag, u32 ndim,
// u64 dims, row-major little-endian payload.
namespace rg::data {

enum class Dtype : std::uint32_t { kF32 = 1, kF64 = 2 };

inline constexpr std::uint32_t kContainerVersion = 1;

Dtype parse_dtype(const std::string& name);
const char* dtype_name(Dtype d);
std::size_t dtype_size(Dtype d);

struct ContainerData {
  Dtype dtype = Dtype::kF64;
  std::vector<std::uint64_t> dims;
  std::vector<double> values;
};

struct ContainerHeader {
  Dtype dtype = Dtype::kF64;
  std::vector<std::uint64_t> dims;
};

void write_container(std::ostream& out, std::span<const std::uint64_t> dims,
                     std::span<const double> values, Dtype dtype);
ContainerData read_container(std::istream& in);

void write_container_file(const std::string& path, std::span<const std::uint64_t> dims,
                          std::span<const double> values, Dtype dtype);
ContainerData read_container_file(const std::string& path);
ContainerHeader read_container_header(const std::string& path);

// Frames <-> [frames, H, W, C] containers.
void write_video(const std::string& path, std::span<const video::Frame> frames, Dtype dtype);
std::vector<video::Frame> read_video(const std::string& path);

// Appends frames to a container whose leading dimension is patched with the
// final frame count on close().
class StreamingVideoWriter {
 public:
  StreamingVideoWriter(const std::string& path, video::FrameShape shape, Dtype dtype);
  StreamingVideoWriter(const StreamingVideoWriter&) = delete;
  StreamingVideoWriter& operator=(const StreamingVideoWriter&) = delete;
  ~StreamingVideoWriter();

  void append(const video::Frame& frame);
  void close();
  std::uint64_t frames() const { return frames_; }

 private:
  std::string path_;
  video::FrameShape shape_;
  Dtype dtype_;
  std::ofstream out_;
  std::uint64_t frames_ = 0;
  bool open_ = false;
};

class ContainerSink : public recall::FrameSink {
 public:
  explicit ContainerSink(StreamingVideoWriter& writer) : writer_(writer) {}
  void push(const video::Frame& frame) override { writer_.append(frame); }

 private:
  StreamingVideoWriter& writer_;
};

}  // namespace rg::data
