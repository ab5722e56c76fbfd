#include "rg/data/container.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "rg/error.hpp"

namespace rg::data {
namespace {

constexpr std::array<char, 4> kMagic{'R', 'C', 'G', '1'};
// Offset of dims[0] within a container header.
constexpr std::streamoff kFirstDimOffset = 4 + 4 + 4 + 4;

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

template <typename T>
void put(std::ostream& out, T v) {
  const T le = to_little(v);
  out.write(reinterpret_cast<const char*>(&le), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<std::size_t>(in.gcount()) == sizeof(T), ErrorKind::kIo,
          std::string("container truncated while reading ") + what);
  return to_little(v);
}

void put_value(std::ostream& out, double v, Dtype dtype) {
  if (dtype == Dtype::kF32) {
    put(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  } else {
    put(out, std::bit_cast<std::uint64_t>(v));
  }
}

void write_header(std::ostream& out, std::span<const std::uint64_t> dims, Dtype dtype) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kContainerVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dtype));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (std::uint64_t d : dims) put<std::uint64_t>(out, d);
}

ContainerHeader read_header(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  require(in.gcount() == 4 && magic == kMagic, ErrorKind::kIo, "not an RCG1 container");
  const auto version = get<std::uint32_t>(in, "version");
  require(version == kContainerVersion, ErrorKind::kIo,
          "unsupported container version " + std::to_string(version));
  const auto tag = get<std::uint32_t>(in, "dtype");
  require(tag == 1 || tag == 2, ErrorKind::kIo, "unknown dtype tag " + std::to_string(tag));
  const auto ndim = get<std::uint32_t>(in, "ndim");
  require(ndim <= 16, ErrorKind::kIo, "implausible container rank " + std::to_string(ndim));
  ContainerHeader h;
  h.dtype = static_cast<Dtype>(tag);
  for (std::uint32_t i = 0; i < ndim; ++i) h.dims.push_back(get<std::uint64_t>(in, "dims"));
  return h;
}

std::uint64_t product(std::span<const std::uint64_t> dims) {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) n *= d;
  return n;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

Dtype parse_dtype(const std::string& name) {
  if (name == "f32") return Dtype::kF32;
  if (name == "f64") return Dtype::kF64;
  fail(ErrorKind::kConfig, "unknown dtype '" + name + "' (expected f32 or f64)");
}

const char* dtype_name(Dtype d) { return d == Dtype::kF32 ? "f32" : "f64"; }

std::size_t dtype_size(Dtype d) { return d == Dtype::kF32 ? 4 : 8; }

void write_container(std::ostream& out, std::span<const std::uint64_t> dims,
                     std::span<const double> values, Dtype dtype) {
  require(product(dims) == values.size(), ErrorKind::kDimensionMismatch,
          "container payload length does not match its dims");
  write_header(out, dims, dtype);
  for (double v : values) put_value(out, v, dtype);
  require(out.good(), ErrorKind::kIo, "container write failed");
}

ContainerData read_container(std::istream& in) {
  ContainerHeader h = read_header(in);
  ContainerData d{h.dtype, h.dims, {}};
  const std::uint64_t n = product(h.dims);
  d.values.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    d.values[i] = h.dtype == Dtype::kF32
                      ? static_cast<double>(std::bit_cast<float>(get<std::uint32_t>(in, "payload")))
                      : std::bit_cast<double>(get<std::uint64_t>(in, "payload"));
  }
  return d;
}

void write_container_file(const std::string& path, std::span<const std::uint64_t> dims,
                          std::span<const double> values, Dtype dtype) {
  std::ofstream out = open_out(path);
  write_container(out, dims, values, dtype);
}

ContainerData read_container_file(const std::string& path) {
  std::ifstream in = open_in(path);
  ContainerData d = read_container(in);
  in.peek();
  require(in.eof(), ErrorKind::kIo, "trailing bytes after container payload in '" + path + "'");
  return d;
}

ContainerHeader read_container_header(const std::string& path) {
  std::ifstream in = open_in(path);
  return read_header(in);
}

void write_video(const std::string& path, std::span<const video::Frame> frames, Dtype dtype) {
  require(!frames.empty(), ErrorKind::kInvalidArgument, "cannot write an empty video");
  video::check_homogeneous(frames, "write_video");
  const video::FrameShape& s = frames[0].shape();
  const std::array<std::uint64_t, 4> dims{frames.size(), s.height, s.width, s.channels};
  write_container_file(path, dims, video::flatten(frames), dtype);
}

std::vector<video::Frame> read_video(const std::string& path) {
  ContainerData d = read_container_file(path);
  require(d.dims.size() == 4, ErrorKind::kDimensionMismatch,
          "video container '" + path + "' must be 4-D [frames,H,W,C]");
  for (std::uint64_t v : d.dims) {
    require(v > 0, ErrorKind::kDimensionMismatch, "video container has a zero dimension");
  }
  const video::FrameShape s{d.dims[1], d.dims[2], d.dims[3]};
  return video::unflatten(d.values, s, d.dims[0]);
}

StreamingVideoWriter::StreamingVideoWriter(const std::string& path, video::FrameShape shape,
                                           Dtype dtype)
    : path_(path), shape_(shape), dtype_(dtype), out_(open_out(path)), open_(true) {
  const std::array<std::uint64_t, 4> dims{0, shape.height, shape.width, shape.channels};
  write_header(out_, dims, dtype);
}

StreamingVideoWriter::~StreamingVideoWriter() {
  try {
    close();
  } catch (...) {
  }
}

void StreamingVideoWriter::append(const video::Frame& frame) {
  require(open_, ErrorKind::kIo, "append to a closed container");
  require(frame.shape() == shape_, ErrorKind::kDimensionMismatch,
          "streamed frame does not match container frame shape");
  for (double v : frame.pixels()) put_value(out_, v, dtype_);
  frames_ += 1;
}

void StreamingVideoWriter::close() {
  if (!open_) return;
  open_ = false;
  out_.seekp(kFirstDimOffset);
  put<std::uint64_t>(out_, frames_);
  out_.close();
  require(!out_.fail(), ErrorKind::kIo, "failed to finalize container '" + path_ + "'");
}

}  // namespace rg::data
