#include "rg/data/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <map>

#include "rg/error.hpp"

namespace rg::data {
namespace {

constexpr std::array<char, 4> kMagic{'R', 'C', 'G', 'C'};

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<std::size_t>(in.gcount()) == sizeof(T), ErrorKind::kIo,
          "checkpoint truncated");
  return v;
}

void put_tensor(std::ostream& out, const std::string& name, const num::Tensor& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  std::vector<std::uint64_t> dims(t.shape().begin(), t.shape().end());
  write_container(out, dims, t.data(), Dtype::kF64);
}

struct Named {
  std::string name;
  const num::Tensor* tensor;
};

struct OptimizerRef {
  const char* name;
  const num::AdamState* state;
};

std::vector<Named> list_tensors(const encgan::ModelBundle& b) {
  std::vector<Named> out;
  for (const num::Mlp* net : b.all_networks()) {
    for (const auto& p : net->params()) out.push_back({p.name, &p.value});
  }
  const std::array<OptimizerRef, 3> opts{{{"opt_disc", &b.opt_disc},
                                          {"opt_enc", &b.opt_enc},
                                          {"opt_gen", &b.opt_gen}}};
  for (const auto& o : opts) {
    for (std::size_t i = 0; i < o.state->m.size(); ++i) {
      out.push_back({std::string(o.name) + ".m." + std::to_string(i), &o.state->m[i]});
      out.push_back({std::string(o.name) + ".v." + std::to_string(i), &o.state->v[i]});
    }
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const RunConfig& config,
                     const encgan::ModelBundle& bundle) {
  require(config.model_config().clip_length == bundle.config.clip_length &&
              config.model_config().frame == bundle.config.frame,
          ErrorKind::kConfig, "checkpoint config does not describe the bundle");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot open checkpoint '" + path + "' for writing");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string json = config_to_json(config);
  put<std::uint64_t>(out, json.size());
  out.write(json.data(), static_cast<std::streamsize>(json.size()));
  put<std::uint64_t>(out, bundle.steps);
  put<std::uint64_t>(out, bundle.opt_disc.step);
  put<std::uint64_t>(out, bundle.opt_enc.step);
  put<std::uint64_t>(out, bundle.opt_gen.step);
  const auto tensors = list_tensors(bundle);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const Named& t : tensors) put_tensor(out, t.name, *t.tensor);
  require(out.good(), ErrorKind::kIo, "checkpoint write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path, const std::optional<RunConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open checkpoint '" + path + "'");
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  require(in.gcount() == 4 && magic == kMagic, ErrorKind::kIo, "'" + path + "' is not a checkpoint");
  const auto version = get<std::uint32_t>(in);
  require(version == kCheckpointVersion, ErrorKind::kIo,
          "unsupported checkpoint version " + std::to_string(version));
  const auto json_len = get<std::uint64_t>(in);
  require(json_len < (1u << 20), ErrorKind::kIo, "implausible checkpoint config length");
  std::string json(json_len, '\0');
  in.read(json.data(), static_cast<std::streamsize>(json_len));
  require(static_cast<std::uint64_t>(in.gcount()) == json_len, ErrorKind::kIo,
          "checkpoint truncated");

  Checkpoint ck{config_from_json(json), {}};
  if (expected.has_value()) {
    require(expected->same_model(ck.config), ErrorKind::kConfig,
            "checkpoint '" + path + "' was written for a different model configuration");
  }
  ck.bundle = encgan::make_bundle(ck.config.model_config(), 0);
  encgan::ModelBundle& b = ck.bundle;
  b.steps = get<std::uint64_t>(in);
  b.opt_disc.step = get<std::uint64_t>(in);
  b.opt_enc.step = get<std::uint64_t>(in);
  b.opt_gen.step = get<std::uint64_t>(in);

  std::map<std::string, num::Tensor> stored;
  const auto count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(in);
    require(name_len < 4096, ErrorKind::kIo, "implausible tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    ContainerData d = read_container(in);
    require(d.dtype == Dtype::kF64, ErrorKind::kIo, "checkpoint tensors must be f64");
    num::Shape shape(d.dims.begin(), d.dims.end());
    require(stored.emplace(name, num::Tensor(shape, std::move(d.values))).second, ErrorKind::kIo,
            "duplicate tensor '" + name + "' in checkpoint");
  }
  in.peek();
  require(in.eof(), ErrorKind::kIo, "trailing bytes in checkpoint '" + path + "'");

  auto take = [&](const std::string& name, num::Tensor& into) {
    auto it = stored.find(name);
    require(it != stored.end(), ErrorKind::kIo, "checkpoint is missing tensor '" + name + "'");
    require(it->second.shape() == into.shape(), ErrorKind::kDimensionMismatch,
            "checkpoint tensor '" + name + "' has shape " + num::shape_str(it->second.shape()) +
                ", expected " + num::shape_str(into.shape()));
    into = std::move(it->second);
    stored.erase(it);
  };
  for (num::Mlp* net : b.all_networks()) {
    for (auto& p : net->params()) take(p.name, p.value);
  }
  const std::array<std::pair<const char*, num::AdamState*>, 3> opts{
      {{"opt_disc", &b.opt_disc}, {"opt_enc", &b.opt_enc}, {"opt_gen", &b.opt_gen}}};
  for (auto& [name, state] : opts) {
    for (std::size_t i = 0; i < state->m.size(); ++i) {
      take(std::string(name) + ".m." + std::to_string(i), state->m[i]);
      take(std::string(name) + ".v." + std::to_string(i), state->v[i]);
    }
  }
  require(stored.empty(), ErrorKind::kIo,
          "checkpoint holds unexpected tensor '" + (stored.empty() ? "" : stored.begin()->first) + "'");
  return ck;
}

}  // namespace rg::data
