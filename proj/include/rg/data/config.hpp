#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rg/data/container.hpp"
#include "rg/encgan/encgan3.hpp"
#include "rg/recall/recall.hpp"

namespace rg::data {

enum class Sampling { kSchedule, kUniform, kStep };

struct RunConfig {
  std::size_t t_c = 16;
  std::size_t r = 8;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t channels = 1;
  std::size_t content_dim = 64;
  std::size_t motion_dim = 10;
  std::size_t hidden = 64;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch = 8;
  std::uint64_t seed = 0;
  std::size_t steps = 2000;
  // Recall ablation switches: overlapping training pairs, merged-clip
  // discriminator.
  bool ovi = true;
  bool mgv = true;
  encgan::EncoderLoss loss_variant = encgan::EncoderLoss::kFrames;
  // kSchedule trains on uniformly sampled clips for the first
  // uniform_fraction of steps and on step-sampled clips afterwards.
  Sampling sampling = Sampling::kSchedule;
  double uniform_fraction = 0.1;
  std::size_t sample_step = 2;
  recall::ChainMode gen_mode = recall::ChainMode::kMean;
  bool content_stream = true;
  bool motion_stream = true;
  bool fusion = true;
  Dtype dtype = Dtype::kF64;

  void validate() const;
  encgan::ModelConfig model_config() const;
  // True when both configs describe the same network architecture.
  bool same_model(const RunConfig& other) const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

const char* sampling_name(Sampling s);
Sampling parse_sampling(const std::string& name);
const char* loss_variant_name(encgan::EncoderLoss v);
encgan::EncoderLoss parse_loss_variant(const std::string& name);

using Overrides = std::vector<std::pair<std::string, std::string>>;

// JSON text with every field; keys are the field names above.
std::string config_to_json(const RunConfig& config);
// Starts from the defaults, applies the JSON object `text` (may be empty),
// then each override (values in JSON syntax, or bare strings). Unknown keys
// are rejected; r defaults to t_c / 2 when neither source sets it.
RunConfig config_from_json(const std::string& text, const Overrides& overrides = {});
RunConfig load_config_file(const std::string& path, const Overrides& overrides = {});

}  // namespace rg::data
