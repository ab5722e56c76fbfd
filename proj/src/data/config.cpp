#include "rg/data/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rg/error.hpp"

namespace rg::data {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("config field '") + key + "': " + e.what());
  }
}

std::size_t count_field(const json& j, const char* key) {
  const json& v = j.at(key);
  require(v.is_number_integer() && v.get<long long>() >= 0, ErrorKind::kConfig,
          std::string("config field '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

json to_json_object(const RunConfig& c) {
  json j;
  j["t_c"] = c.t_c;
  j["r"] = c.r;
  j["height"] = c.height;
  j["width"] = c.width;
  j["channels"] = c.channels;
  j["content_dim"] = c.content_dim;
  j["motion_dim"] = c.motion_dim;
  j["hidden"] = c.hidden;
  j["lr"] = c.lr;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  j["batch"] = c.batch;
  j["seed"] = c.seed;
  j["steps"] = c.steps;
  j["ovi"] = c.ovi;
  j["mgv"] = c.mgv;
  j["loss_variant"] = loss_variant_name(c.loss_variant);
  j["sampling"] = sampling_name(c.sampling);
  j["uniform_fraction"] = c.uniform_fraction;
  j["sample_step"] = c.sample_step;
  j["gen_mode"] = recall::chain_mode_name(c.gen_mode);
  j["content_stream"] = c.content_stream;
  j["motion_stream"] = c.motion_stream;
  j["fusion"] = c.fusion;
  j["dtype"] = dtype_name(c.dtype);
  return j;
}

RunConfig from_json_object(const json& j) {
  const json defaults = to_json_object(RunConfig{});
  for (const auto& [key, value] : j.items()) {
    require(defaults.contains(key), ErrorKind::kConfig, "unknown config key '" + key + "'");
  }
  json merged = defaults;
  for (const auto& [key, value] : j.items()) merged[key] = value;
  if (!j.contains("r")) merged["r"] = count_field(merged, "t_c") / 2;

  RunConfig c;
  c.t_c = count_field(merged, "t_c");
  c.r = count_field(merged, "r");
  c.height = count_field(merged, "height");
  c.width = count_field(merged, "width");
  c.channels = count_field(merged, "channels");
  c.content_dim = count_field(merged, "content_dim");
  c.motion_dim = count_field(merged, "motion_dim");
  c.hidden = count_field(merged, "hidden");
  c.lr = field<double>(merged, "lr");
  c.beta1 = field<double>(merged, "beta1");
  c.beta2 = field<double>(merged, "beta2");
  c.eps = field<double>(merged, "eps");
  c.batch = count_field(merged, "batch");
  c.seed = field<std::uint64_t>(merged, "seed");
  c.steps = count_field(merged, "steps");
  c.ovi = field<bool>(merged, "ovi");
  c.mgv = field<bool>(merged, "mgv");
  c.loss_variant = parse_loss_variant(field<std::string>(merged, "loss_variant"));
  c.sampling = parse_sampling(field<std::string>(merged, "sampling"));
  c.uniform_fraction = field<double>(merged, "uniform_fraction");
  c.sample_step = count_field(merged, "sample_step");
  try {
    c.gen_mode = recall::parse_chain_mode(field<std::string>(merged, "gen_mode"));
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, e.what());
  }
  c.content_stream = field<bool>(merged, "content_stream");
  c.motion_stream = field<bool>(merged, "motion_stream");
  c.fusion = field<bool>(merged, "fusion");
  c.dtype = parse_dtype(field<std::string>(merged, "dtype"));
  c.validate();
  return c;
}

json parse_object(const std::string& text, const std::string& what) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, what + " is not valid JSON: " + e.what());
  }
  require(j.is_object(), ErrorKind::kConfig, what + " must be a JSON object");
  return j;
}

}  // namespace

void RunConfig::validate() const {
  require(t_c >= 2, ErrorKind::kConfig, "t_c must be >= 2");
  require(r >= 1 && r < t_c, ErrorKind::kConfig,
          "r must satisfy 1 <= r < t_c (got r=" + std::to_string(r) + ", t_c=" +
              std::to_string(t_c) + ")");
  require(height > 0 && width > 0 && channels > 0, ErrorKind::kConfig,
          "frame dimensions must be positive");
  require(content_dim > 0 && motion_dim > 0 && hidden > 0, ErrorKind::kConfig,
          "latent and hidden dimensions must be positive");
  require(batch > 0, ErrorKind::kConfig, "batch must be positive");
  require(uniform_fraction >= 0.0 && uniform_fraction <= 1.0, ErrorKind::kConfig,
          "uniform_fraction must lie in [0, 1]");
  require(sample_step >= 1, ErrorKind::kConfig, "sample_step must be >= 1");
  model_config().validate();
}

encgan::ModelConfig RunConfig::model_config() const {
  encgan::ModelConfig m;
  m.clip_length = t_c;
  m.frame = {height, width, channels};
  m.content_dim = content_dim;
  m.motion_dim = motion_dim;
  m.hidden = hidden;
  m.content_stream = content_stream;
  m.motion_stream = motion_stream;
  m.fusion = fusion;
  m.adam = {lr, beta1, beta2, eps};
  return m;
}

bool RunConfig::same_model(const RunConfig& o) const {
  return t_c == o.t_c && height == o.height && width == o.width && channels == o.channels &&
         content_dim == o.content_dim && motion_dim == o.motion_dim && hidden == o.hidden &&
         content_stream == o.content_stream && motion_stream == o.motion_stream &&
         fusion == o.fusion;
}

const char* sampling_name(Sampling s) {
  switch (s) {
    case Sampling::kSchedule:
      return "schedule";
    case Sampling::kUniform:
      return "uniform";
    case Sampling::kStep:
      return "step";
  }
  return "unknown";
}

Sampling parse_sampling(const std::string& name) {
  if (name == "schedule") return Sampling::kSchedule;
  if (name == "uniform") return Sampling::kUniform;
  if (name == "step") return Sampling::kStep;
  fail(ErrorKind::kConfig, "unknown sampling strategy '" + name + "'");
}

const char* loss_variant_name(encgan::EncoderLoss v) {
  return v == encgan::EncoderLoss::kFrames ? "frames" : "diffs";
}

encgan::EncoderLoss parse_loss_variant(const std::string& name) {
  if (name == "frames") return encgan::EncoderLoss::kFrames;
  if (name == "diffs") return encgan::EncoderLoss::kDiffs;
  fail(ErrorKind::kConfig, "unknown loss variant '" + name + "'");
}

std::string config_to_json(const RunConfig& config) { return to_json_object(config).dump(2); }

RunConfig config_from_json(const std::string& text, const Overrides& overrides) {
  json j = parse_object(text, "config");
  for (const auto& [key, value] : overrides) {
    json v;
    try {
      v = json::parse(value);
    } catch (const json::exception&) {
      v = value;
    }
    j[key] = v;
  }
  return from_json_object(j);
}

RunConfig load_config_file(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), overrides);
}

}  // namespace rg::data
