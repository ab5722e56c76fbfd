#pragma once

#include <optional>
#include <string>

#include "rg/data/config.hpp"
#include "rg/encgan/model.hpp"

// "RCGC" checkpoint: magic, u32 version, u64 config JSON length + JSON,
// u64 bundle step count, per optimizer (disc, enc, gen) a u64 step count,
// u32 tensor count, then per tensor a u32 name length, the name and an
// embedded f64 RCG1 container.
namespace rg::data {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  RunConfig config;
  encgan::ModelBundle bundle;
};

void save_checkpoint(const std::string& path, const RunConfig& config,
                     const encgan::ModelBundle& bundle);

// Loading with an `expected` config whose architecture differs from the
// embedded one fails with kConfig.
Checkpoint load_checkpoint(const std::string& path,
                           const std::optional<RunConfig>& expected = std::nullopt);

}  // namespace rg::data
