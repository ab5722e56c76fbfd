#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rg/data/config.hpp"
#include "rg/data/datasets.hpp"
#include "rg/eval/report.hpp"

// Recall ablations: OVI-only / MGV-only / full recall over a set of video
// lengths, and a sweep over the number of overlapping frames.
namespace rg::data {

struct AblationOptions {
  RunConfig base;
  std::vector<std::size_t> lengths{10, 16, 32, 64, 96, 100, 128, 136};
  // T_c - r values; 0 trains and chains with stride t_c.
  std::vector<std::size_t> overlaps{0, 2, 4, 8};
  std::size_t chains = 8;
  recall::ChainMode mode = recall::ChainMode::kSeeded;
  // Chains always get at least this many clips so short lengths still have
  // a seam to measure.
  std::size_t min_clips = 2;
};

struct AblationCell {
  std::string row;        // variant name
  std::size_t length = 0;
  double mismatch = 0.0;  // NaN when the stride leaves no shared frames
  double fvd = 0.0;       // NaN when the length is below one segment
};

struct AblationResult {
  std::vector<std::string> variants;   // OVI, MGV, Recall
  std::vector<std::size_t> overlaps;
  std::vector<AblationCell> variant_cells;
  std::vector<AblationCell> overlap_cells;

  const AblationCell& variant(const std::string& name, std::size_t length) const;
  const AblationCell& overlap(std::size_t overlap, std::size_t length) const;
};

using AblationProgress = std::function<void(const std::string&)>;

// Trains one bundle per variant and per extra overlap from `base` on
// `videos`, then scores chained generations against `videos`.
AblationResult run_ablation(const AblationOptions& options, std::span<const LabeledVideo> videos,
                            const AblationProgress& progress = {});

// Plain-text tables, one row per length.
void write_ablation_text(std::ostream& out, const AblationOptions& options,
                         const AblationResult& result);
// Entries "ablation.<variant>.<mismatch|fvd>.len<L>" and
// "overlap.<k>.<mismatch|fvd>.len<L>"; NaN cells are omitted.
eval::Report ablation_report(const AblationResult& result);

}  // namespace rg::data
