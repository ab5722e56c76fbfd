#include "rg/data/ablation.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "rg/data/pipeline.hpp"
#include "rg/error.hpp"
#include "rg/eval/metrics.hpp"

namespace rg::data {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Variant {
  const char* name;
  bool ovi;
  bool mgv;
};

constexpr Variant kVariants[] = {{"OVI", true, false}, {"MGV", false, true}, {"Recall", true, true}};

encgan::ModelBundle train_variant(const RunConfig& config, std::span<const LabeledVideo> videos) {
  encgan::ModelBundle bundle = encgan::make_bundle(config.model_config(), config.seed);
  train_recall(config, recall_pairs(config, videos), bundle);
  return bundle;
}

std::string cell(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

const AblationCell& AblationResult::variant(const std::string& name, std::size_t length) const {
  for (const auto& c : variant_cells) {
    if (c.row == name && c.length == length) return c;
  }
  fail(ErrorKind::kInvalidArgument, "no ablation cell for " + name + " at length " + std::to_string(length));
}

const AblationCell& AblationResult::overlap(std::size_t overlap, std::size_t length) const {
  const std::string row = std::to_string(overlap);
  for (const auto& c : overlap_cells) {
    if (c.row == row && c.length == length) return c;
  }
  fail(ErrorKind::kInvalidArgument,
       "no overlap cell for " + row + " at length " + std::to_string(length));
}

AblationResult run_ablation(const AblationOptions& options, std::span<const LabeledVideo> videos,
                            const AblationProgress& progress) {
  const RunConfig& base = options.base;
  const std::size_t t = base.t_c;
  require(options.chains >= 1, ErrorKind::kInvalidArgument, "ablation needs at least one chain");
  require(!options.lengths.empty(), ErrorKind::kInvalidArgument, "ablation needs video lengths");
  for (std::size_t ov : options.overlaps) {
    require(ov < t, ErrorKind::kInvalidArgument,
            "overlap " + std::to_string(ov) + " must be below t_c=" + std::to_string(t));
  }
  auto note = [&](const std::string& s) {
    if (progress) progress(s);
  };

  std::vector<std::vector<video::Frame>> reference;
  for (const auto& v : videos) reference.push_back(v.frames);
  const eval::FeatureExtractor fx(base.model_config().frame, t, eval::kFeatureDim, base.seed);
  const num::Stream root = num::Stream(base.seed).split("ablate");

  auto evaluate = [&](const encgan::ModelBundle& bundle, std::size_t stride, const std::string& row,
                      std::vector<AblationCell>& out) {
    for (std::size_t length : options.lengths) {
      recall::ChainOptions o;
      o.stride = stride;
      o.mode = options.mode;
      std::vector<std::vector<video::Frame>> generated;
      double mismatch = 0.0;
      for (std::size_t k = 0; k < options.chains; ++k) {
        recall::ChainResult r;
        generated.push_back(generate_long(bundle, o, length,
                                          root.split(static_cast<std::uint64_t>(length))
                                              .split(static_cast<std::uint64_t>(k)),
                                          &r, options.min_clips));
        mismatch += r.mean_mismatch;
      }
      AblationCell c{row, length, kNaN, kNaN};
      if (stride < t) c.mismatch = mismatch / static_cast<double>(options.chains);
      if (length >= t) c.fvd = eval::segmentwise_scores(generated, reference, fx).average;
      out.push_back(c);
    }
  };

  AblationResult result;
  result.overlaps = options.overlaps;
  const encgan::ModelBundle* recall_bundle = nullptr;
  std::vector<encgan::ModelBundle> trained;
  trained.reserve(std::size(kVariants) + options.overlaps.size());
  for (const Variant& v : kVariants) {
    RunConfig c = base;
    c.ovi = v.ovi;
    c.mgv = v.mgv;
    note(std::string("training ") + v.name);
    trained.push_back(train_variant(c, videos));
    evaluate(trained.back(), c.r, v.name, result.variant_cells);
    result.variants.push_back(v.name);
    if (v.ovi && v.mgv) recall_bundle = &trained.back();
  }
  for (std::size_t ov : options.overlaps) {
    const std::size_t stride = t - ov;
    const std::string row = std::to_string(ov);
    if (stride == base.r) {
      evaluate(*recall_bundle, stride, row, result.overlap_cells);
      continue;
    }
    // Zero overlap uses stride t_c, which RunConfig::validate rejects; the
    // pair builder and the chain accept it.
    RunConfig c = base;
    c.ovi = true;
    c.mgv = true;
    c.r = stride;
    note("training overlap " + row);
    trained.push_back(train_variant(c, videos));
    evaluate(trained.back(), stride, row, result.overlap_cells);
  }
  return result;
}

void write_ablation_text(std::ostream& out, const AblationOptions& options,
                         const AblationResult& result) {
  out << "overlap mismatch / segment score by video length (" << options.chains << " "
      << recall::chain_mode_name(options.mode) << " chains)\n";
  out << "length";
  for (const auto& v : result.variants) out << '\t' << v << ".mismatch\t" << v << ".fvd";
  out << '\n';
  for (std::size_t length : options.lengths) {
    out << length;
    for (const auto& v : result.variants) {
      const AblationCell& c = result.variant(v, length);
      out << '\t' << cell(c.mismatch) << '\t' << cell(c.fvd);
    }
    out << '\n';
  }
  out << "\nby overlapping frames (t_c - r)\nlength";
  for (std::size_t ov : result.overlaps) out << "\tov" << ov << ".mismatch\tov" << ov << ".fvd";
  out << '\n';
  for (std::size_t length : options.lengths) {
    out << length;
    for (std::size_t ov : result.overlaps) {
      const AblationCell& c = result.overlap(ov, length);
      out << '\t' << cell(c.mismatch) << '\t' << cell(c.fvd);
    }
    out << '\n';
  }
}

eval::Report ablation_report(const AblationResult& result) {
  eval::Report r;
  auto put = [&](const std::string& prefix, const AblationCell& c) {
    const std::string len = ".len" + std::to_string(c.length);
    if (!std::isnan(c.mismatch)) r.add(prefix + ".mismatch" + len, c.mismatch);
    if (!std::isnan(c.fvd)) r.add(prefix + ".fvd" + len, c.fvd);
  };
  for (const auto& c : result.variant_cells) put("ablation." + c.row, c);
  for (const auto& c : result.overlap_cells) put("overlap." + c.row, c);
  return r;
}

}  // namespace rg::data
