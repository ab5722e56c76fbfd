#include "rg/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rg/error.hpp"
#include "rg/numerics/random.hpp"
#include "rg/video/algebra.hpp"

namespace rg::eval {

FeatureExtractor::FeatureExtractor(video::FrameShape frame, std::size_t clip_length,
                                   std::size_t dim, std::uint64_t seed)
    : frame_(frame), clip_length_(clip_length) {
  require(frame.pixels() > 0, ErrorKind::kInvalidArgument, "feature extractor needs a nonempty frame");
  require(clip_length >= 2, ErrorKind::kInvalidArgument, "feature extractor clips need >= 2 frames");
  require(dim >= 1, ErrorKind::kInvalidArgument, "feature dimension must be positive");
  const std::size_t in = (2 * clip_length - 1) * frame.pixels();
  num::Stream root = num::Stream(seed).split("features");
  num::Stream w = root.split("w");
  num::Stream b = root.split("b");
  const double sd = 1.0 / std::sqrt(static_cast<double>(in));
  weights_.resize(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights_.cols(); ++j) weights_(i, j) = sd * w.normal();
  }
  bias_.resize(static_cast<Eigen::Index>(dim));
  for (Eigen::Index j = 0; j < bias_.size(); ++j) bias_(j) = b.uniform() - 0.5;
}

Eigen::VectorXd FeatureExtractor::features(const video::VideoClip& clip) const {
  require(clip.length() == clip_length_ && clip.frame_shape() == frame_,
          ErrorKind::kDimensionMismatch,
          "feature extractor expects " + std::to_string(clip_length_) + "-frame clips of " +
              std::to_string(frame_.height) + "x" + std::to_string(frame_.width) + "x" +
              std::to_string(frame_.channels));
  const std::size_t p = frame_.pixels();
  Eigen::VectorXd x(weights_.rows());
  Eigen::Index k = 0;
  for (const video::Frame& f : clip.frames()) {
    for (std::size_t i = 0; i < p; ++i) x(k++) = f[i];
  }
  for (std::size_t t = 0; t + 1 < clip.length(); ++t) {
    for (std::size_t i = 0; i < p; ++i) x(k++) = clip[t + 1][i] - clip[t][i];
  }
  Eigen::VectorXd out = weights_.transpose() * x + bias_;
  return out.array().tanh().matrix();
}

Eigen::MatrixXd FeatureExtractor::features(std::span<const video::VideoClip> clips) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(clips.size()), weights_.cols());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = features(clips[i]).transpose();
  }
  return out;
}

GaussianFit fit_gaussian(const Eigen::MatrixXd& rows) {
  require(rows.rows() >= 1 && rows.cols() >= 1, ErrorKind::kInvalidArgument,
          "Gaussian fit needs at least one sample");
  GaussianFit fit;
  fit.samples = static_cast<std::size_t>(rows.rows());
  fit.mean = rows.colwise().mean().transpose();
  const Eigen::Index d = rows.cols();
  fit.cov = Eigen::MatrixXd::Zero(d, d);
  if (rows.rows() > 1) {
    const Eigen::MatrixXd centered = rows.rowwise() - fit.mean.transpose();
    fit.cov = centered.transpose() * centered / static_cast<double>(rows.rows() - 1);
    fit.cov = 0.5 * (fit.cov + fit.cov.transpose());
  }
  fit.cov.diagonal().array() += kCovarianceJitter;
  return fit;
}

void check_psd(const Eigen::MatrixXd& cov, const char* what) {
  require(cov.rows() == cov.cols(), ErrorKind::kDimensionMismatch,
          std::string(what) + " covariance is not square");
  require(cov.allFinite(), ErrorKind::kNumeric, std::string(what) + " covariance is not finite");
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  require(asym <= kPsdTolerance * std::max(1.0, cov.cwiseAbs().maxCoeff()), ErrorKind::kNumeric,
          std::string(what) + " covariance is not symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::kNumeric,
          std::string(what) + " covariance eigendecomposition failed");
  require(es.eigenvalues().minCoeff() >= -kPsdTolerance, ErrorKind::kNumeric,
          std::string(what) + " covariance is not positive semidefinite (min eigenvalue " +
              std::to_string(es.eigenvalues().minCoeff()) + ")");
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  require(es.info() == Eigen::Success, ErrorKind::kNumeric, "eigendecomposition failed");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  require(a.mean.size() == b.mean.size() && a.cov.rows() == a.mean.size() &&
              b.cov.rows() == b.mean.size(),
          ErrorKind::kDimensionMismatch,
          "Frechet distance between fits of dimension " + std::to_string(a.mean.size()) +
              " and " + std::to_string(b.mean.size()));
  check_psd(a.cov, "first");
  check_psd(b.cov, "second");
  const Eigen::MatrixXd ra = psd_sqrt(a.cov);
  Eigen::MatrixXd inner = ra * b.cov * ra;
  inner = 0.5 * (inner + inner.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorKind::kNumeric, "eigendecomposition failed");
  const double cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * cross;
  require(std::isfinite(d), ErrorKind::kNumeric, "Frechet distance is not finite");
  return std::max(d, 0.0);
}

SegmentScores segmentwise_scores(std::span<const std::vector<video::Frame>> generated,
                                 std::span<const std::vector<video::Frame>> reference,
                                 const FeatureExtractor& extractor) {
  const std::size_t seg = extractor.clip_length();
  SegmentScores out;
  out.seg_len = seg;

  // Reference segments grouped by index, plus the pooled set.
  std::vector<std::vector<video::VideoClip>> ref_groups;
  std::vector<video::VideoClip> ref_all;
  for (const auto& v : reference) {
    const auto segs = video::segment_nonoverlapping(v, seg);
    for (std::size_t k = 0; k < segs.size(); ++k) {
      if (ref_groups.size() <= k) ref_groups.resize(k + 1);
      ref_groups[k].push_back(segs[k]);
      ref_all.push_back(segs[k]);
    }
  }
  require(!ref_all.empty(), ErrorKind::kInvalidArgument,
          "reference set has no video of at least " + std::to_string(seg) + " frames");

  std::vector<std::vector<video::VideoClip>> gen_groups;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    if (generated[i].size() < seg) {
      out.excluded.push_back(i);
      continue;
    }
    const auto segs = video::segment_nonoverlapping(generated[i], seg);
    for (std::size_t k = 0; k < segs.size(); ++k) {
      if (gen_groups.size() <= k) gen_groups.resize(k + 1);
      gen_groups[k].push_back(segs[k]);
    }
  }
  require(!gen_groups.empty(), ErrorKind::kInvalidArgument,
          "no generated video has at least " + std::to_string(seg) + " frames");

  const GaussianFit pooled = fit_gaussian(extractor.features(ref_all));
  double total = 0.0;
  for (std::size_t k = 0; k < gen_groups.size(); ++k) {
    const GaussianFit g = fit_gaussian(extractor.features(gen_groups[k]));
    const bool own = k < ref_groups.size() && ref_groups[k].size() >= 2;
    const double s =
        own ? frechet_distance(g, fit_gaussian(extractor.features(ref_groups[k])))
            : frechet_distance(g, pooled);
    out.scores.push_back(s);
    out.group_sizes.push_back(gen_groups[k].size());
    out.pooled_reference.push_back(!own);
    total += s;
  }
  out.average = total / static_cast<double>(out.scores.size());
  return out;
}

FvdRatio fvd_ratio(double first, double full) {
  require(std::isfinite(first) && std::isfinite(full), ErrorKind::kNumeric,
          "FVD ratio inputs must be finite");
  require(first > 0.0, ErrorKind::kInvalidArgument, "first-segment score must be positive");
  require(full > 0.0, ErrorKind::kNumeric, "FVD ratio has a zero denominator");
  return {first, full, first / full};
}

InceptionScore inception_score(const Eigen::MatrixXd& probs) {
  require(probs.rows() >= 1 && probs.cols() >= 1, ErrorKind::kInvalidArgument,
          "inception score needs at least one distribution");
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const auto row = probs.row(i);
    require(row.allFinite() && row.minCoeff() >= 0.0 && std::abs(row.sum() - 1.0) <= 1e-6,
            ErrorKind::kInvalidArgument,
            "row " + std::to_string(i) + " is not a probability distribution");
  }
  auto plogp = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
  const Eigen::VectorXd marginal = probs.colwise().mean().transpose();
  const double n = static_cast<double>(probs.rows());

  InceptionScore out;
  double kl = 0.0;
  double intra = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      const double p = probs(i, c);
      if (p > 0.0) kl += p * (std::log(p) - std::log(marginal(c)));
      intra -= plogp(p);
    }
  }
  for (Eigen::Index c = 0; c < marginal.size(); ++c) out.inter_entropy -= plogp(marginal(c));
  out.intra_entropy = intra / n;
  out.score = std::exp(kl / n);
  return out;
}

}  // namespace rg::eval
