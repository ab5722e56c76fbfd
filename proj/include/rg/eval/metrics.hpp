#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rg/video/frame.hpp"

// Proxy video metrics: a frozen random feature map, Gaussian fits of its
// outputs, Frechet distances between fits and class-probability scores.
namespace rg::eval {

inline constexpr std::size_t kFeatureDim = 32;
inline constexpr double kCovarianceJitter = 1e-6;
inline constexpr double kPsdTolerance = 1e-8;

// tanh(W^T [frames, diffs] + b) with W, b drawn once from the seed. W has
// N(0, 1/in) entries and b is uniform in [-0.5, 0.5].
class FeatureExtractor {
 public:
  FeatureExtractor(video::FrameShape frame, std::size_t clip_length,
                   std::size_t dim = kFeatureDim, std::uint64_t seed = 0);

  std::size_t dim() const { return static_cast<std::size_t>(weights_.cols()); }
  std::size_t in_dim() const { return static_cast<std::size_t>(weights_.rows()); }
  std::size_t clip_length() const { return clip_length_; }
  const video::FrameShape& frame_shape() const { return frame_; }

  Eigen::VectorXd features(const video::VideoClip& clip) const;
  // One row per clip.
  Eigen::MatrixXd features(std::span<const video::VideoClip> clips) const;

 private:
  video::FrameShape frame_;
  std::size_t clip_length_;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd bias_;
};

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t samples = 0;
};

// Sample mean and (N-1)-normalized covariance of the rows, plus
// kCovarianceJitter on the diagonal. A single row gets a zero covariance
// before the jitter.
GaussianFit fit_gaussian(const Eigen::MatrixXd& rows);

// Throws kNumeric unless cov is symmetric and its eigenvalues are at least
// -kPsdTolerance.
void check_psd(const Eigen::MatrixXd& cov, const char* what);

// Symmetric PSD square root; eigenvalues below zero are clipped.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2)
double frechet_distance(const GaussianFit& a, const GaussianFit& b);

struct SegmentScores {
  std::size_t seg_len = 0;
  std::vector<double> scores;              // one per segment index
  std::vector<std::size_t> group_sizes;    // generated segments per index
  std::vector<bool> pooled_reference;      // index fell back to the pooled fit
  double average = 0.0;
  std::vector<std::size_t> excluded;       // generated videos shorter than seg_len
};

// Splits every generated video into floor(L / seg_len) disjoint segments and
// scores segment index k against the reference. The reference fit for index
// k uses the reference videos' own k-th segments when at least two exist,
// otherwise all reference segments pooled.
SegmentScores segmentwise_scores(std::span<const std::vector<video::Frame>> generated,
                                 std::span<const std::vector<video::Frame>> reference,
                                 const FeatureExtractor& extractor);

struct FvdRatio {
  double first = 0.0;  // score of the first seg_len frames
  double full = 0.0;   // score of the full-length clip
  double ratio = 0.0;
};

FvdRatio fvd_ratio(double first, double full);

struct InceptionScore {
  double score = 0.0;
  double inter_entropy = 0.0;
  double intra_entropy = 0.0;
};

// Rows are class distributions; each must be nonnegative and sum to 1
// within 1e-6.
InceptionScore inception_score(const Eigen::MatrixXd& probs);

}  // namespace rg::eval
