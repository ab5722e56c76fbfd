#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rg/data/datasets.hpp"
#include "rg/numerics/mlp.hpp"
#include "rg/numerics/random.hpp"
#include "rg/video/frame.hpp"

namespace rg::eval {

// Per difference map: the first moments along x and y (coordinates scaled to
// [-1, 1]) and the mean absolute change. 3 * (T - 1) values.
std::vector<double> motion_features(const video::VideoClip& clip);

struct ProbeOptions {
  std::size_t hidden = 16;
  std::size_t epochs = 300;
  double lr = 1e-2;
};

// Dense softmax classifier over standardized motion features.
class ProbeClassifier {
 public:
  ProbeClassifier() = default;
  ProbeClassifier(num::Mlp net, std::size_t clip_length, Eigen::VectorXd feature_mean,
                  Eigen::VectorXd feature_scale);

  std::size_t classes() const { return net_.out_dim(); }
  std::size_t clip_length() const { return clip_length_; }
  const num::Mlp& net() const { return net_; }

  // One probability row per clip.
  Eigen::MatrixXd probabilities(std::span<const video::VideoClip> clips) const;
  std::vector<int> predict(std::span<const video::VideoClip> clips) const;
  double accuracy(std::span<const video::VideoClip> clips, std::span<const int> labels) const;

 private:
  Eigen::MatrixXd standardized(std::span<const video::VideoClip> clips) const;

  num::Mlp net_;
  std::size_t clip_length_ = 0;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
};

// Full-batch Adam on softmax cross-entropy. Labels are 0..K-1 with K the
// largest label plus one; at least two distinct labels are required.
ProbeClassifier train_probe(std::span<const video::VideoClip> clips, std::span<const int> labels,
                            num::Stream rng, const ProbeOptions& options = {});

struct LabeledClips {
  std::vector<video::VideoClip> clips;
  std::vector<int> labels;
};

// The first `clip_length` frames of every labeled video.
LabeledClips leading_clips(std::span<const data::LabeledVideo> videos, std::size_t clip_length);

}  // namespace rg::eval
