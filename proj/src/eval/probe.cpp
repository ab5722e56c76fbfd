#include "rg/eval/probe.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rg/error.hpp"
#include "rg/numerics/ops.hpp"

namespace rg::eval {

std::vector<double> motion_features(const video::VideoClip& clip) {
  require(clip.length() >= 2, ErrorKind::kInvalidArgument, "motion features need >= 2 frames");
  const video::FrameShape s = clip.frame_shape();
  auto coord = [](std::size_t i, std::size_t n) {
    return n > 1 ? 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0 : 0.0;
  };
  std::vector<double> out;
  out.reserve(3 * (clip.length() - 1));
  for (std::size_t t = 0; t + 1 < clip.length(); ++t) {
    double mx = 0.0, my = 0.0, energy = 0.0;
    for (std::size_t y = 0; y < s.height; ++y) {
      for (std::size_t x = 0; x < s.width; ++x) {
        for (std::size_t c = 0; c < s.channels; ++c) {
          const double v = clip[t + 1].at(y, x, c) - clip[t].at(y, x, c);
          mx += v * coord(x, s.width);
          my += v * coord(y, s.height);
          energy += std::abs(v);
        }
      }
    }
    const double n = static_cast<double>(s.pixels());
    out.push_back(mx / s.channels);
    out.push_back(my / s.channels);
    out.push_back(energy / n);
  }
  return out;
}

namespace {

Eigen::MatrixXd raw_features(std::span<const video::VideoClip> clips, std::size_t clip_length) {
  require(!clips.empty(), ErrorKind::kInvalidArgument, "probe needs at least one clip");
  const std::size_t d = 3 * (clip_length - 1);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(clips.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < clips.size(); ++i) {
    require(clips[i].length() == clip_length, ErrorKind::kDimensionMismatch,
            "probe expects " + std::to_string(clip_length) + "-frame clips, got " +
                std::to_string(clips[i].length()));
    const auto f = motion_features(clips[i]);
    for (std::size_t j = 0; j < d; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
  }
  return out;
}

num::Tensor to_tensor(const Eigen::MatrixXd& m) {
  num::Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      t[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    }
  }
  return t;
}

}  // namespace

ProbeClassifier::ProbeClassifier(num::Mlp net, std::size_t clip_length, Eigen::VectorXd feature_mean,
                                 Eigen::VectorXd feature_scale)
    : net_(std::move(net)),
      clip_length_(clip_length),
      mean_(std::move(feature_mean)),
      scale_(std::move(feature_scale)) {}

Eigen::MatrixXd ProbeClassifier::standardized(std::span<const video::VideoClip> clips) const {
  Eigen::MatrixXd x = raw_features(clips, clip_length_);
  x.rowwise() -= mean_.transpose();
  x.array().rowwise() /= scale_.transpose().array();
  return x;
}

Eigen::MatrixXd ProbeClassifier::probabilities(std::span<const video::VideoClip> clips) const {
  num::Tape tape;
  const auto bound = net_.params().bind_constant(tape);
  const num::Var logits = net_.forward(bound, tape.constant(to_tensor(standardized(clips))));
  const num::Tensor& l = logits.value();
  Eigen::MatrixXd p(static_cast<Eigen::Index>(l.rows()), static_cast<Eigen::Index>(l.cols()));
  for (std::size_t i = 0; i < l.rows(); ++i) {
    double top = l.at(i, 0);
    for (std::size_t c = 1; c < l.cols(); ++c) top = std::max(top, l.at(i, c));
    double z = 0.0;
    for (std::size_t c = 0; c < l.cols(); ++c) z += std::exp(l.at(i, c) - top);
    for (std::size_t c = 0; c < l.cols(); ++c) {
      p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = std::exp(l.at(i, c) - top) / z;
    }
  }
  return p;
}

std::vector<int> ProbeClassifier::predict(std::span<const video::VideoClip> clips) const {
  const Eigen::MatrixXd p = probabilities(clips);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Eigen::Index best = 0;
    p.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double ProbeClassifier::accuracy(std::span<const video::VideoClip> clips,
                                 std::span<const int> labels) const {
  require(clips.size() == labels.size(), ErrorKind::kDimensionMismatch,
          "clip and label counts differ");
  const auto pred = predict(clips);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

ProbeClassifier train_probe(std::span<const video::VideoClip> clips, std::span<const int> labels,
                            num::Stream rng, const ProbeOptions& options) {
  require(clips.size() == labels.size(), ErrorKind::kDimensionMismatch,
          "clip and label counts differ");
  require(!clips.empty(), ErrorKind::kInvalidArgument, "probe needs training clips");
  const std::set<int> distinct(labels.begin(), labels.end());
  require(*distinct.begin() >= 0, ErrorKind::kInvalidArgument, "probe labels must be >= 0");
  require(distinct.size() >= 2, ErrorKind::kInvalidArgument, "probe needs at least 2 classes");
  const auto classes = static_cast<std::size_t>(*distinct.rbegin() + 1);
  const std::size_t clip_length = clips.front().length();

  Eigen::MatrixXd x = raw_features(clips, clip_length);
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  x.rowwise() -= mean.transpose();
  Eigen::VectorXd scale =
      (x.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt().transpose();
  scale = scale.cwiseMax(1e-6);
  x.array().rowwise() /= scale.transpose().array();

  num::Mlp net("probe", {static_cast<std::size_t>(x.cols()), options.hidden, classes},
               num::Activation::kTanh, num::Activation::kIdentity, rng.split("init"));
  const num::Tensor inputs = to_tensor(x);
  std::vector<std::size_t> targets(labels.begin(), labels.end());
  auto params = net.params().pointers();
  num::AdamState adam = num::make_adam_state({options.lr, 0.9, 0.999, 1e-8}, params);
  for (std::size_t e = 0; e < options.epochs; ++e) {
    num::Tape tape;
    const auto bound = net.params().bind(tape);
    const num::Var logits = net.forward(bound, tape.constant(inputs));
    // Cross-entropy: mean over rows of logsumexp(l) - l_y.
    const num::Var lse = num::log(num::sum_cols(num::exp(logits)));
    const num::Var picked = num::select_blocks(logits, 1, targets);
    const num::Var loss =
        num::scale(num::sum(num::sub(lse, picked)), 1.0 / static_cast<double>(targets.size()));
    num::adam_step(adam, params, tape.backward(loss, bound));
  }
  return ProbeClassifier(std::move(net), clip_length, mean, scale);
}

LabeledClips leading_clips(std::span<const data::LabeledVideo> videos, std::size_t clip_length) {
  LabeledClips out;
  for (const auto& v : videos) {
    require(v.frames.size() >= clip_length, ErrorKind::kInvalidArgument,
            "video of " + std::to_string(v.frames.size()) + " frames is shorter than " +
                std::to_string(clip_length));
    out.clips.emplace_back(std::vector<video::Frame>(v.frames.begin(),
                                                     v.frames.begin() + static_cast<long>(clip_length)));
    out.labels.push_back(v.label);
  }
  return out;
}

}  // namespace rg::eval
