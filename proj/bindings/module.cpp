#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rg/data/checkpoint.hpp"
#include "rg/data/config.hpp"
#include "rg/data/container.hpp"
#include "rg/data/datasets.hpp"
#include "rg/data/pipeline.hpp"
#include "rg/encgan/encgan3.hpp"
#include "rg/error.hpp"
#include "rg/eval/metrics.hpp"
#include "rg/eval/report.hpp"
#include "rg/recall/recall.hpp"
#include "rg/video/algebra.hpp"

namespace py = pybind11;
using namespace rg;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// [T, H, W, C] array <-> frames.
std::vector<video::Frame> to_frames(const Array& a) {
  require(a.ndim() == 4, ErrorKind::kDimensionMismatch, "expected a [frames, H, W, C] array");
  const video::FrameShape shape{static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(2)),
                                static_cast<std::size_t>(a.shape(3))};
  const auto count = static_cast<std::size_t>(a.shape(0));
  return video::unflatten(std::span<const double>(a.data(), count * shape.pixels()), shape, count);
}

Array from_frames(std::span<const video::Frame> frames) {
  require(!frames.empty(), ErrorKind::kInvalidArgument, "no frames");
  const video::FrameShape s = frames.front().shape();
  Array out({frames.size(), s.height, s.width, s.channels});
  const std::vector<double> flat = video::flatten(frames);
  std::copy(flat.begin(), flat.end(), out.mutable_data());
  return out;
}

Array frame_array(const video::Frame& f) {
  const video::FrameShape s = f.shape();
  Array out({s.height, s.width, s.channels});
  std::copy(f.pixels().begin(), f.pixels().end(), out.mutable_data());
  return out;
}

video::Frame to_frame(const Array& a) {
  require(a.ndim() == 3, ErrorKind::kDimensionMismatch, "expected an [H, W, C] array");
  const video::FrameShape shape{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                                static_cast<std::size_t>(a.shape(2))};
  return video::Frame(shape, std::vector<double>(a.data(), a.data() + shape.pixels()));
}

std::vector<data::LabeledVideo> to_videos(const std::vector<Array>& videos, const std::vector<int>& labels) {
  require(labels.empty() || labels.size() == videos.size(), ErrorKind::kDimensionMismatch,
          "labels must match the number of videos");
  std::vector<data::LabeledVideo> out;
  for (std::size_t i = 0; i < videos.size(); ++i)
    out.push_back({to_frames(videos[i]), labels.empty() ? -1 : labels[i]});
  return out;
}

py::list labeled_list(const std::vector<data::LabeledVideo>& videos) {
  py::list out;
  for (const auto& v : videos) out.append(py::make_tuple(from_frames(v.frames), v.label));
  return out;
}

data::Overrides to_overrides(const std::map<std::string, std::string>& m) {
  return {m.begin(), m.end()};
}

// A run configuration and the bundle it describes.
struct Model {
  data::RunConfig config;
  encgan::ModelBundle bundle;

  static Model create(const std::string& config_json, const std::map<std::string, std::string>& overrides) {
    Model m;
    m.config = data::config_from_json(config_json, to_overrides(overrides));
    m.bundle = encgan::make_bundle(m.config.model_config(), m.config.seed);
    return m;
  }

  static Model load(const std::string& path) {
    data::Checkpoint ck = data::load_checkpoint(path);
    return {ck.config, std::move(ck.bundle)};
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-stream video VAE-GAN with recall chaining";

  static py::exception<Error> rg_error(m, "RgError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(rg_error)(error_kind_name(e.kind()), e.what());
      PyErr_SetObject(rg_error.ptr(), err.ptr());
    }
  });

  // Frame algebra.
  m.def("decompose", [](const Array& clip) {
    const video::Decomposition d = video::decompose(video::VideoClip(to_frames(clip)));
    return py::make_tuple(frame_array(d.content), from_frames(d.motion.diffs));
  });
  m.def("reconstruct", [](const Array& content, const Array& motion) {
    return from_frames(video::reconstruct(to_frame(content), {to_frames(motion)}).frames());
  });
  m.def("reconstruct_from_reference", [](const Array& ref, std::size_t r, const Array& motion) {
    return from_frames(video::reconstruct_from_reference(to_frame(ref), r, {to_frames(motion)}).frames());
  }, py::arg("ref"), py::arg("r"), py::arg("motion"));
  m.def("stitch", [](const std::vector<Array>& clips, std::size_t r) {
    std::vector<video::VideoClip> cs;
    for (const auto& c : clips) cs.emplace_back(to_frames(c));
    return from_frames(video::stitch(cs, r).frames);
  });
  m.def("stitched_length", &video::stitched_length, py::arg("clip_count"), py::arg("clip_length"), py::arg("r"));

  // Datasets and containers.
  m.def("shapes_dataset", [](std::size_t count, std::size_t length, std::uint64_t seed, std::size_t h,
                             std::size_t w, std::size_t c) {
    return labeled_list(data::shapes_dataset(count, length, seed, {h, w, c}));
  }, py::arg("count"), py::arg("length"), py::arg("seed") = 0, py::arg("height") = 16,
        py::arg("width") = 16, py::arg("channels") = 1);
  m.def("drift_dataset", [](std::size_t count, std::size_t length, std::uint64_t seed, std::size_t h,
                            std::size_t w, std::size_t c) {
    return labeled_list(data::drift_dataset(count, length, seed, {h, w, c}));
  }, py::arg("count"), py::arg("length"), py::arg("seed") = 0, py::arg("height") = 16,
        py::arg("width") = 16, py::arg("channels") = 1);
  m.def("load_dataset", [](const std::string& manifest) { return labeled_list(data::load_dataset(manifest)); });
  m.def("write_video", [](const std::string& path, const Array& video, const std::string& dtype) {
    data::write_video(path, to_frames(video), data::parse_dtype(dtype));
  }, py::arg("path"), py::arg("video"), py::arg("dtype") = "f64");
  m.def("read_video", [](const std::string& path) { return from_frames(data::read_video(path)); });

  m.def("config_json", [](const std::string& text, const std::map<std::string, std::string>& overrides) {
    return data::config_to_json(data::config_from_json(text, to_overrides(overrides)));
  }, py::arg("text") = "", py::arg("overrides") = std::map<std::string, std::string>{});

  py::class_<Model>(m, "Model")
      .def_static("create", &Model::create, py::arg("config") = "",
                  py::arg("overrides") = std::map<std::string, std::string>{})
      .def_static("load", &Model::load)
      .def("save", [](const Model& self, const std::string& path) { data::save_checkpoint(path, self.config, self.bundle); })
      .def_property_readonly("config", [](const Model& self) { return data::config_to_json(self.config); })
      .def_property_readonly("steps", [](const Model& self) { return self.bundle.steps; })
      .def("train", [](Model& self, const std::vector<Array>& videos, std::size_t steps) {
        data::RunConfig c = self.config;
        c.steps = self.bundle.steps + steps;
        std::vector<double> log;
        const auto vids = to_videos(videos, {});
        py::gil_scoped_release release;
        data::train_encgan(c, vids, self.bundle, [&](std::size_t, const encgan::TrainReport& r) {
          log.push_back(r.loss_enc);
        });
        return log;
      }, py::arg("videos"), py::arg("steps"), "Runs `steps` more steps; returns the encoder losses.")
      .def("train_recall", [](Model& self, const std::vector<Array>& videos, std::size_t steps) {
        data::RunConfig c = self.config;
        c.steps = self.bundle.steps + steps;
        std::vector<double> log;
        const auto vids = to_videos(videos, {});
        const recall::PairSet pairs = data::recall_pairs(c, vids);
        py::gil_scoped_release release;
        data::train_recall(c, pairs, self.bundle, [&](std::size_t, const recall::RecallReport& r) {
          log.push_back(r.loss_rencg);
        });
        return log;
      }, py::arg("videos"), py::arg("steps"))
      .def("reconstruction_mse", [](const Model& self, const std::vector<Array>& clips) {
        std::vector<video::VideoClip> cs;
        for (const auto& c : clips) cs.emplace_back(to_frames(c));
        return encgan::reconstruction_mse(self.bundle, encgan::clips_to_tensor(cs));
      })
      .def("generate_long", [](const Model& self, std::size_t length, std::uint64_t seed, const std::string& mode) {
        recall::ChainOptions o = data::chain_options(self.config, 1);
        if (!mode.empty()) o.mode = recall::parse_chain_mode(mode);
        recall::ChainResult r;
        const auto frames = data::generate_long(self.bundle, o, length, num::Stream(seed), &r);
        py::dict info;
        info["clips"] = r.clip_count;
        info["peak_buffers"] = r.peak_buffers;
        info["mismatch"] = r.mean_mismatch;
        return py::make_tuple(from_frames(frames), info);
      }, py::arg("length"), py::arg("seed") = 0, py::arg("mode") = "");

  // Metrics.
  m.def("frechet_distance", [](const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a,
                               const Eigen::VectorXd& mu_b, const Eigen::MatrixXd& cov_b) {
    return eval::frechet_distance({mu_a, cov_a, 0}, {mu_b, cov_b, 0});
  });
  m.def("segmentwise_scores", [](const std::vector<Array>& generated, const std::vector<Array>& reference,
                                 std::size_t seg_len, std::uint64_t seed) {
    std::vector<std::vector<video::Frame>> g, r;
    for (const auto& v : generated) g.push_back(to_frames(v));
    for (const auto& v : reference) r.push_back(to_frames(v));
    require(!r.empty() && !r.front().empty(), ErrorKind::kInvalidArgument, "empty reference set");
    const eval::FeatureExtractor fx(r.front().front().shape(), seg_len, eval::kFeatureDim, seed);
    const eval::SegmentScores s = eval::segmentwise_scores(g, r, fx);
    py::dict out;
    out["scores"] = s.scores;
    out["group_sizes"] = s.group_sizes;
    out["average"] = s.average;
    out["excluded"] = s.excluded;
    return out;
  }, py::arg("generated"), py::arg("reference"), py::arg("seg_len") = 16, py::arg("seed") = 0);
  m.def("fvd_ratio", [](double first, double full) { return eval::fvd_ratio(first, full).ratio; });
  m.def("inception_score", [](const Eigen::MatrixXd& probs) {
    const eval::InceptionScore s = eval::inception_score(probs);
    return py::make_tuple(s.score, s.inter_entropy, s.intra_entropy);
  });
  m.def("read_kv_report", [](const std::string& path) {
    py::list out;
    for (const auto& e : eval::read_kv_report_file(path).entries)
      out.append(py::make_tuple(e.metric, e.segment ? py::cast(*e.segment) : py::none(), e.value));
    return out;
  });
}
