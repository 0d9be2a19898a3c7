// Python bindings for the main operations: mask sampling, KNN graph
// construction, similarity scoring, losses, metrics, clip segmentation,
// synthetic data generation and the two model entry points.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "augraph/au_graph.hpp"
#include "augraph/check.hpp"
#include "augraph/config.hpp"
#include "augraph/data.hpp"
#include "augraph/model.hpp"
#include "augraph/objectives.hpp"
#include "augraph/optim.hpp"
#include "augraph/trainer.hpp"

namespace py = pybind11;
using namespace augraph;

namespace {

AUNodeFeatures nodes_from_lists(
    const std::vector<std::vector<std::vector<double>>>& features) {
  AUG_CHECK_ARG(!features.empty(), "need at least one AU");
  AUNodeFeatures nodes;
  const size_t t = features[0].size();
  AUG_CHECK_ARG(t > 0, "need at least one frame");
  const size_t d = features[0][0].size();
  for (const auto& au : features) {
    AUG_CHECK_ARG(au.size() == t, "all AUs need the same frame count");
    std::vector<double> flat;
    flat.reserve(t * d);
    for (const auto& frame : au) {
      AUG_CHECK_ARG(frame.size() == d, "ragged feature rows");
      flat.insert(flat.end(), frame.begin(), frame.end());
    }
    nodes.per_au.push_back(Tensor::from_values(
        static_cast<int64_t>(t), static_cast<int64_t>(d), std::move(flat)));
  }
  nodes.au_names = au_names_for(static_cast<int>(features.size()));
  return nodes;
}

AUPredictions predictions_from_lists(const std::vector<std::vector<double>>& scores,
                                     const std::vector<std::vector<int>>& labels,
                                     const std::vector<bool>& frame_valid) {
  AUPredictions p;
  p.num_frames = static_cast<int64_t>(scores.size());
  AUG_CHECK_ARG(p.num_frames > 0, "empty score matrix");
  p.num_aus = static_cast<int64_t>(scores[0].size());
  AUG_CHECK_ARG(labels.size() == scores.size(), "labels shape mismatch");
  AUG_CHECK_ARG(frame_valid.size() == scores.size(),
                "frame_valid length mismatch");
  for (size_t f = 0; f < scores.size(); ++f) {
    AUG_CHECK_ARG(scores[f].size() == static_cast<size_t>(p.num_aus) &&
                      labels[f].size() == static_cast<size_t>(p.num_aus),
                  "ragged rows");
    p.scores.insert(p.scores.end(), scores[f].begin(), scores[f].end());
    p.labels.insert(p.labels.end(), labels[f].begin(), labels[f].end());
    p.frame_valid.push_back(frame_valid[f] ? 1 : 0);
  }
  p.au_names = au_names_for(static_cast<int>(p.num_aus));
  p.validate();
  return p;
}

py::dict report_to_dict(const MetricReport& rep) {
  py::dict out;
  out["average_f1"] = rep.average_f1;
  out["frames_scored"] = rep.frames_scored;
  py::list aus;
  for (size_t i = 0; i < rep.per_au.size(); ++i) {
    py::dict m;
    m["au"] = rep.au_names[i];
    m["f1"] = rep.per_au[i].f1;
    m["precision"] = rep.per_au[i].precision;
    m["recall"] = rep.per_au[i].recall;
    aus.append(m);
  }
  out["per_au"] = aus;
  return out;
}

FrameSequence sequence_from_lists(
    const std::vector<std::vector<double>>& frames, int64_t c, int64_t h,
    int64_t w, const std::vector<bool>& valid) {
  FrameSequence seq;
  seq.t = static_cast<int64_t>(frames.size());
  seq.c = c;
  seq.h = h;
  seq.w = w;
  AUG_CHECK_ARG(valid.size() == frames.size(), "valid mask length mismatch");
  for (size_t f = 0; f < frames.size(); ++f) {
    AUG_CHECK_ARG(frames[f].size() == static_cast<size_t>(c * h * w),
                  "frame ", f, " has ", frames[f].size(), " values, expected ",
                  c * h * w);
    seq.pixels.insert(seq.pixels.end(), frames[f].begin(), frames[f].end());
    seq.valid_mask.push_back(valid[f] ? 1 : 0);
  }
  seq.validate();
  return seq;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Facial action unit detection: graph-based video model core";
  m.attr("__version__") = "0.1.0";
  m.attr("CLIP_LENGTH") = kClipLength;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RuntimeFault>(m, "RuntimeFault", PyExc_RuntimeError);

  m.def("au_names", &au_names_for, py::arg("n") = 12,
        "Canonical AU name list for an n-AU model.");

  m.def(
      "sample_mask",
      [](int64_t m_tokens, double ratio, uint64_t seed, int64_t frames) {
        return sample_mask(m_tokens, ratio, seed, frames).masked;
      },
      py::arg("num_patches"), py::arg("ratio"), py::arg("seed"),
      py::arg("num_frames") = 1,
      "Per-frame sorted masked-patch indices, deterministic per seed.");

  m.def(
      "knn_graph",
      [](const std::vector<std::vector<std::vector<double>>>& features, int k,
         bool cosine) {
        AUNodeFeatures nodes = nodes_from_lists(features);
        AUGraphTopology topo = build_knn_graph(nodes, k, cosine);
        std::vector<std::vector<std::vector<int>>> adj(
            static_cast<size_t>(topo.num_frames));
        for (int64_t t = 0; t < topo.num_frames; ++t) {
          adj[static_cast<size_t>(t)].resize(static_cast<size_t>(topo.n));
          for (int64_t i = 0; i < topo.n; ++i)
            for (int64_t j = 0; j < topo.n; ++j)
              adj[static_cast<size_t>(t)][static_cast<size_t>(i)].push_back(
                  topo.edge(t, i, j) ? 1 : 0);
        }
        return adj;
      },
      py::arg("features"), py::arg("k"), py::arg("cosine") = false,
      "Per-frame binary adjacency [T][N][N] with out-degree k. features is "
      "[N][T][d].");

  m.def(
      "similarity_scores",
      [](const std::vector<std::vector<std::vector<double>>>& features,
         const std::vector<std::vector<double>>& anchors) {
        AUNodeFeatures nodes = nodes_from_lists(features);
        SCHeadParams head;
        std::vector<double> flat;
        for (const auto& row : anchors) {
          AUG_CHECK_ARG(row.size() == static_cast<size_t>(nodes.dim()),
                        "anchor width mismatch");
          flat.insert(flat.end(), row.begin(), row.end());
        }
        head.anchors = Tensor::from_values(
            static_cast<int64_t>(anchors.size()), nodes.dim(), std::move(flat));
        Tensor s = sc_predict(nodes, head);
        std::vector<std::vector<double>> out(static_cast<size_t>(s.rows()));
        for (int64_t t = 0; t < s.rows(); ++t)
          for (int64_t i = 0; i < s.cols(); ++i)
            out[static_cast<size_t>(t)].push_back(s.at(t, i));
        return out;
      },
      py::arg("features"), py::arg("anchors"),
      "Cosine similarity scores [T][N] between activated features and "
      "anchors.");

  m.def(
      "masked_mse",
      [](const std::vector<std::vector<double>>& recon,
         const std::vector<std::vector<double>>& target) {
        AUG_CHECK_ARG(!recon.empty() && recon.size() == target.size(),
                      "shape mismatch");
        const int64_t r = static_cast<int64_t>(recon.size());
        const int64_t c = static_cast<int64_t>(recon[0].size());
        std::vector<double> a, b;
        for (int64_t i = 0; i < r; ++i) {
          a.insert(a.end(), recon[static_cast<size_t>(i)].begin(),
                   recon[static_cast<size_t>(i)].end());
          b.insert(b.end(), target[static_cast<size_t>(i)].begin(),
                   target[static_cast<size_t>(i)].end());
        }
        return masked_mse_loss(Tensor::from_values(r, c, std::move(a)),
                               Tensor::from_values(r, c, std::move(b)))
            .scalar();
      },
      py::arg("reconstructed"), py::arg("target"));

  m.def(
      "detection_loss",
      [](const std::vector<std::vector<double>>& scores,
         const std::vector<std::vector<int>>& labels,
         const std::vector<bool>& frame_valid) {
        return asymmetric_au_loss_value(
            predictions_from_lists(scores, labels, frame_valid));
      },
      py::arg("scores"), py::arg("labels"), py::arg("frame_valid"),
      "Mean asymmetric loss over scored (frame, AU) pairs.");

  m.def(
      "f1_report",
      [](const std::vector<std::vector<double>>& scores,
         const std::vector<std::vector<int>>& labels,
         const std::vector<bool>& frame_valid, double threshold) {
        return report_to_dict(
            f1_scores(predictions_from_lists(scores, labels, frame_valid),
                      threshold));
      },
      py::arg("scores"), py::arg("labels"), py::arg("frame_valid"),
      py::arg("threshold") = 0.5);

  m.def(
      "segment_plan",
      [](int64_t num_frames) {
        std::vector<std::tuple<int64_t, int64_t, int64_t>> out;
        for (const ClipSpec& s : segment_plan(num_frames, 0, "v"))
          out.emplace_back(s.start_index, s.length, s.pad_count);
        return out;
      },
      py::arg("num_frames"),
      "Fixed-length windows (start, length, pad_count) covering every frame "
      "once.");

  m.def(
      "cosine_warmup_lr",
      [](int step, int total, int warmup, double peak) {
        return cosine_warmup_lr(step, total, warmup, peak);
      },
      py::arg("step"), py::arg("total_steps"), py::arg("warmup_steps"),
      py::arg("peak_lr"));

  m.def(
      "generate_synthetic",
      [](const std::string& root, int videos, int frames, int aus, int size,
         uint64_t seed) {
        SyntheticConfig cfg;
        cfg.num_videos = videos;
        cfg.frames_per_video = frames;
        cfg.num_aus = aus;
        cfg.image_size = size;
        cfg.seed = seed;
        generate_synthetic(root, cfg);
      },
      py::arg("root"), py::arg("num_videos") = 4,
      py::arg("frames_per_video") = 16, py::arg("num_aus") = 12,
      py::arg("image_size") = 64, py::arg("seed") = 0);

  py::class_<MaeModel>(m, "MaskedAutoencoder")
      .def(py::init([](int image_size, int patch_size, int embed_dim,
                       int encoder_depth, int decoder_depth, int num_heads,
                       uint64_t seed) {
             EncoderConfig cfg;
             cfg.image_h = image_size;
             cfg.image_w = image_size;
             cfg.patch_size = patch_size;
             cfg.embed_dim = embed_dim;
             cfg.encoder_depth = encoder_depth;
             cfg.decoder_depth = decoder_depth;
             cfg.num_heads = num_heads;
             cfg.validate();
             return new MaeModel(cfg, seed);
           }),
           py::arg("image_size") = 64, py::arg("patch_size") = 16,
           py::arg("embed_dim") = 64, py::arg("encoder_depth") = 4,
           py::arg("decoder_depth") = 2, py::arg("num_heads") = 4,
           py::arg("seed") = 0)
      .def_property_readonly(
          "num_patches",
          [](const MaeModel& m_) { return m_.config().tokens_per_frame(); })
      .def(
          "pretrain_loss",
          [](const MaeModel& model,
             const std::vector<std::vector<double>>& frames, double mask_ratio,
             uint64_t mask_seed) {
            const EncoderConfig& cfg = model.config();
            FrameSequence seq = sequence_from_lists(
                frames, cfg.channels, cfg.image_h, cfg.image_w,
                std::vector<bool>(frames.size(), true));
            MaskSpec mask = sample_mask(cfg.tokens_per_frame(), mask_ratio,
                                        mask_seed, seq.t);
            NoGradGuard guard;
            return model.pretrain_loss(seq, mask).scalar();
          },
          py::arg("frames"), py::arg("mask_ratio") = 0.75,
          py::arg("mask_seed") = 0,
          "Masked reconstruction loss of raw [T][c*h*w] pixel rows in [0,1].")
      .def(
          "encode",
          [](const MaeModel& model,
             const std::vector<std::vector<double>>& frames) {
            const EncoderConfig& cfg = model.config();
            FrameSequence seq = sequence_from_lists(
                frames, cfg.channels, cfg.image_h, cfg.image_w,
                std::vector<bool>(frames.size(), true));
            NoGradGuard guard;
            PatchTokenSequence toks = model.encode(seq);
            std::vector<std::vector<std::vector<double>>> out;
            for (const Tensor& f : toks.frames) {
              std::vector<std::vector<double>> rows(
                  static_cast<size_t>(f.rows()));
              for (int64_t r = 0; r < f.rows(); ++r)
                for (int64_t c = 0; c < f.cols(); ++c)
                  rows[static_cast<size_t>(r)].push_back(f.at(r, c));
              out.push_back(std::move(rows));
            }
            return out;
          },
          py::arg("frames"), "Per-frame token features [T][m][d].");

  py::class_<AuDetector>(m, "Detector")
      .def(py::init([](const std::string& preset, const std::string& overrides) {
             RunConfig cfg = preset_config(preset);
             if (!overrides.empty())
               cfg = RunConfig::apply_json(cfg,
                                           nlohmann::json::parse(overrides));
             cfg.validate();
             return new AuDetector(cfg);
           }),
           py::arg("preset") = "desk", py::arg("config_json") = "")
      .def_static(
          "from_checkpoint",
          [](const std::string& path) {
            return detector_from_checkpoint(load_checkpoint(path));
          },
          py::arg("path"))
      .def_property_readonly("num_aus",
                             [](const AuDetector& d) { return d.config().num_aus; })
      .def_property_readonly(
          "au_names",
          [](const AuDetector& d) { return au_names_for(d.config().num_aus); })
      .def(
          "scores",
          [](const AuDetector& det,
             const std::vector<std::vector<double>>& frames,
             const std::vector<bool>& valid) {
            const EncoderConfig& cfg = det.config().encoder;
            FrameSequence seq = sequence_from_lists(frames, cfg.channels,
                                                    cfg.image_h, cfg.image_w,
                                                    valid);
            std::vector<int> labels(
                static_cast<size_t>(seq.t * det.config().num_aus), -1);
            AUPredictions pred = det.predict(seq, labels);
            std::vector<std::vector<double>> out(
                static_cast<size_t>(pred.num_frames));
            for (int64_t t = 0; t < pred.num_frames; ++t)
              for (int64_t i = 0; i < pred.num_aus; ++i)
                out[static_cast<size_t>(t)].push_back(pred.score_at(t, i));
            return out;
          },
          py::arg("frames"), py::arg("frame_valid"),
          "Per-frame AU scores [T][N] in [0,1] for a 16-frame clip.");

  m.def(
      "evaluate_dataset",
      [](const std::string& checkpoint, const std::string& dataset_root,
         double threshold) {
        return report_to_dict(cmd_eval(checkpoint, dataset_root, threshold));
      },
      py::arg("checkpoint"), py::arg("dataset_root"),
      py::arg("threshold") = -1.0);
}
