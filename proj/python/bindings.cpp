// Python bindings for the main pipeline operations. Boxes cross the boundary
// as (x0, y0, x1, y1) tuples and labels as "HC"/"AD" strings so callers never
// need the C++ value types.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <opencv2/imgcodecs.hpp>

#include "picdesc/classify.hpp"
#include "picdesc/config.hpp"
#include "picdesc/corpus.hpp"
#include "picdesc/embedding.hpp"
#include "picdesc/experiment.hpp"
#include "picdesc/filtering.hpp"
#include "picdesc/geometry.hpp"
#include "picdesc/regions.hpp"
#include "picdesc/relevance.hpp"
#include "picdesc/subimage.hpp"
#include "picdesc/viz.hpp"

namespace py = pybind11;
using namespace picdesc;

namespace {

using BoxTuple = std::array<int, 4>;

BoundingBox to_box(const BoxTuple& t) { return {t[0], t[1], t[2], t[3]}; }
BoxTuple from_box(const BoundingBox& b) { return {b.x0, b.y0, b.x1, b.y1}; }

std::vector<LabeledVector> to_labeled(
    const std::vector<std::pair<std::vector<double>, std::string>>& features) {
    std::vector<LabeledVector> out;
    out.reserve(features.size());
    for (const auto& [values, label] : features)
        out.emplace_back(values, label_from_string(label));
    return out;
}

py::dict report_to_dict(const EvalReport& report) {
    py::dict out;
    out["mean"] = report.mean;
    out["std_dev"] = report.std_dev;
    out["per_round_accuracy"] = report.per_round_accuracy;
    out["pipeline_id"] = report.pipeline_id;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Picture-description screening pipeline: image-text relevance scoring, "
              "sentence filtering, region search and few-shot evaluation.";
    m.attr("__version__") = "0.1.0";

    // --- corpus -----------------------------------------------------------
    py::class_<Sentence>(m, "Sentence")
        .def_readonly("sample_id", &Sentence::sample_id)
        .def_readonly("index", &Sentence::index)
        .def_readonly("text", &Sentence::text);

    py::class_<TranscriptSample>(m, "TranscriptSample")
        .def_readonly("sample_id", &TranscriptSample::sample_id)
        .def_readonly("sentences", &TranscriptSample::sentences)
        .def_property_readonly("label",
                               [](const TranscriptSample& s) { return to_string(s.label); })
        .def("joined_text", &TranscriptSample::joined_text);

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("samples", &Dataset::samples)
        .def_readonly("picture_path", &Dataset::picture_path)
        .def("total_sentences", &Dataset::total_sentences)
        .def("count_label", [](const Dataset& d, const std::string& label) {
            return d.count_label(label_from_string(label));
        });

    m.def("load_manifest",
          [](const std::string& dir) { return load_manifest(dir); },
          py::arg("dataset_dir"), "Load a dataset directory (manifest.tsv layout).");
    m.def("segment_sentences", &segment_sentences, py::arg("raw_text"));
    m.def("tokenize", &tokenize, py::arg("text"));

    // --- relevance --------------------------------------------------------
    m.def("softmax",
          [](const std::vector<double>& logits) {
              return softmax(std::span<const double>(logits));
          },
          py::arg("logits"), "Numerically stable softmax.");

    // --- geometry / regions -------------------------------------------------
    m.def("iou",
          [](const BoxTuple& a, const BoxTuple& b) { return iou(to_box(a), to_box(b)); },
          py::arg("a"), py::arg("b"));
    m.def("nms",
          [](const std::vector<std::pair<BoxTuple, double>>& scored, double threshold) {
              std::vector<ScoredBox> boxes;
              for (const auto& [box, score] : scored) boxes.push_back({to_box(box), score});
              std::vector<std::pair<BoxTuple, double>> out;
              for (const auto& kept : nms(std::move(boxes), threshold))
                  out.emplace_back(from_box(kept.box), kept.score);
              return out;
          },
          py::arg("scored_boxes"), py::arg("iou_threshold"),
          "Greedy non-maximum suppression over ((x0, y0, x1, y1), score) pairs.");
    m.def("propose_regions",
          [](const std::string& image_path) {
              const cv::Mat image = cv::imread(image_path, cv::IMREAD_COLOR);
              if (image.empty()) throw MissingPicture("cannot read " + image_path);
              std::vector<BoxTuple> out;
              for (const auto& box : selective_search(image, RegionProposalConfig{}))
                  out.push_back(from_box(box));
              return out;
          },
          py::arg("image_path"), "Selective-search proposals with default settings.");
    m.def("accumulate_heatmap",
          [](const std::vector<BoxTuple>& boxes, int width, int height) {
              std::vector<BoundingBox> native;
              for (const auto& box : boxes) native.push_back(to_box(box));
              const auto grid = accumulate_heatmap(native, width, height);
              py::dict out;
              out["width"] = grid.width;
              out["height"] = grid.height;
              out["counts"] = grid.counts;
              out["total"] = grid.total();
              return out;
          },
          py::arg("boxes"), py::arg("width"), py::arg("height"));

    // --- embedding backend --------------------------------------------------
    py::class_<SyntheticBackend>(m, "SyntheticBackend",
                                 "Deterministic hash-based embedding backend.")
        .def(py::init<std::uint64_t, int>(), py::arg("seed"), py::arg("dim"))
        .def_property_readonly(
            "backend_id",
            [](const SyntheticBackend& b) { return b.descriptor().backend_id(); })
        .def("classifier_text_vector", &SyntheticBackend::classifier_text_vector,
             py::arg("text"))
        .def("joint_text_vector",
             [](SyntheticBackend& b, const std::string& text) {
                 return embed_sentence_joint(text, b).values;
             },
             py::arg("text"))
        .def("joint_image_vector",
             [](SyntheticBackend& b, const std::string& picture_id, const BoxTuple& box,
                int width, int height) {
                 return b.joint_image_vector({picture_id, to_box(box), width, height});
             },
             py::arg("picture_id"), py::arg("box"), py::arg("width"), py::arg("height"));

    // --- filtering ----------------------------------------------------------
    m.def("process_dataset",
          [](const Dataset& dataset, SyntheticBackend& backend, const std::string& picture_id,
             const BoxTuple& box, int width, int height, int k_t, int k_b) {
              const PictureInfo info{picture_id, width, height};
              std::vector<std::pair<std::string, std::string>> out;
              for (const auto& processed :
                   process_dataset(dataset, info.crop(to_box(box)), {k_t, k_b}, backend))
                  out.emplace_back(processed.sample_id, processed.text);
              return out;
          },
          py::arg("dataset"), py::arg("backend"), py::arg("picture_id"), py::arg("box"),
          py::arg("width"), py::arg("height"), py::arg("k_t"), py::arg("k_b"),
          "Keep each sample's k_t most and k_b least crop-relevant sentences.");

    // --- sub-image search -----------------------------------------------------
    m.def("pairwise_separation",
          [](const std::vector<std::pair<std::vector<double>, std::string>>& embeddings) {
              std::vector<std::pair<ClassifierEmbedding, Label>> native;
              for (const auto& [values, label] : embeddings)
                  native.emplace_back(
                      ClassifierEmbedding{values, EmbeddingSource::TokenAverage},
                      label_from_string(label));
              return pairwise_separation(native);
          },
          py::arg("labeled_embeddings"),
          "Same-label minus different-label pairwise cosine sum.");
    m.def("search_dementia_sensitive",
          [](const Dataset& dataset, SyntheticBackend& backend, const std::string& picture_id,
             int width, int height, const std::vector<BoxTuple>& proposals, int k_t, int k_b) {
              std::vector<BoundingBox> native;
              for (const auto& box : proposals) native.push_back(to_box(box));
              const PictureInfo info{picture_id, width, height};
              const auto result = search_dementia_sensitive(dataset, info, native,
                                                            {k_t, k_b}, backend, backend);
              py::dict out;
              out["best_box"] = from_box(result.best.box);
              out["best_score"] = result.best.d_s;
              std::vector<std::pair<BoxTuple, double>> scores;
              for (const auto& s : result.all_scores)
                  scores.emplace_back(from_box(s.box), s.d_s);
              out["all_scores"] = scores;
              std::vector<std::pair<std::string, std::string>> processed;
              for (const auto& p : result.processed)
                  processed.emplace_back(p.sample_id, p.text);
              out["processed"] = processed;
              return out;
          },
          py::arg("dataset"), py::arg("backend"), py::arg("picture_id"), py::arg("width"),
          py::arg("height"), py::arg("proposals"), py::arg("k_t"), py::arg("k_b"),
          "Find the proposal whose filtered transcripts best separate the labels.");

    // --- classification --------------------------------------------------------
    m.def("few_shot_evaluate",
          [](const std::vector<std::pair<std::vector<double>, std::string>>& features, int k,
             int test_per_class, int rounds, std::uint64_t seed, const std::string& classifier,
             double regularization) {
              FewShotConfig config;
              config.k = k;
              config.test_per_class = test_per_class;
              config.rounds = rounds;
              config.rng_seed = seed;
              ClassifierSpec spec;
              spec.kind = classifier_kind_from_string(classifier);
              spec.regularization = regularization;
              return report_to_dict(few_shot_evaluate(to_labeled(features), config, spec));
          },
          py::arg("features"), py::arg("k"), py::arg("test_per_class") = 15,
          py::arg("rounds") = 600, py::arg("seed") = 0,
          py::arg("classifier") = "max_margin_rbf", py::arg("regularization") = 1.0,
          "Episodic k-shot evaluation over (vector, label) pairs.");
    m.def("fixed_split_evaluate",
          [](const std::vector<std::pair<std::vector<double>, std::string>>& train,
             const std::vector<std::pair<std::vector<double>, std::string>>& test,
             const std::string& classifier, double regularization) {
              ClassifierSpec spec;
              spec.kind = classifier_kind_from_string(classifier);
              spec.regularization = regularization;
              return fixed_split_evaluate(to_labeled(train), to_labeled(test), spec);
          },
          py::arg("train"), py::arg("test"), py::arg("classifier") = "max_margin_rbf",
          py::arg("regularization") = 1.0);
    m.def("welch_t_test",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              const auto result = welch_t_test(a, b);
              py::dict out;
              out["t"] = result.t;
              out["degrees_of_freedom"] = result.degrees_of_freedom;
              out["p_two_sided"] = result.p_two_sided;
              return out;
          },
          py::arg("a"), py::arg("b"));

    // --- experiment driver -------------------------------------------------------
    m.def("run_experiment",
          [](const std::string& dataset_dir, const std::string& output_dir,
             const std::map<std::string, std::string>& overrides) {
              RunConfig config;
              config.dataset_dir = dataset_dir;
              config.output_dir = output_dir;
              for (const auto& [key, value] : overrides)
                  apply_override(config, key, value);
              return run_experiment(config).string();
          },
          py::arg("dataset_dir"), py::arg("output_dir"),
          py::arg("overrides") = std::map<std::string, std::string>{},
          "Full pipeline run; returns the output directory.");
}
