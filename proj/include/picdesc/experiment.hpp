#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "picdesc/classify.hpp"
#include "picdesc/config.hpp"
#include "picdesc/corpus.hpp"
#include "picdesc/embedding.hpp"

namespace picdesc {

// Embedding backends materialized from a RunConfig. For the synthetic and
// fixture backends one object serves both roles; the pretrained pair is two
// read-through stores.
struct BackendBundle {
    std::shared_ptr<EmbeddingBackend> joint;
    std::shared_ptr<EmbeddingBackend> text;
    std::shared_ptr<CacheStore> cache;  // null for synthetic
};

BackendBundle make_backends(const RunConfig& config);

// Proposal boxes per the configured strategy ("selective_search" or "grid").
std::vector<BoundingBox> make_proposals(const cv::Mat& picture, const RunConfig& config);

// "79.91_7.05": percent mean with percent std, two decimals each.
std::string format_mean_std(double mean, double std_dev);

// Runs the full pipeline sweep on one dataset: group statistics, the
// (k_t, k_b) picture-relevance grid, the pipeline comparison table, the
// sub-image search, focused areas, processed manifests, and (optionally)
// figure rasters. Deterministic: re-running the same config reproduces the
// same bytes. Returns the output directory.
std::filesystem::path run_experiment(const RunConfig& config);

}  // namespace picdesc
