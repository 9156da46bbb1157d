#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "picdesc/corpus.hpp"
#include "picdesc/embedding.hpp"
#include "picdesc/filtering.hpp"
#include "picdesc/geometry.hpp"

namespace picdesc {

struct SubImageScore {
    BoundingBox box;
    double d_s = 0.0;
    FilterSpec spec;
};

struct SubImageSearchResult {
    SubImageScore best;
    std::vector<SubImageScore> all_scores;       // one per proposal, input order
    std::vector<ProcessedSample> processed;      // rebuilt against the winning box
};

// Sum of cosine similarities over unordered same-label pairs minus the sum
// over unordered different-label pairs. Self-pairs excluded.
double pairwise_separation(
    const std::vector<std::pair<ClassifierEmbedding, Label>>& embeddings);

// Scores every proposal: filter the dataset's sentences against the proposal
// crop, embed the processed texts, and compute the label-separation score.
// Returns the argmax (ties: smaller area, then lexicographic coordinates)
// plus the full score table. When sample_filter is set, only the named
// samples contribute to the separation score (leakage-safe search); the
// returned processed samples still cover the whole dataset.
SubImageSearchResult search_dementia_sensitive(
    const Dataset& dataset, const PictureInfo& picture,
    const std::vector<BoundingBox>& proposals, const FilterSpec& spec,
    EmbeddingBackend& joint_backend, EmbeddingBackend& classifier_backend,
    const std::optional<std::set<std::string>>& sample_filter = std::nullopt);

}  // namespace picdesc
