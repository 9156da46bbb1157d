#pragma once

#include <string>
#include <vector>

#include "picdesc/corpus.hpp"
#include "picdesc/embedding.hpp"
#include "picdesc/regions.hpp"

namespace picdesc {

// Areas of the picture ranked by how much sentence relevance they soak up.
// Rank r corresponds to areas[r-1]; summed_scores is descending.
struct FocusedAreaSet {
    std::vector<BoundingBox> areas;
    std::vector<double> summed_scores;

    int k_f() const { return static_cast<int>(areas.size()); }
};

struct TopicAssignment {
    std::string sample_id;
    int sentence_index = 0;
    int area_rank = 0;  // 1-based
};

struct TopicFeature {
    std::string sample_id;
    std::vector<std::string> per_topic_texts;  // aligned with the rank subset
    ClassifierEmbedding vector;                // dim = |subset| * D_text
};

// For every sentence in the dataset, distribute one unit of probability mass
// over the proposals (text-to-images match) and accumulate per proposal.
std::vector<ScoredBox> accumulate_area_scores(const Dataset& dataset,
                                              const PictureInfo& picture,
                                              const std::vector<BoundingBox>& proposals,
                                              EmbeddingBackend& backend);

// Non-maximum suppression over the scored proposals, then the top k_f by
// summed score become the focused areas.
FocusedAreaSet select_focused_areas(const std::vector<ScoredBox>& scored, int k_f,
                                    double iou_threshold);

// Assigns each sentence to the focused area with the highest text-to-images
// probability, computed over the k_f areas only. Ties go to the lower rank.
std::vector<TopicAssignment> assign_sentences(const Dataset& dataset,
                                              const PictureInfo& picture,
                                              const FocusedAreaSet& areas,
                                              EmbeddingBackend& backend);

// Per sample: concatenate each selected rank's sentences (original order),
// embed them token-average, and concatenate the blocks in rank order. Topics
// with no sentences contribute a zero block, so the dimension is always
// |area_subset| * D_text.
std::vector<TopicFeature> topic_features(const Dataset& dataset,
                                         const std::vector<TopicAssignment>& assignments,
                                         const FocusedAreaSet& areas,
                                         EmbeddingBackend& text_backend,
                                         const std::vector<int>& area_subset);

}  // namespace picdesc
