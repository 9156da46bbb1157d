#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "picdesc/corpus.hpp"
#include "picdesc/embedding.hpp"

namespace picdesc {

// Sentence-selection window: keep the k_t most and k_b least picture-relevant
// sentences. k_t = k_b = 0 is the no-filter baseline (keep everything).
struct FilterSpec {
    int k_t = 0;
    int k_b = 0;
};

struct ProcessedSample {
    std::string sample_id;
    std::vector<int> kept_sentence_indices;  // strictly increasing
    std::string text;
    Label label = Label::HC;
};

// Scores every sentence of the sample against the target image vector and
// returns (index, score) sorted by descending score. Scores are raw joint
// logits; ranking by them is softmax-invariant. Ties go to the smaller index.
std::vector<std::pair<int, double>> rank_sentences(const TranscriptSample& sample,
                                                   const JointVector& target,
                                                   EmbeddingBackend& backend);

// Union of the first k_t and last k_b entries of the ranked list (set
// semantics: overlap collapses). Both zero means keep all indices.
std::set<int> select_top_bottom(const std::vector<std::pair<int, double>>& ranked,
                                const FilterSpec& spec);

// Rebuilds the sample text from the kept sentences in original order,
// joined with ". ".
ProcessedSample build_processed_sample(const TranscriptSample& sample,
                                       const std::set<int>& kept);

// rank -> select -> build for every sample, against one target crop.
std::vector<ProcessedSample> process_dataset(const Dataset& dataset, const CropRef& target,
                                             const FilterSpec& spec,
                                             EmbeddingBackend& backend);

}  // namespace picdesc
