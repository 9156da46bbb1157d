#pragma once

#include <span>
#include <string>
#include <vector>

#include "picdesc/corpus.hpp"
#include "picdesc/embedding.hpp"
#include "picdesc/matrix.hpp"

namespace picdesc {

// Numerically stable softmax (max subtraction).
std::vector<double> softmax(std::span<const double> logits);

// Softmax over row image_index of M: relevance of one image to all texts.
std::vector<double> image_to_texts_match(const RelevanceMatrix& m, int image_index);

// Softmax over column text_index of M: relevance of one text to all images.
std::vector<double> text_to_images_match(const RelevanceMatrix& m, int text_index);

struct SampleRelevance {
    std::string sample_id;
    std::vector<double> per_sentence;
    double total = 0.0;
};

struct GroupStats {
    double c_hc = 0.0;
    double c_ad = 0.0;
    double mean_sentences_hc = 0.0;
    double mean_sentences_ad = 0.0;
    double mean_words_hc = 0.0;
    double mean_words_ad = 0.0;
    double scale_factor = 0.0;  // total sentence count across all samples
};

// Per-sentence relevance against the picture with one softmax pooled over
// every sentence of every sample; c_i is the per-sample sum.
std::vector<SampleRelevance> corpus_relevance(const JointVector& picture,
                                              std::span<const TranscriptSample> samples,
                                              EmbeddingBackend& backend);

SampleRelevance sample_relevance(const JointVector& picture, const TranscriptSample& sample,
                                 EmbeddingBackend& backend);

GroupStats group_stats(const Dataset& dataset, const JointVector& picture,
                       EmbeddingBackend& backend);

// Convenience overload: embeds the full dataset picture first.
GroupStats group_stats(const Dataset& dataset, EmbeddingBackend& backend);

int word_count(const std::string& sentence);

}  // namespace picdesc
