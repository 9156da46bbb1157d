#include "picdesc/filtering.hpp"

#include <algorithm>

namespace picdesc {

std::vector<std::pair<int, double>> rank_sentences(const TranscriptSample& sample,
                                                   const JointVector& target,
                                                   EmbeddingBackend& backend) {
    if (sample.sentences.empty())
        throw EmptySample("cannot rank sentences of empty sample '" + sample.sample_id + "'");
    const double scale = backend.descriptor().logit_scale;
    std::vector<std::pair<int, double>> ranked;
    ranked.reserve(sample.sentences.size());
    for (const auto& sentence : sample.sentences) {
        JointVector v = embed_sentence_joint(sentence.text, backend);
        if (v.dim() != target.dim())
            throw DimensionMismatch("sentence and target vectors have different dimensions");
        double dot = 0.0;
        for (int d = 0; d < v.dim(); ++d)
            dot += v.values[static_cast<size_t>(d)] * target.values[static_cast<size_t>(d)];
        ranked.emplace_back(sentence.index, scale * dot);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

std::set<int> select_top_bottom(const std::vector<std::pair<int, double>>& ranked,
                                const FilterSpec& spec) {
    std::set<int> kept;
    if (spec.k_t == 0 && spec.k_b == 0) {
        for (const auto& [index, score] : ranked) kept.insert(index);
        return kept;
    }
    const int n = static_cast<int>(ranked.size());
    for (int i = 0; i < std::min(spec.k_t, n); ++i)
        kept.insert(ranked[static_cast<size_t>(i)].first);
    for (int i = std::max(0, n - spec.k_b); i < n; ++i)
        kept.insert(ranked[static_cast<size_t>(i)].first);
    return kept;
}

ProcessedSample build_processed_sample(const TranscriptSample& sample,
                                       const std::set<int>& kept) {
    if (kept.empty())
        throw EmptySelection("no sentences kept for sample '" + sample.sample_id + "'");
    ProcessedSample processed;
    processed.sample_id = sample.sample_id;
    processed.label = sample.label;
    for (const auto& sentence : sample.sentences) {
        if (!kept.count(sentence.index)) continue;
        processed.kept_sentence_indices.push_back(sentence.index);
        if (!processed.text.empty()) processed.text += ". ";
        processed.text += sentence.text;
    }
    if (processed.kept_sentence_indices.size() != kept.size())
        throw IndexOutOfRange("kept set references sentences the sample does not have");
    return processed;
}

std::vector<ProcessedSample> process_dataset(const Dataset& dataset, const CropRef& target,
                                             const FilterSpec& spec,
                                             EmbeddingBackend& backend) {
    const JointVector target_vector = embed_image_joint(target, backend);
    std::vector<ProcessedSample> processed;
    processed.reserve(dataset.samples.size());
    for (const auto& sample : dataset.samples) {
        auto ranked = rank_sentences(sample, target_vector, backend);
        processed.push_back(build_processed_sample(sample, select_top_bottom(ranked, spec)));
    }
    return processed;
}

}  // namespace picdesc
