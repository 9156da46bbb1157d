#include "picdesc/subimage.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace picdesc {

double pairwise_separation(
    const std::vector<std::pair<ClassifierEmbedding, Label>>& embeddings) {
    if (embeddings.size() < 2)
        throw Error("pairwise separation needs at least two embeddings");
    bool has_hc = false, has_ad = false;
    std::vector<double> norms(embeddings.size());
    for (size_t i = 0; i < embeddings.size(); ++i) {
        const auto& [embedding, label] = embeddings[i];
        (label == Label::HC ? has_hc : has_ad) = true;
        double sq = 0.0;
        for (double v : embedding.values) sq += v * v;
        norms[i] = std::sqrt(sq);
        if (norms[i] == 0.0)
            throw ZeroVector("cosine similarity undefined for a zero embedding");
    }
    if (!has_hc || !has_ad)
        throw SingleClass("separation score needs both labels present");

    double score = 0.0;
    for (size_t i = 0; i < embeddings.size(); ++i) {
        for (size_t j = i + 1; j < embeddings.size(); ++j) {
            const auto& a = embeddings[i].first.values;
            const auto& b = embeddings[j].first.values;
            if (a.size() != b.size())
                throw DimensionMismatch("embeddings have different dimensions");
            double dot = 0.0;
            for (size_t d = 0; d < a.size(); ++d) dot += a[d] * b[d];
            double cos = dot / (norms[i] * norms[j]);
            score += (embeddings[i].second == embeddings[j].second) ? cos : -cos;
        }
    }
    return score;
}

SubImageSearchResult search_dementia_sensitive(
    const Dataset& dataset, const PictureInfo& picture,
    const std::vector<BoundingBox>& proposals, const FilterSpec& spec,
    EmbeddingBackend& joint_backend, EmbeddingBackend& classifier_backend,
    const std::optional<std::set<std::string>>& sample_filter) {
    if (proposals.empty())
        throw NoProposals("sub-image search needs at least one proposal");

    // Sentence joint vectors do not depend on the crop; embed each once.
    std::vector<std::vector<JointVector>> sentence_vectors(dataset.samples.size());
    for (size_t s = 0; s < dataset.samples.size(); ++s) {
        const auto& sample = dataset.samples[s];
        if (sample.sentences.empty())
            throw EmptySample("sample '" + sample.sample_id + "' has no sentences");
        sentence_vectors[s].reserve(sample.sentences.size());
        for (const auto& sentence : sample.sentences)
            sentence_vectors[s].push_back(embed_sentence_joint(sentence.text, joint_backend));
    }
    const double scale = joint_backend.descriptor().logit_scale;

    // Processed texts repeat across proposals whenever the kept set repeats;
    // memoize their classifier embeddings.
    std::map<std::string, ClassifierEmbedding> text_embeddings;
    auto classifier_vector = [&](const std::string& text) -> const ClassifierEmbedding& {
        auto it = text_embeddings.find(text);
        if (it == text_embeddings.end())
            it = text_embeddings.emplace(text, embed_text_for_classifier(text, classifier_backend))
                     .first;
        return it->second;
    };

    auto process_against = [&](const JointVector& target) {
        std::vector<ProcessedSample> processed;
        processed.reserve(dataset.samples.size());
        for (size_t s = 0; s < dataset.samples.size(); ++s) {
            const auto& sample = dataset.samples[s];
            std::vector<std::pair<int, double>> ranked;
            ranked.reserve(sample.sentences.size());
            for (size_t k = 0; k < sample.sentences.size(); ++k) {
                const auto& v = sentence_vectors[s][k];
                double dot = 0.0;
                for (int d = 0; d < v.dim(); ++d)
                    dot += v.values[static_cast<size_t>(d)] *
                           target.values[static_cast<size_t>(d)];
                ranked.emplace_back(sample.sentences[k].index, scale * dot);
            }
            std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            });
            processed.push_back(
                build_processed_sample(sample, select_top_bottom(ranked, spec)));
        }
        return processed;
    };

    SubImageSearchResult result;
    result.all_scores.reserve(proposals.size());
    int best_index = -1;
    for (const auto& box : proposals) {
        const JointVector target = embed_image_joint(picture.crop(box), joint_backend);
        auto processed = process_against(target);

        std::vector<std::pair<ClassifierEmbedding, Label>> embeddings;
        embeddings.reserve(processed.size());
        for (const auto& sample : processed) {
            if (sample_filter && !sample_filter->count(sample.sample_id)) continue;
            embeddings.emplace_back(classifier_vector(sample.text), sample.label);
        }
        const double d_s = pairwise_separation(embeddings);
        result.all_scores.push_back({box, d_s, spec});

        const auto& current = result.all_scores.back();
        if (best_index < 0) {
            best_index = 0;
            continue;
        }
        const auto& incumbent = result.all_scores[static_cast<size_t>(best_index)];
        bool better = current.d_s > incumbent.d_s;
        if (current.d_s == incumbent.d_s) {
            if (current.box.area() != incumbent.box.area())
                better = current.box.area() < incumbent.box.area();
            else
                better = current.box < incumbent.box;
        }
        if (better) best_index = static_cast<int>(result.all_scores.size()) - 1;
    }

    result.best = result.all_scores[static_cast<size_t>(best_index)];
    const JointVector winner =
        embed_image_joint(picture.crop(result.best.box), joint_backend);
    result.processed = process_against(winner);
    return result;
}

}  // namespace picdesc
