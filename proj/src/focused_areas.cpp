#include "picdesc/focused_areas.hpp"

#include <algorithm>
#include <map>
#include <span>

#include "picdesc/relevance.hpp"

namespace picdesc {

namespace {

std::vector<JointVector> embed_proposals(const PictureInfo& picture,
                                         const std::vector<BoundingBox>& proposals,
                                         EmbeddingBackend& backend) {
    std::vector<JointVector> vectors;
    vectors.reserve(proposals.size());
    for (const auto& box : proposals)
        vectors.push_back(embed_image_joint(picture.crop(box), backend));
    return vectors;
}

}  // namespace

std::vector<ScoredBox> accumulate_area_scores(const Dataset& dataset,
                                              const PictureInfo& picture,
                                              const std::vector<BoundingBox>& proposals,
                                              EmbeddingBackend& backend) {
    if (proposals.empty())
        throw NoProposals("area scoring needs at least one proposal");
    if (dataset.total_sentences() == 0)
        throw EmptySample("area scoring needs at least one sentence");

    const auto area_vectors = embed_proposals(picture, proposals, backend);
    std::vector<JointVector> sentence_vectors;
    for (const auto& sample : dataset.samples)
        for (const auto& sentence : sample.sentences)
            sentence_vectors.push_back(embed_sentence_joint(sentence.text, backend));

    const RelevanceMatrix matrix =
        relevance_logits(area_vectors, sentence_vectors, backend.descriptor().logit_scale);

    std::vector<ScoredBox> scored(proposals.size());
    for (size_t p = 0; p < proposals.size(); ++p) scored[p].box = proposals[p];
    for (int j = 0; j < matrix.num_texts(); ++j) {
        const auto probabilities = text_to_images_match(matrix, j);
        for (size_t p = 0; p < proposals.size(); ++p) scored[p].score += probabilities[p];
    }
    return scored;
}

FocusedAreaSet select_focused_areas(const std::vector<ScoredBox>& scored, int k_f,
                                    double iou_threshold) {
    if (k_f < 1) throw Error("focused area count must be at least 1");
    auto survivors = nms(scored, iou_threshold);
    if (static_cast<int>(survivors.size()) < k_f)
        throw InsufficientAreas("only " + std::to_string(survivors.size()) +
                                " areas survive suppression, need " + std::to_string(k_f));
    FocusedAreaSet set;
    for (int r = 0; r < k_f; ++r) {
        set.areas.push_back(survivors[static_cast<size_t>(r)].box);
        set.summed_scores.push_back(survivors[static_cast<size_t>(r)].score);
    }
    return set;
}

std::vector<TopicAssignment> assign_sentences(const Dataset& dataset,
                                              const PictureInfo& picture,
                                              const FocusedAreaSet& areas,
                                              EmbeddingBackend& backend) {
    if (areas.areas.empty()) throw InsufficientAreas("no focused areas to assign to");
    const auto area_vectors = embed_proposals(picture, areas.areas, backend);

    std::vector<TopicAssignment> assignments;
    for (const auto& sample : dataset.samples) {
        for (const auto& sentence : sample.sentences) {
            const JointVector v = embed_sentence_joint(sentence.text, backend);
            const RelevanceMatrix matrix = relevance_logits(
                area_vectors, std::span(&v, 1), backend.descriptor().logit_scale);
            const auto probabilities = text_to_images_match(matrix, 0);
            int best = 0;
            for (size_t r = 1; r < probabilities.size(); ++r)
                if (probabilities[r] > probabilities[static_cast<size_t>(best)])
                    best = static_cast<int>(r);
            assignments.push_back({sample.sample_id, sentence.index, best + 1});
        }
    }
    return assignments;
}

std::vector<TopicFeature> topic_features(const Dataset& dataset,
                                         const std::vector<TopicAssignment>& assignments,
                                         const FocusedAreaSet& areas,
                                         EmbeddingBackend& text_backend,
                                         const std::vector<int>& area_subset) {
    if (area_subset.empty()) throw Error("area subset must not be empty");
    for (int rank : area_subset)
        if (rank < 1 || rank > areas.k_f())
            throw IndexOutOfRange("area rank " + std::to_string(rank) +
                                  " outside [1, " + std::to_string(areas.k_f()) + "]");

    std::map<std::pair<std::string, int>, int> rank_of;
    for (const auto& assignment : assignments)
        rank_of[{assignment.sample_id, assignment.sentence_index}] = assignment.area_rank;

    int dim = text_backend.descriptor().dim;
    if (dim <= 0) {
        for (const auto& sample : dataset.samples) {
            if (sample.sentences.empty()) continue;
            dim = embed_text_for_classifier(sample.sentences.front().text, text_backend).dim();
            break;
        }
        if (dim <= 0) throw DimensionMismatch("cannot determine text embedding dimension");
    }

    std::vector<TopicFeature> features;
    features.reserve(dataset.samples.size());
    for (const auto& sample : dataset.samples) {
        TopicFeature feature;
        feature.sample_id = sample.sample_id;
        feature.vector.source = EmbeddingSource::TopicConcat;
        for (int rank : area_subset) {
            std::string topic_text;
            for (const auto& sentence : sample.sentences) {
                auto it = rank_of.find({sample.sample_id, sentence.index});
                if (it == rank_of.end())
                    throw IndexOutOfRange("sentence " + std::to_string(sentence.index) +
                                          " of sample '" + sample.sample_id +
                                          "' has no topic assignment");
                if (it->second != rank) continue;
                if (!topic_text.empty()) topic_text += ". ";
                topic_text += sentence.text;
            }
            feature.per_topic_texts.push_back(topic_text);
            if (topic_text.empty()) {
                feature.vector.values.insert(feature.vector.values.end(),
                                             static_cast<size_t>(dim), 0.0);
            } else {
                const auto block = embed_text_for_classifier(topic_text, text_backend);
                if (block.dim() != dim)
                    throw DimensionMismatch("topic block dimension differs from backend dim");
                feature.vector.values.insert(feature.vector.values.end(),
                                             block.values.begin(), block.values.end());
            }
        }
        features.push_back(std::move(feature));
    }
    return features;
}

}  // namespace picdesc
