#include "picdesc/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace picdesc {

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

std::vector<double> image_to_texts_match(const RelevanceMatrix& m, int image_index) {
    if (image_index < 0 || image_index >= m.num_images())
        throw IndexOutOfRange("image index " + std::to_string(image_index) + " out of [0, " +
                              std::to_string(m.num_images()) + ")");
    std::vector<double> row(static_cast<size_t>(m.num_texts()));
    for (int j = 0; j < m.num_texts(); ++j) row[static_cast<size_t>(j)] = m.logits.at(image_index, j);
    return softmax(row);
}

std::vector<double> text_to_images_match(const RelevanceMatrix& m, int text_index) {
    if (text_index < 0 || text_index >= m.num_texts())
        throw IndexOutOfRange("text index " + std::to_string(text_index) + " out of [0, " +
                              std::to_string(m.num_texts()) + ")");
    std::vector<double> col(static_cast<size_t>(m.num_images()));
    for (int i = 0; i < m.num_images(); ++i) col[static_cast<size_t>(i)] = m.logits.at(i, text_index);
    return softmax(col);
}

int word_count(const std::string& sentence) {
    std::istringstream in(sentence);
    std::string word;
    int n = 0;
    while (in >> word) ++n;
    return n;
}

std::vector<SampleRelevance> corpus_relevance(const JointVector& picture,
                                              std::span<const TranscriptSample> samples,
                                              EmbeddingBackend& backend) {
    std::vector<JointVector> sentence_vectors;
    std::vector<std::string> text_ids;
    for (const auto& sample : samples) {
        for (const auto& sentence : sample.sentences) {
            sentence_vectors.push_back(embed_sentence_joint(sentence.text, backend));
            text_ids.push_back(sample.sample_id + ":" + std::to_string(sentence.index));
        }
    }
    if (sentence_vectors.empty()) throw EmptySample("no sentences to score");

    std::vector<JointVector> images{picture};
    RelevanceMatrix m = relevance_logits(images, sentence_vectors,
                                         backend.descriptor().logit_scale, {"picture"},
                                         std::move(text_ids));
    std::vector<double> probs = image_to_texts_match(m, 0);

    std::vector<SampleRelevance> out;
    size_t cursor = 0;
    for (const auto& sample : samples) {
        SampleRelevance r;
        r.sample_id = sample.sample_id;
        for (size_t j = 0; j < sample.sentences.size(); ++j) {
            r.per_sentence.push_back(probs[cursor++]);
            r.total += r.per_sentence.back();
        }
        out.push_back(std::move(r));
    }
    return out;
}

SampleRelevance sample_relevance(const JointVector& picture, const TranscriptSample& sample,
                                 EmbeddingBackend& backend) {
    if (sample.sentences.empty()) throw EmptySample("sample has no sentences");
    return corpus_relevance(picture, std::span(&sample, 1), backend)[0];
}

GroupStats group_stats(const Dataset& dataset, const JointVector& picture,
                       EmbeddingBackend& backend) {
    if (dataset.count_label(Label::HC) == 0 || dataset.count_label(Label::AD) == 0)
        throw MissingLabelClass("group statistics need both HC and AD samples");

    auto relevance = corpus_relevance(picture, dataset.samples, backend);

    GroupStats stats;
    stats.scale_factor = static_cast<double>(dataset.total_sentences());
    double sum_c[2] = {0.0, 0.0};
    double sum_sentences[2] = {0.0, 0.0};
    double sum_words[2] = {0.0, 0.0};
    int counts[2] = {0, 0};
    for (size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto& sample = dataset.samples[i];
        const int g = sample.label == Label::HC ? 0 : 1;
        sum_c[g] += relevance[i].total;
        sum_sentences[g] += static_cast<double>(sample.sentences.size());
        for (const auto& sentence : sample.sentences)
            sum_words[g] += static_cast<double>(word_count(sentence.text));
        ++counts[g];
    }
    stats.c_hc = sum_c[0] / counts[0] * stats.scale_factor;
    stats.c_ad = sum_c[1] / counts[1] * stats.scale_factor;
    stats.mean_sentences_hc = sum_sentences[0] / counts[0];
    stats.mean_sentences_ad = sum_sentences[1] / counts[1];
    stats.mean_words_hc = sum_words[0] / counts[0];
    stats.mean_words_ad = sum_words[1] / counts[1];
    return stats;
}

GroupStats group_stats(const Dataset& dataset, EmbeddingBackend& backend) {
    PictureInfo info = picture_info_from_file(dataset.picture_path);
    JointVector picture = embed_image_joint(info.full(), backend);
    return group_stats(dataset, picture, backend);
}

}  // namespace picdesc
