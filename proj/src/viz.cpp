#include "picdesc/viz.hpp"

#include <algorithm>
#include <fstream>
#include <span>

#include <json.hpp>
#include <opencv2/imgproc.hpp>

#include "picdesc/relevance.hpp"

namespace picdesc {

int64_t HeatmapGrid::total() const {
    int64_t sum = 0;
    for (int c : counts) sum += c;
    return sum;
}

HeatmapGrid accumulate_heatmap(const std::vector<BoundingBox>& boxes, int width, int height) {
    HeatmapGrid grid;
    grid.width = width;
    grid.height = height;
    grid.counts.assign(static_cast<size_t>(width) * height, 0);
    for (const auto& box : boxes) {
        if (!box.valid() || !box.within(width, height))
            throw BoxOutOfBounds("box does not fit a " + std::to_string(width) + "x" +
                                 std::to_string(height) + " picture");
        for (int y = box.y0; y < box.y1; ++y)
            for (int x = box.x0; x < box.x1; ++x)
                ++grid.counts[static_cast<size_t>(y) * width + x];
    }
    return grid;
}

HeatmapGrid relevance_heatmap(const Dataset& dataset, const PictureInfo& picture,
                              const std::vector<BoundingBox>& proposals,
                              EmbeddingBackend& backend, Label group) {
    if (proposals.empty()) throw NoProposals("heatmap needs at least one proposal");
    std::vector<JointVector> area_vectors;
    area_vectors.reserve(proposals.size());
    for (const auto& box : proposals)
        area_vectors.push_back(embed_image_joint(picture.crop(box), backend));

    std::vector<BoundingBox> hits;
    for (const auto& sample : dataset.samples) {
        if (sample.label != group) continue;
        for (const auto& sentence : sample.sentences) {
            const JointVector v = embed_sentence_joint(sentence.text, backend);
            const RelevanceMatrix matrix = relevance_logits(
                area_vectors, std::span(&v, 1), backend.descriptor().logit_scale);
            const auto probabilities = text_to_images_match(matrix, 0);
            size_t best = 0;
            for (size_t p = 1; p < probabilities.size(); ++p)
                if (probabilities[p] > probabilities[best]) best = p;
            hits.push_back(proposals[best]);
        }
    }
    return accumulate_heatmap(hits, picture.width, picture.height);
}

cv::Mat3b render_heatmap(const HeatmapGrid& grid, const cv::Mat& picture) {
    if (picture.cols != grid.width || picture.rows != grid.height)
        throw DimensionMismatch("heatmap grid does not match the picture dimensions");
    cv::Mat3b base;
    if (picture.channels() == 1)
        cv::cvtColor(picture, base, cv::COLOR_GRAY2BGR);
    else
        picture.convertTo(base, CV_8UC3);

    const auto [lo_it, hi_it] = std::minmax_element(grid.counts.begin(), grid.counts.end());
    const int lo = *lo_it, hi = *hi_it;
    const double range = hi > lo ? static_cast<double>(hi - lo) : 1.0;

    cv::Mat3b out(grid.height, grid.width);
    for (int y = 0; y < grid.height; ++y) {
        for (int x = 0; x < grid.width; ++x) {
            const double t = (grid.at(x, y) - lo) / range;
            const cv::Vec3b heat(static_cast<uchar>(255.0 * (1.0 - t)), 0,
                                 static_cast<uchar>(255.0 * t));  // blue -> red (BGR)
            const cv::Vec3b& under = base(y, x);
            for (int c = 0; c < 3; ++c)
                out(y, x)[c] = static_cast<uchar>((under[c] + heat[c]) / 2);
        }
    }
    return out;
}

cv::Mat3b render_box_overlay(const cv::Mat& picture, const std::vector<BoundingBox>& boxes) {
    static const cv::Vec3b palette[] = {
        {0, 0, 255}, {0, 165, 255}, {0, 255, 255}, {0, 255, 0},
        {255, 255, 0}, {255, 0, 0}, {255, 0, 255}, {128, 0, 128},
    };
    cv::Mat3b out;
    if (picture.channels() == 1)
        cv::cvtColor(picture, out, cv::COLOR_GRAY2BGR);
    else
        picture.convertTo(out, CV_8UC3);
    for (size_t i = 0; i < boxes.size(); ++i) {
        const auto& box = boxes[i];
        const cv::Vec3b color = palette[i % std::size(palette)];
        cv::rectangle(out, cv::Point(box.x0, box.y0), cv::Point(box.x1 - 1, box.y1 - 1),
                      cv::Scalar(color[0], color[1], color[2]), 2);
    }
    return out;
}

void write_ppm(const std::string& path, const cv::Mat3b& image, const std::string& comment) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open '" + path + "' for writing");
    file << "P6\n";
    if (!comment.empty()) file << "# " << comment << "\n";
    file << image.cols << " " << image.rows << "\n255\n";
    for (int y = 0; y < image.rows; ++y) {
        for (int x = 0; x < image.cols; ++x) {
            const cv::Vec3b& bgr = image(y, x);
            const char rgb[3] = {static_cast<char>(bgr[2]), static_cast<char>(bgr[1]),
                                 static_cast<char>(bgr[0])};
            file.write(rgb, 3);
        }
    }
    if (!file) throw Error("failed writing '" + path + "'");
}

std::map<int, std::string> top_bottom_tags(const std::vector<std::pair<int, double>>& ranked,
                                           const FilterSpec& spec) {
    std::map<int, std::string> tags;
    if (spec.k_t == 0 && spec.k_b == 0) return tags;
    const int n = static_cast<int>(ranked.size());
    for (int i = 0; i < std::min(spec.k_t, n); ++i)
        tags[ranked[static_cast<size_t>(i)].first] = "top";
    for (int i = std::max(0, n - spec.k_b); i < n; ++i)
        tags.try_emplace(ranked[static_cast<size_t>(i)].first, "bottom");
    return tags;
}

std::string render_sample_markup(const TranscriptSample& sample,
                                 const std::map<int, std::string>& tags) {
    std::string out;
    for (const auto& sentence : sample.sentences) {
        nlohmann::json line{{"sample_id", sample.sample_id},
                            {"index", sentence.index},
                            {"text", sentence.text}};
        auto it = tags.find(sentence.index);
        line["tag"] = it == tags.end() ? "" : it->second;
        out += line.dump();
        out += "\n";
    }
    return out;
}

}  // namespace picdesc
