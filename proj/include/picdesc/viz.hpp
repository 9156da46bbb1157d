#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "picdesc/corpus.hpp"
#include "picdesc/embedding.hpp"
#include "picdesc/filtering.hpp"
#include "picdesc/geometry.hpp"

namespace picdesc {

// Per-pixel coverage counts aligned to the picture raster.
struct HeatmapGrid {
    int width = 0;
    int height = 0;
    std::vector<int> counts;  // row-major

    int at(int x, int y) const { return counts[static_cast<size_t>(y) * width + x]; }
    int64_t total() const;
};

// counts[p] = number of boxes covering pixel p. Boxes must lie within the
// picture; the grid total equals the sum of box areas exactly.
HeatmapGrid accumulate_heatmap(const std::vector<BoundingBox>& boxes, int width, int height);

// For each sentence of the given label group, add the single most-relevant
// proposal (argmax of the text-to-images match over all proposals) into a
// heatmap.
HeatmapGrid relevance_heatmap(const Dataset& dataset, const PictureInfo& picture,
                              const std::vector<BoundingBox>& proposals,
                              EmbeddingBackend& backend, Label group);

// Min-max normalized counts mapped blue -> red and alpha-blended over the
// picture. A zero-range grid maps everything to 0 (uniform blue).
cv::Mat3b render_heatmap(const HeatmapGrid& grid, const cv::Mat& picture);

// Draws box outlines over the picture; boxes are colored by list position
// (rank) from a fixed palette.
cv::Mat3b render_box_overlay(const cv::Mat& picture, const std::vector<BoundingBox>& boxes);

// Binary PPM (P6) writer with deterministic bytes; the comment, when
// non-empty, is embedded as a header comment line.
void write_ppm(const std::string& path, const cv::Mat3b& image, const std::string& comment = "");

// Tags from a top/bottom filter run: the first k_t ranked sentences are
// "top", the last k_b are "bottom" (overlap collapses to "top"). The (0,0)
// baseline produces no tags.
std::map<int, std::string> top_bottom_tags(const std::vector<std::pair<int, double>>& ranked,
                                           const FilterSpec& spec);

// One JSON object per sentence: sample_id, index, text, tag ("" if untagged).
std::string render_sample_markup(const TranscriptSample& sample,
                                 const std::map<int, std::string>& tags);

}  // namespace picdesc
