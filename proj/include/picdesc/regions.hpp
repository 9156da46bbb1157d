#pragma once

#include <vector>

#include <opencv2/core.hpp>

#include "picdesc/errors.hpp"
#include "picdesc/geometry.hpp"

namespace picdesc {

struct RegionProposalConfig {
    double segmentation_scale = 200.0;
    double smoothing_sigma = 0.8;
    int min_component_size = 50;
    double min_box_area_fraction = 0.05;
    int max_proposals = 200;
};

struct ScoredBox {
    BoundingBox box;
    double score = 0.0;
};

struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<int> labels;  // row-major, values in [0, num_components)
    int num_components = 0;

    int at(int x, int y) const { return labels[static_cast<size_t>(y) * width + x]; }
};

// Felzenszwalb-style graph segmentation after Gaussian smoothing; labels are
// compacted in scan order and every component has >= min_component_size pixels.
LabelMap oversegment(const cv::Mat& image, const RegionProposalConfig& config);

// Hierarchical grouping of oversegmented components by color + size + fill
// similarity. Emits the bounding box of every region ever formed, in
// formation order, deduplicated, filtered by min_box_area_fraction and
// truncated to max_proposals.
std::vector<BoundingBox> selective_search(const cv::Mat& image,
                                          const RegionProposalConfig& config);

// Fallback proposal strategy: boxes at 3 scales x 2 aspect ratios on a
// half-box stride grid, plus the full frame.
std::vector<BoundingBox> sliding_grid_proposals(int width, int height,
                                                const RegionProposalConfig& config);

// Greedy non-maximum suppression. Keeps the highest-score remaining box and
// drops boxes with IoU > threshold against it. Output sorted by descending
// score; ties broken by smaller area, then lexicographic coordinates.
std::vector<ScoredBox> nms(std::vector<ScoredBox> boxes, double iou_threshold);

}  // namespace picdesc
