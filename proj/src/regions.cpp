#include "picdesc/regions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include <opencv2/imgproc.hpp>

namespace picdesc {

namespace {

constexpr int kHistBinsPerChannel = 25;

std::vector<cv::Mat1f> to_float_channels(const cv::Mat& image) {
    cv::Mat bgr;
    if (image.channels() == 1) {
        cv::cvtColor(image, bgr, cv::COLOR_GRAY2BGR);
    } else if (image.channels() == 3) {
        bgr = image;
    } else {
        cv::cvtColor(image, bgr, cv::COLOR_BGRA2BGR);
    }
    cv::Mat bgr_float;
    bgr.convertTo(bgr_float, CV_32FC3);
    std::vector<cv::Mat1f> channels(3);
    cv::split(bgr_float, channels);
    return channels;
}

// Separable Gaussian, replicated borders, kernel radius 3*sigma.
cv::Mat1f smooth_channel(const cv::Mat1f& channel, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[static_cast<size_t>(i + radius)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[static_cast<size_t>(i + radius)];
    }
    for (double& w : kernel) w /= sum;

    const int width = channel.cols, height = channel.rows;
    cv::Mat1f horizontal(height, width), out(height, width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int xx = std::clamp(x + i, 0, width - 1);
                acc += kernel[static_cast<size_t>(i + radius)] * channel(y, xx);
            }
            horizontal(y, x) = static_cast<float>(acc);
        }
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int yy = std::clamp(y + i, 0, height - 1);
                acc += kernel[static_cast<size_t>(i + radius)] * horizontal(yy, x);
            }
            out(y, x) = static_cast<float>(acc);
        }
    }
    return out;
}

struct GraphEdge {
    int a = 0;
    int b = 0;
    float weight = 0.0f;
};

class DisjointSet {
public:
    explicit DisjointSet(int n) : parent_(n), rank_(n, 0), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    int join(int a, int b) {
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        if (rank_[a] == rank_[b]) ++rank_[a];
        return a;
    }

    int size(int x) const { return size_[x]; }

private:
    std::vector<int> parent_;
    std::vector<int> rank_;
    std::vector<int> size_;
};

}  // namespace

LabelMap oversegment(const cv::Mat& image, const RegionProposalConfig& config) {
    if (image.empty() || image.cols < 16 || image.rows < 16)
        throw ImageTooSmall("oversegment needs an image of at least 16x16 pixels");

    auto channels = to_float_channels(image);
    for (auto& channel : channels) channel = smooth_channel(channel, config.smoothing_sigma);

    const int width = image.cols, height = image.rows;
    const int num_pixels = width * height;

    std::vector<GraphEdge> edges;
    edges.reserve(static_cast<size_t>(num_pixels) * 4);
    auto color_distance = [&](int xa, int ya, int xb, int yb) {
        double s = 0.0;
        for (const auto& channel : channels) {
            double d = channel(ya, xa) - channel(yb, xb);
            s += d * d;
        }
        return static_cast<float>(std::sqrt(s));
    };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int p = y * width + x;
            if (x < width - 1)
                edges.push_back({p, p + 1, color_distance(x, y, x + 1, y)});
            if (y < height - 1)
                edges.push_back({p, p + width, color_distance(x, y, x, y + 1)});
            if (x < width - 1 && y < height - 1)
                edges.push_back({p, p + width + 1, color_distance(x, y, x + 1, y + 1)});
            if (x < width - 1 && y > 0)
                edges.push_back({p, p - width + 1, color_distance(x, y, x + 1, y - 1)});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
        if (a.weight != b.weight) return a.weight < b.weight;
        return std::tie(a.a, a.b) < std::tie(b.a, b.b);
    });

    DisjointSet components(num_pixels);
    std::vector<float> internal_threshold(
        static_cast<size_t>(num_pixels), static_cast<float>(config.segmentation_scale));
    for (const auto& edge : edges) {
        int a = components.find(edge.a);
        int b = components.find(edge.b);
        if (a == b) continue;
        if (edge.weight <= internal_threshold[static_cast<size_t>(a)] &&
            edge.weight <= internal_threshold[static_cast<size_t>(b)]) {
            int root = components.join(a, b);
            internal_threshold[static_cast<size_t>(root)] =
                edge.weight +
                static_cast<float>(config.segmentation_scale / components.size(root));
        }
    }

    // absorb components below the minimum size
    for (const auto& edge : edges) {
        int a = components.find(edge.a);
        int b = components.find(edge.b);
        if (a != b && (components.size(a) < config.min_component_size ||
                       components.size(b) < config.min_component_size))
            components.join(a, b);
    }

    LabelMap map;
    map.width = width;
    map.height = height;
    map.labels.resize(static_cast<size_t>(num_pixels));
    std::map<int, int> compact;  // root -> label, in scan order
    for (int p = 0; p < num_pixels; ++p) {
        int root = components.find(p);
        auto [it, inserted] = compact.try_emplace(root, static_cast<int>(compact.size()));
        if (inserted) it->second = map.num_components++;
        map.labels[static_cast<size_t>(p)] = it->second;
    }
    return map;
}

namespace {

struct Region {
    int size = 0;
    BoundingBox box;
    std::vector<double> hist;  // 3 * 25 bins, L1-normalized
    bool alive = true;
};

double color_similarity(const Region& a, const Region& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.hist.size(); ++i) s += std::min(a.hist[i], b.hist[i]);
    return s;
}

double region_similarity(const Region& a, const Region& b, double image_area) {
    const double size_sim = 1.0 - (a.size + b.size) / image_area;
    const BoundingBox enclosing = box_union(a.box, b.box);
    const double fill_sim =
        1.0 - (static_cast<double>(enclosing.area()) - a.size - b.size) / image_area;
    return color_similarity(a, b) + size_sim + fill_sim;
}

Region merge_regions(const Region& a, const Region& b) {
    Region merged;
    merged.size = a.size + b.size;
    merged.box = box_union(a.box, b.box);
    merged.hist.resize(a.hist.size());
    for (size_t i = 0; i < a.hist.size(); ++i)
        merged.hist[i] = (a.size * a.hist[i] + b.size * b.hist[i]) / merged.size;
    return merged;
}

}  // namespace

std::vector<BoundingBox> selective_search(const cv::Mat& image,
                                          const RegionProposalConfig& config) {
    const LabelMap seg = oversegment(image, config);
    const int width = seg.width, height = seg.height;
    const double image_area = static_cast<double>(width) * height;

    auto channels = to_float_channels(image);
    std::vector<Region> regions(static_cast<size_t>(seg.num_components));
    for (auto& region : regions) {
        region.hist.assign(3 * kHistBinsPerChannel, 0.0);
        region.box = {width, height, 0, 0};  // grown below
    }
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            Region& region = regions[static_cast<size_t>(seg.at(x, y))];
            ++region.size;
            region.box.x0 = std::min(region.box.x0, x);
            region.box.y0 = std::min(region.box.y0, y);
            region.box.x1 = std::max(region.box.x1, x + 1);
            region.box.y1 = std::max(region.box.y1, y + 1);
            for (int c = 0; c < 3; ++c) {
                int bin = std::clamp(static_cast<int>(channels[static_cast<size_t>(c)](y, x) /
                                                      256.0f * kHistBinsPerChannel),
                                     0, kHistBinsPerChannel - 1);
                region.hist[static_cast<size_t>(c * kHistBinsPerChannel + bin)] += 1.0;
            }
        }
    }
    for (auto& region : regions)
        for (double& h : region.hist) h /= region.size * 3.0;

    // region adjacency from 4-neighbor label transitions
    std::vector<std::set<int>> neighbors(regions.size());
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            int here = seg.at(x, y);
            if (x + 1 < width && seg.at(x + 1, y) != here) {
                neighbors[static_cast<size_t>(here)].insert(seg.at(x + 1, y));
                neighbors[static_cast<size_t>(seg.at(x + 1, y))].insert(here);
            }
            if (y + 1 < height && seg.at(x, y + 1) != here) {
                neighbors[static_cast<size_t>(here)].insert(seg.at(x, y + 1));
                neighbors[static_cast<size_t>(seg.at(x, y + 1))].insert(here);
            }
        }
    }

    // greedy hierarchical grouping; ties resolved toward the oldest pair
    std::map<std::pair<int, int>, double> similarity;
    std::set<std::tuple<double, int, int>> queue;  // (-sim, a, b), a < b
    auto link = [&](int a, int b) {
        if (a > b) std::swap(a, b);
        double s = region_similarity(regions[static_cast<size_t>(a)],
                                     regions[static_cast<size_t>(b)], image_area);
        similarity[{a, b}] = s;
        queue.insert({-s, a, b});
    };
    for (size_t a = 0; a < neighbors.size(); ++a)
        for (int b : neighbors[a])
            if (static_cast<int>(a) < b) link(static_cast<int>(a), b);

    while (!queue.empty()) {
        auto [neg_sim, a, b] = *queue.begin();
        queue.erase(queue.begin());
        similarity.erase({a, b});

        int merged_id = static_cast<int>(regions.size());
        regions.push_back(
            merge_regions(regions[static_cast<size_t>(a)], regions[static_cast<size_t>(b)]));
        neighbors.emplace_back();

        std::set<int> adjacent;
        for (int x : neighbors[static_cast<size_t>(a)])
            if (x != b) adjacent.insert(x);
        for (int x : neighbors[static_cast<size_t>(b)])
            if (x != a) adjacent.insert(x);

        for (int old : {a, b}) {
            for (int x : neighbors[static_cast<size_t>(old)]) {
                int lo = std::min(old, x), hi = std::max(old, x);
                auto it = similarity.find({lo, hi});
                if (it != similarity.end()) {
                    queue.erase({-it->second, lo, hi});
                    similarity.erase(it);
                }
                neighbors[static_cast<size_t>(x)].erase(old);
            }
            neighbors[static_cast<size_t>(old)].clear();
            regions[static_cast<size_t>(old)].alive = false;
        }

        for (int x : adjacent) {
            neighbors[static_cast<size_t>(merged_id)].insert(x);
            neighbors[static_cast<size_t>(x)].insert(merged_id);
            link(merged_id, x);
        }
    }

    // every region ever formed, in formation order
    std::vector<BoundingBox> proposals;
    std::set<BoundingBox> seen;
    const double min_area = config.min_box_area_fraction * image_area;
    for (const auto& region : regions) {
        if (static_cast<double>(region.box.area()) < min_area) continue;
        if (!seen.insert(region.box).second) continue;
        proposals.push_back(region.box);
        if (static_cast<int>(proposals.size()) >= config.max_proposals) break;
    }
    return proposals;
}

std::vector<BoundingBox> sliding_grid_proposals(int width, int height,
                                                const RegionProposalConfig& config) {
    if (width < 16 || height < 16)
        throw ImageTooSmall("sliding grid needs at least 16x16 pixels");
    const double base = static_cast<double>(std::min(width, height));
    const double scales[3] = {0.5, 1.0 / 3.0, 0.25};
    const double aspects[2] = {1.0, 2.0};  // w / h

    std::vector<BoundingBox> proposals;
    std::set<BoundingBox> seen;
    const double min_area =
        config.min_box_area_fraction * static_cast<double>(width) * height;
    auto emit = [&](const BoundingBox& box) {
        if (static_cast<double>(box.area()) < min_area) return;
        if (seen.insert(box).second) proposals.push_back(box);
    };

    emit({0, 0, width, height});
    for (double scale : scales) {
        for (double aspect : aspects) {
            int h = std::min(height, std::max(8, static_cast<int>(base * scale / std::sqrt(aspect))));
            int w = std::min(width, std::max(8, static_cast<int>(base * scale * std::sqrt(aspect))));
            int step_x = std::max(1, w / 2);
            int step_y = std::max(1, h / 2);
            for (int y0 = 0; y0 + h <= height; y0 += step_y) {
                for (int x0 = 0; x0 + w <= width; x0 += step_x) {
                    emit({x0, y0, x0 + w, y0 + h});
                    if (x0 + step_x + w > width && x0 + w < width)
                        emit({width - w, y0, width, y0 + h});
                }
                if (y0 + step_y + h > height && y0 + h < height) {
                    for (int x0 = 0; x0 + w <= width; x0 += step_x)
                        emit({x0, height - h, x0 + w, height});
                    emit({width - w, height - h, width, height});
                }
            }
        }
    }
    if (static_cast<int>(proposals.size()) > config.max_proposals)
        proposals.resize(static_cast<size_t>(config.max_proposals));
    return proposals;
}

std::vector<ScoredBox> nms(std::vector<ScoredBox> boxes, double iou_threshold) {
    if (iou_threshold <= 0.0 || iou_threshold > 1.0)
        throw Error("nms threshold must be in (0, 1]");
    std::sort(boxes.begin(), boxes.end(), [](const ScoredBox& p, const ScoredBox& q) {
        if (p.score != q.score) return p.score > q.score;
        if (p.box.area() != q.box.area()) return p.box.area() < q.box.area();
        return p.box < q.box;
    });
    std::vector<ScoredBox> kept;
    for (const auto& candidate : boxes) {
        bool suppressed = false;
        for (const auto& keeper : kept) {
            if (iou(candidate.box, keeper.box) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(candidate);
    }
    return kept;
}

}  // namespace picdesc
