#include "picdesc/geometry.hpp"

#include <algorithm>

namespace picdesc {

std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const int x0 = std::max(a.x0, b.x0);
    const int y0 = std::max(a.y0, b.y0);
    const int x1 = std::min(a.x1, b.x1);
    const int y1 = std::min(a.y1, b.y1);
    if (x1 <= x0 || y1 <= y0) return 0;
    return static_cast<std::int64_t>(x1 - x0) * static_cast<std::int64_t>(y1 - y0);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const std::int64_t inter = intersection_area(a, b);
    const std::int64_t uni = a.area() + b.area() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

BoundingBox box_union(const BoundingBox& a, const BoundingBox& b) {
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0),
            std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

}  // namespace picdesc
