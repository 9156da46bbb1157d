#pragma once

#include <cstdint>
#include <tuple>

namespace picdesc {

// Axis-aligned pixel box: [x0, x1) x [y0, y1), top-left inclusive.
struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    std::int64_t area() const {
        return static_cast<std::int64_t>(width()) * static_cast<std::int64_t>(height());
    }
    bool valid() const { return x0 >= 0 && y0 >= 0 && x0 < x1 && y0 < y1; }
    bool within(int image_width, int image_height) const {
        return valid() && x1 <= image_width && y1 <= image_height;
    }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
    friend auto operator<=>(const BoundingBox& a, const BoundingBox& b) {
        return std::tie(a.x0, a.y0, a.x1, a.y1) <=> std::tie(b.x0, b.y0, b.x1, b.y1);
    }
};

std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b);

// |a ∩ b| / |a ∪ b| on pixel areas. Exact integer areas, one final division.
double iou(const BoundingBox& a, const BoundingBox& b);

BoundingBox box_union(const BoundingBox& a, const BoundingBox& b);

}  // namespace picdesc
