#pragma once

#include <string>
#include <vector>

namespace picdesc {

// Minimal row-major dense matrix of doubles.
struct Mat2D {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat2D() = default;
    Mat2D(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

// m x n grid of scaled image-text similarity logits, rows = images, cols = texts.
struct RelevanceMatrix {
    Mat2D logits;
    std::vector<std::string> image_ids;
    std::vector<std::string> text_ids;

    int num_images() const { return logits.rows; }
    int num_texts() const { return logits.cols; }
};

}  // namespace picdesc
