#pragma once
// Training-mask genesis and heatmap decoding: landmark coordinates become
// rasterized discs, predicted heatmaps become blobs with sub-pixel
// probability-weighted centers of gravity.

#include <cstdint>
#include <vector>

#include "uland/common.hpp"
#include "uland/corpus.hpp"

namespace uland::maskgen {

struct BinaryMask {
    int h = 0, w = 0;
    std::vector<uint8_t> px;  // {0,1}

    BinaryMask() = default;
    BinaryMask(int height, int width) : h(height), w(width), px(static_cast<size_t>(height) * width, 0) {}
    uint8_t at(int r, int c) const { return px[static_cast<size_t>(r) * w + c]; }
    uint8_t& at(int r, int c) { return px[static_cast<size_t>(r) * w + c]; }
    int foreground_count() const;
};

struct Blob {
    std::vector<std::pair<int, int>> pixel_set;  // (row, col), 8-connected
    int area = 0;
    double equivalent_radius = 0.0;  // sqrt(area / pi)
    Point cog;                       // probability-weighted center of gravity
};

// Foreground = union of discs of radius delta around each (rounded) landmark.
// Throws InvalidArgument when a point lies outside the frame.
BinaryMask rasterize_mask(const corpus::LandmarkLabel& label, double delta, int h, int w);

// 8-connected components of {p >= bin_threshold}, sorted by area descending,
// ties by COG (row, col) ascending.
std::vector<Blob> extract_blobs(const std::vector<float>& heatmap, int h, int w, double bin_threshold);
std::vector<Blob> extract_blobs(const BinaryMask& mask);  // mask as its own probability map

struct LandmarkDecode {
    int tau_hat = 0;            // blobs with equivalent_radius > delta
    std::vector<Point> points;  // COGs of the qualifying blobs
};

LandmarkDecode decode_landmarks(const std::vector<Blob>& blobs, int tau, double delta);

}  // namespace uland::maskgen
