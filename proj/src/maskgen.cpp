#include "uland/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uland::maskgen {

int BinaryMask::foreground_count() const {
    int n = 0;
    for (uint8_t v : px) n += v;
    return n;
}

BinaryMask rasterize_mask(const corpus::LandmarkLabel& label, double delta, int h, int w) {
    if (delta < 0.0) throw InvalidArgument("rasterize_mask: delta must be >= 0");
    BinaryMask mask(h, w);
    for (const auto& p : label.points) {
        if (p.row < 0.0 || p.row > h - 1.0 || p.col < 0.0 || p.col > w - 1.0)
            throw InvalidArgument("rasterize_mask: landmark (" + std::to_string(p.row) + "," +
                                  std::to_string(p.col) + ") outside " + std::to_string(h) + "x" +
                                  std::to_string(w) + " frame");
        // Discs sit on the nearest pixel center; they may clip at borders.
        int cr = static_cast<int>(std::lround(p.row));
        int cc = static_cast<int>(std::lround(p.col));
        int rad = static_cast<int>(std::floor(delta));
        double d2 = delta * delta;
        for (int dr = -rad; dr <= rad; ++dr)
            for (int dc = -rad; dc <= rad; ++dc) {
                if (dr * dr + dc * dc > d2) continue;
                int r = cr + dr, c = cc + dc;
                if (r >= 0 && r < h && c >= 0 && c < w) mask.at(r, c) = 1;
            }
    }
    return mask;
}

namespace {

std::vector<Blob> components_of(const std::vector<float>& p, int h, int w, double threshold) {
    std::vector<uint8_t> fg(static_cast<size_t>(h) * w, 0);
    for (size_t i = 0; i < fg.size(); ++i) fg[i] = p[i] >= threshold ? 1 : 0;

    std::vector<uint8_t> seen(fg.size(), 0);
    std::vector<Blob> blobs;
    std::vector<int> stack;
    for (int r0 = 0; r0 < h; ++r0)
        for (int c0 = 0; c0 < w; ++c0) {
            size_t start = static_cast<size_t>(r0) * w + c0;
            if (!fg[start] || seen[start]) continue;
            Blob blob;
            stack.clear();
            stack.push_back(static_cast<int>(start));
            seen[start] = 1;
            while (!stack.empty()) {
                int idx = stack.back();
                stack.pop_back();
                int r = idx / w, c = idx % w;
                blob.pixel_set.emplace_back(r, c);
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0) continue;
                        int rr = r + dr, cc = c + dc;
                        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                        size_t nidx = static_cast<size_t>(rr) * w + cc;
                        if (fg[nidx] && !seen[nidx]) {
                            seen[nidx] = 1;
                            stack.push_back(static_cast<int>(nidx));
                        }
                    }
            }
            blob.area = static_cast<int>(blob.pixel_set.size());
            blob.equivalent_radius = std::sqrt(blob.area / std::numbers::pi);
            double wsum = 0.0, rsum = 0.0, csum = 0.0;
            for (auto [r, c] : blob.pixel_set) {
                double weight = p[static_cast<size_t>(r) * w + c];
                wsum += weight;
                rsum += weight * r;
                csum += weight * c;
            }
            if (wsum > 0.0) {
                blob.cog = Point{rsum / wsum, csum / wsum};
            } else {
                // all-zero component (only possible at threshold 0): fall back
                // to the unweighted centroid
                for (auto [r, c] : blob.pixel_set) {
                    blob.cog.row += r;
                    blob.cog.col += c;
                }
                blob.cog.row /= blob.area;
                blob.cog.col /= blob.area;
            }
            blobs.push_back(std::move(blob));
        }

    std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
        if (a.area != b.area) return a.area > b.area;
        if (a.cog.row != b.cog.row) return a.cog.row < b.cog.row;
        return a.cog.col < b.cog.col;
    });
    return blobs;
}

}  // namespace

std::vector<Blob> extract_blobs(const std::vector<float>& heatmap, int h, int w, double bin_threshold) {
    if (static_cast<size_t>(h) * w != heatmap.size())
        throw InvalidArgument("extract_blobs: heatmap size does not match h*w");
    return components_of(heatmap, h, w, bin_threshold);
}

std::vector<Blob> extract_blobs(const BinaryMask& mask) {
    std::vector<float> p(mask.px.begin(), mask.px.end());
    return components_of(p, mask.h, mask.w, 0.5);
}

LandmarkDecode decode_landmarks(const std::vector<Blob>& blobs, int /*tau*/, double delta) {
    LandmarkDecode out;
    for (const auto& b : blobs) {
        if (b.equivalent_radius > delta) {
            ++out.tau_hat;
            out.points.push_back(b.cog);
        }
    }
    return out;
}

}  // namespace uland::maskgen
