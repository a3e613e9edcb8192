#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seedvos/dense_map.hpp"

namespace seedvos {

/// 4-connected lattice over an H x W frame. Edge weights are the Euclidean
/// distances between neighbouring embedding vectors.
class PixelGraph {
public:
    PixelGraph() = default;

    /// `horizontal` has H*(W-1) entries (edge between (r,c) and (r,c+1) at
    /// r*(W-1)+c); `vertical` has (H-1)*W entries (edge between (r,c) and
    /// (r+1,c) at r*W+c).
    PixelGraph(std::size_t height, std::size_t width, std::vector<float> horizontal, std::vector<float> vertical);

    static PixelGraph from_embeddings(const DenseMap& embedding);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t node_count() const noexcept { return height_ * width_; }

    float right_weight(std::size_t row, std::size_t col) const { return horizontal_[row * (width_ - 1) + col]; }
    float down_weight(std::size_t row, std::size_t col) const { return vertical_[row * width_ + col]; }

    /// Weight of the edge between two 4-adjacent pixels.
    float weight(PixelIndex a, PixelIndex b) const;

    std::span<const float> horizontal() const noexcept { return horizontal_; }
    std::span<const float> vertical() const noexcept { return vertical_; }

    /// Calls fn(neighbour, weight) for each in-bounds 4-neighbour of p.
    template <class Fn>
    void for_each_neighbor(PixelIndex p, Fn&& fn) const {
        const std::size_t r = p / width_, c = p % width_;
        if (r > 0) fn(p - width_, vertical_[p - width_]);
        if (c > 0) fn(p - 1, horizontal_[r * (width_ - 1) + c - 1]);
        if (c + 1 < width_) fn(p + 1, horizontal_[r * (width_ - 1) + c]);
        if (r + 1 < height_) fn(p + width_, vertical_[p]);
    }

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<float> horizontal_;
    std::vector<float> vertical_;
};

/// Geodesic Voronoi partition: label[p] is the index of the seed with the
/// smallest sum-of-weights path distance to p.
struct RegionLabeling {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::int32_t> labels;
    std::vector<std::size_t> counts;  // pixels per seed; may be 0 for a seed tied with a lower index
    std::vector<double> distance;     // geodesic distance to the owning seed

    std::size_t region_count() const noexcept { return counts.size(); }
};

/// Multi-source Dijkstra over path-length sums (accumulated in double).
/// Equal distances go to the lowest seed index.
RegionLabeling assign_regions(const PixelGraph& graph, std::span<const PixelIndex> seed_pixels);

/// Minimax distance from the nearest source: min over paths of the largest
/// edge weight on the path. 0 at the sources.
DenseMap bottleneck_distances(const PixelGraph& graph, std::span<const PixelIndex> sources);

/// Single-source shortest path lengths (double). Used for per-seed checks.
std::vector<double> geodesic_distances(const PixelGraph& graph, PixelIndex source);

}  // namespace seedvos
