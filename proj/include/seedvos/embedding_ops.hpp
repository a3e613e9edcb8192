#pragma once

#include <span>
#include <vector>

#include "seedvos/dense_map.hpp"

namespace seedvos {

/// A representative pixel of one frame.
struct Seed {
    PixelIndex pixel = 0;
    std::vector<float> embedding;
    float objectness = 0.0f;
};

/// Seeds of one frame, in selection order.
struct SeedSet {
    std::size_t frame = 0;
    std::vector<Seed> seeds;

    std::size_t size() const noexcept { return seeds.size(); }
    bool empty() const noexcept { return seeds.empty(); }
    const Seed& operator[](std::size_t i) const { return seeds[i]; }
    std::vector<PixelIndex> pixels() const;
};

/// Squared Euclidean distance accumulated in double, dimension by dimension.
double squared_distance(std::span<const float> a, std::span<const float> b);

/// Pixel similarity 2 / (1 + exp(|a - b|^2)); 1 for identical vectors and
/// strictly decreasing in the squared distance.
double similarity(std::span<const float> a, std::span<const float> b);
double similarity_from_squared_distance(double d2);

/// Per-pixel max over in-bounds 4-neighbours of (1 - similarity).
DenseMap edge_map(const DenseMap& embedding);

/// Pixels whose edge value is <= every value in the n x n window centred on
/// them (window clipped at the image border; ties are all kept). Returned
/// in row-major order. n must be odd and >= 3.
std::vector<PixelIndex> candidate_points(const DenseMap& edges, std::size_t window);

/// Greedy diverse sampling: start from the candidate with the highest
/// objectness, then repeatedly take the candidate whose largest similarity
/// to the already selected seeds is smallest. Ties go to the lowest pixel
/// index. Stops after min(count, |candidates|) seeds.
SeedSet sample_diverse_seeds(std::span<const PixelIndex> candidates, const DenseMap& embedding,
                             const DenseMap& objectness, std::size_t count, std::size_t frame = 0);

}  // namespace seedvos
