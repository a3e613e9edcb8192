#include "seedvos/embedding_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seedvos/error.hpp"

namespace seedvos {

std::vector<PixelIndex> SeedSet::pixels() const {
    std::vector<PixelIndex> out;
    out.reserve(seeds.size());
    for (const auto& s : seeds) out.push_back(s.pixel);
    return out;
}

double squared_distance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        fail(ErrorCode::DimensionMismatch, "embedding dimensions differ: " + std::to_string(a.size()) + " vs " +
                                               std::to_string(b.size()));
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        d2 += d * d;
    }
    return d2;
}

double similarity_from_squared_distance(double d2) { return 2.0 / (1.0 + std::exp(d2)); }

double similarity(std::span<const float> a, std::span<const float> b) {
    return similarity_from_squared_distance(squared_distance(a, b));
}

DenseMap edge_map(const DenseMap& embedding) {
    const std::size_t h = embedding.height(), w = embedding.width();
    if (embedding.channels() == 0) fail(ErrorCode::InvalidArgument, "edge_map needs at least one channel");
    DenseMap edges = DenseMap::planar(h, w);

    // Horizontal and vertical pair dissimilarities are computed once and
    // shared by both endpoints.
    std::vector<double> right(h * w, 0.0), down(h * w, 0.0);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const PixelIndex p = r * w + c;
            if (c + 1 < w) right[p] = 1.0 - similarity(embedding.pixel(p), embedding.pixel(p + 1));
            if (r + 1 < h) down[p] = 1.0 - similarity(embedding.pixel(p), embedding.pixel(p + w));
        }
    }
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const PixelIndex p = r * w + c;
            double m = 0.0;
            if (c + 1 < w) m = std::max(m, right[p]);
            if (c > 0) m = std::max(m, right[p - 1]);
            if (r + 1 < h) m = std::max(m, down[p]);
            if (r > 0) m = std::max(m, down[p - w]);
            edges[p] = static_cast<float>(m);
        }
    }
    return edges;
}

std::vector<PixelIndex> candidate_points(const DenseMap& edges, std::size_t window) {
    if (window < 3 || window % 2 == 0) {
        fail(ErrorCode::InvalidArgument, "candidate window must be odd and >= 3, got " + std::to_string(window));
    }
    const std::size_t h = edges.height(), w = edges.width();
    const std::size_t half = window / 2;

    // Separable running minimum: first along rows, then along columns.
    // Clipped windows make both passes exact.
    std::vector<float> row_min(h * w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const std::size_t c0 = c >= half ? c - half : 0;
            const std::size_t c1 = std::min(w - 1, c + half);
            float m = std::numeric_limits<float>::infinity();
            for (std::size_t k = c0; k <= c1; ++k) m = std::min(m, edges.at(r, k));
            row_min[r * w + c] = m;
        }
    }

    std::vector<PixelIndex> out;
    for (std::size_t r = 0; r < h; ++r) {
        const std::size_t r0 = r >= half ? r - half : 0;
        const std::size_t r1 = std::min(h - 1, r + half);
        for (std::size_t c = 0; c < w; ++c) {
            float m = std::numeric_limits<float>::infinity();
            for (std::size_t k = r0; k <= r1; ++k) m = std::min(m, row_min[k * w + c]);
            if (edges.at(r, c) <= m) out.push_back(r * w + c);
        }
    }
    return out;
}

SeedSet sample_diverse_seeds(std::span<const PixelIndex> candidates, const DenseMap& embedding,
                             const DenseMap& objectness, std::size_t count, std::size_t frame) {
    if (candidates.empty()) fail(ErrorCode::EmptyInput, "no candidate points to sample seeds from");
    if (!embedding.same_size(objectness)) {
        fail(ErrorCode::DimensionMismatch, "embedding and objectness maps differ in size");
    }

    // Work in row-major order so the first minimum found is the tie winner.
    std::vector<PixelIndex> pool(candidates.begin(), candidates.end());
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    for (PixelIndex p : pool) {
        if (p >= embedding.pixel_count()) fail(ErrorCode::InvalidArgument, "candidate pixel out of range");
    }

    const std::size_t n = pool.size();
    const std::size_t target = std::min(count, n);
    SeedSet out;
    out.frame = frame;
    if (target == 0) return out;

    auto take = [&](std::size_t i) {
        Seed s;
        s.pixel = pool[i];
        auto e = embedding.pixel(pool[i]);
        s.embedding.assign(e.begin(), e.end());
        s.objectness = objectness[pool[i]];
        out.seeds.push_back(std::move(s));
    };

    std::size_t first = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (objectness[pool[i]] > objectness[pool[first]]) first = i;
    }

    std::vector<bool> selected(n, false);
    // Largest similarity of each candidate to the current seed set.
    std::vector<double> max_sim(n, -1.0);
    std::size_t last = first;
    selected[first] = true;
    take(first);

    while (out.seeds.size() < target) {
        const auto last_emb = embedding.pixel(pool[last]);
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (selected[i]) continue;
            max_sim[i] = std::max(max_sim[i], similarity(embedding.pixel(pool[i]), last_emb));
            if (best == n || max_sim[i] < max_sim[best]) best = i;
        }
        selected[best] = true;
        last = best;
        take(best);
    }
    return out;
}

}  // namespace seedvos
