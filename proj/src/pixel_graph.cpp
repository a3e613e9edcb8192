#include "seedvos/pixel_graph.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <tuple>

#include "seedvos/embedding_ops.hpp"
#include "seedvos/error.hpp"

namespace seedvos {

namespace {

void check_pixels(const PixelGraph& g, std::span<const PixelIndex> pixels, const char* what) {
    if (pixels.empty()) fail(ErrorCode::EmptyInput, std::string("empty ") + what + " set");
    for (PixelIndex p : pixels) {
        if (p >= g.node_count()) fail(ErrorCode::InvalidArgument, std::string(what) + " pixel out of range");
    }
}

}  // namespace

PixelGraph::PixelGraph(std::size_t height, std::size_t width, std::vector<float> horizontal,
                       std::vector<float> vertical)
    : height_(height), width_(width), horizontal_(std::move(horizontal)), vertical_(std::move(vertical)) {
    if (height == 0 || width == 0) fail(ErrorCode::InvalidArgument, "graph needs at least one pixel");
    if (horizontal_.size() != height * (width - 1) || vertical_.size() != (height - 1) * width) {
        fail(ErrorCode::ShapeMismatch, "edge weight arrays do not match a " + std::to_string(height) + "x" +
                                           std::to_string(width) + " lattice");
    }
    for (float v : horizontal_) {
        if (!(v >= 0.0f) || !std::isfinite(v)) fail(ErrorCode::InvalidValue, "edge weights must be finite and >= 0");
    }
    for (float v : vertical_) {
        if (!(v >= 0.0f) || !std::isfinite(v)) fail(ErrorCode::InvalidValue, "edge weights must be finite and >= 0");
    }
}

PixelGraph PixelGraph::from_embeddings(const DenseMap& emb) {
    const std::size_t h = emb.height(), w = emb.width();
    std::vector<float> horizontal(h * (w - 1)), vertical((h - 1) * w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c + 1 < w; ++c) {
            const PixelIndex p = r * w + c;
            horizontal[r * (w - 1) + c] = static_cast<float>(std::sqrt(squared_distance(emb.pixel(p), emb.pixel(p + 1))));
        }
    }
    for (std::size_t r = 0; r + 1 < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const PixelIndex p = r * w + c;
            vertical[p] = static_cast<float>(std::sqrt(squared_distance(emb.pixel(p), emb.pixel(p + w))));
        }
    }
    return PixelGraph(h, w, std::move(horizontal), std::move(vertical));
}

float PixelGraph::weight(PixelIndex a, PixelIndex b) const {
    if (a > b) std::swap(a, b);
    if (b == a + 1 && a / width_ == b / width_) return horizontal_[(a / width_) * (width_ - 1) + a % width_];
    if (b == a + width_) return vertical_[a];
    fail(ErrorCode::InvalidArgument, "pixels are not 4-adjacent");
}

RegionLabeling assign_regions(const PixelGraph& g, std::span<const PixelIndex> seed_pixels) {
    check_pixels(g, seed_pixels, "seed");
    const std::size_t n = g.node_count();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    RegionLabeling out;
    out.height = g.height();
    out.width = g.width();
    out.labels.assign(n, -1);
    out.distance.assign(n, kInf);
    out.counts.assign(seed_pixels.size(), 0);

    // Ordered lexicographically by (distance, seed index) so that the label
    // settled first at a pixel is the lowest-index seed among the nearest.
    using Entry = std::tuple<double, std::int32_t, PixelIndex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::vector<bool> settled(n, false);

    for (std::size_t s = 0; s < seed_pixels.size(); ++s) {
        const PixelIndex p = seed_pixels[s];
        const auto label = static_cast<std::int32_t>(s);
        if (out.labels[p] == -1 || label < out.labels[p]) {
            out.labels[p] = label;
            out.distance[p] = 0.0;
            queue.emplace(0.0, label, p);
        }
    }

    while (!queue.empty()) {
        const auto [d, label, p] = queue.top();
        queue.pop();
        if (settled[p] || d != out.distance[p] || label != out.labels[p]) continue;
        settled[p] = true;
        g.for_each_neighbor(p, [&, d = d, label = label](PixelIndex q, float w) {
            if (settled[q]) return;
            const double nd = d + static_cast<double>(w);
            if (nd < out.distance[q] || (nd == out.distance[q] && label < out.labels[q])) {
                out.distance[q] = nd;
                out.labels[q] = label;
                queue.emplace(nd, label, q);
            }
        });
    }
    for (auto l : out.labels) ++out.counts[static_cast<std::size_t>(l)];
    return out;
}

DenseMap bottleneck_distances(const PixelGraph& g, std::span<const PixelIndex> sources) {
    check_pixels(g, sources, "source");
    const std::size_t n = g.node_count();
    DenseMap dist = DenseMap::planar(g.height(), g.width(), std::numeric_limits<float>::infinity());

    using Entry = std::pair<float, PixelIndex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::vector<bool> settled(n, false);
    for (PixelIndex s : sources) {
        dist[s] = 0.0f;
        queue.emplace(0.0f, s);
    }
    while (!queue.empty()) {
        const auto [d, p] = queue.top();
        queue.pop();
        if (settled[p]) continue;
        settled[p] = true;
        g.for_each_neighbor(p, [&, d = d](PixelIndex q, float w) {
            const float nd = std::max(d, w);
            if (nd < dist[q]) {
                dist[q] = nd;
                queue.emplace(nd, q);
            }
        });
    }
    return dist;
}

std::vector<double> geodesic_distances(const PixelGraph& g, PixelIndex source) {
    const PixelIndex src[] = {source};
    check_pixels(g, src, "source");
    std::vector<double> dist(g.node_count(), std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, PixelIndex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.emplace(0.0, source);
    while (!queue.empty()) {
        const auto [d, p] = queue.top();
        queue.pop();
        if (d != dist[p]) continue;
        g.for_each_neighbor(p, [&, d = d](PixelIndex q, float w) {
            const double nd = d + static_cast<double>(w);
            if (nd < dist[q]) {
                dist[q] = nd;
                queue.emplace(nd, q);
            }
        });
    }
    return dist;
}

}  // namespace seedvos
