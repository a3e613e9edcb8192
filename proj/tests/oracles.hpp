#pragma once

// Brute-force reference implementations. Each one recomputes from the
// definitions with nested loops and shares no code with the library beyond
// the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "seedvos/crf.hpp"
#include "seedvos/dense_map.hpp"
#include "seedvos/pixel_graph.hpp"

namespace oracle {

using seedvos::BinaryMask;
using seedvos::DenseMap;
using seedvos::PixelIndex;
using seedvos::RgbImage;

inline double sqdist(const DenseMap& e, PixelIndex a, PixelIndex b) {
    double s = 0.0;
    for (std::size_t i = 0; i < e.channels(); ++i) {
        const double d = double(e.pixel(a)[i]) - double(e.pixel(b)[i]);
        s += d * d;
    }
    return s;
}

inline double sim(const DenseMap& e, PixelIndex a, PixelIndex b) { return 2.0 / (1.0 + std::exp(sqdist(e, a, b))); }

inline std::vector<double> edge_map(const DenseMap& e) {
    const long h = long(e.height()), w = long(e.width());
    std::vector<double> out(std::size_t(h * w), 0.0);
    for (long r = 0; r < h; ++r) {
        for (long c = 0; c < w; ++c) {
            const long dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                const long rr = r + dr[k], cc = c + dc[k];
                if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
                const double v = 1.0 - sim(e, PixelIndex(r * w + c), PixelIndex(rr * w + cc));
                out[std::size_t(r * w + c)] = std::max(out[std::size_t(r * w + c)], v);
            }
        }
    }
    return out;
}

inline std::vector<PixelIndex> candidates(const DenseMap& edges, long n) {
    const long h = long(edges.height()), w = long(edges.width()), half = n / 2;
    std::vector<PixelIndex> out;
    for (long r = 0; r < h; ++r) {
        for (long c = 0; c < w; ++c) {
            bool ok = true;
            for (long rr = r - half; rr <= r + half && ok; ++rr) {
                for (long cc = c - half; cc <= c + half && ok; ++cc) {
                    if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
                    if (edges.at(std::size_t(rr), std::size_t(cc)) < edges.at(std::size_t(r), std::size_t(c))) ok = false;
                }
            }
            if (ok) out.push_back(PixelIndex(r * w + c));
        }
    }
    return out;
}

// Greedy rule restated: seed 1 maximises objectness; seed k minimises the
// largest similarity to seeds 1..k-1, recomputed from scratch each round.
inline std::vector<PixelIndex> diverse_sampling(std::vector<PixelIndex> pool, const DenseMap& e, const DenseMap& o,
                                                std::size_t count) {
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    std::vector<PixelIndex> chosen;
    if (pool.empty() || count == 0) return chosen;
    PixelIndex first = pool[0];
    for (PixelIndex p : pool) {
        if (o[p] > o[first] || (o[p] == o[first] && p < first)) first = p;
    }
    chosen.push_back(first);
    while (chosen.size() < std::min(count, pool.size())) {
        std::optional<PixelIndex> best;
        double best_score = 0.0;
        for (PixelIndex p : pool) {
            if (std::find(chosen.begin(), chosen.end(), p) != chosen.end()) continue;
            double worst = -1.0;
            for (PixelIndex s : chosen) worst = std::max(worst, sim(e, p, s));
            if (!best || worst < best_score || (worst == best_score && p < *best)) {
                best = p;
                best_score = worst;
            }
        }
        chosen.push_back(*best);
    }
    return chosen;
}

// Dense two-label mean field with the kernel evaluated pair by pair.
struct MeanField {
    std::vector<std::vector<double>> foreground;  // after each iteration
};

inline MeanField dense_meanfield(const DenseMap& prob, const RgbImage& img, const seedvos::CrfParams& p, int iterations) {
    const std::size_t h = img.height, w = img.width, n = h * w;
    std::vector<double> ufg(n), ubg(n), q(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::min(std::max(double(prob[i]), 1e-6), 1.0 - 1e-6);
        ufg[i] = -std::log(v);
        ubg[i] = -std::log(1.0 - v);
        q[i] = std::exp(-ufg[i]) / (std::exp(-ufg[i]) + std::exp(-ubg[i]));
    }
    std::vector<double> k(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dy = double(i / w) - double(j / w), dx = double(i % w) - double(j % w);
            const double dp = dy * dy + dx * dx;
            double di = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double d = double(img.data[3 * i + c]) - double(img.data[3 * j + c]);
                di += d * d;
            }
            k[i * n + j] = p.smoothness_weight * std::exp(-dp / (2 * p.smoothness_sxy * p.smoothness_sxy)) +
                           p.appearance_weight * std::exp(-dp / (2 * p.appearance_sxy * p.appearance_sxy) -
                                                          di / (2 * p.appearance_srgb * p.appearance_srgb));
        }
    }
    MeanField out;
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            double mfg = 0.0, mbg = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                mfg += k[i * n + j] * q[j];
                mbg += k[i * n + j] * (1.0 - q[j]);
            }
            const double a = -ufg[i] - mbg, b = -ubg[i] - mfg;
            next[i] = 1.0 / (1.0 + std::exp(b - a));
        }
        q = next;
        out.foreground.push_back(q);
    }
    return out;
}

inline bool on_boundary(const BinaryMask& m, long r, long c) {
    const long h = long(m.height()), w = long(m.width());
    if (!m.at(std::size_t(r), std::size_t(c))) return false;
    const long dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
        const long rr = r + dr[k], cc = c + dc[k];
        if (rr < 0 || cc < 0 || rr >= h || cc >= w || !m.at(std::size_t(rr), std::size_t(cc))) return true;
    }
    return false;
}

// F from all-pairs boundary distances.
inline double boundary_f(const BinaryMask& a, const BinaryMask& b, double tol) {
    std::vector<std::pair<long, long>> ba, bb;
    for (long r = 0; r < long(a.height()); ++r) {
        for (long c = 0; c < long(a.width()); ++c) {
            if (on_boundary(a, r, c)) ba.emplace_back(r, c);
            if (on_boundary(b, r, c)) bb.emplace_back(r, c);
        }
    }
    if (ba.empty() && bb.empty()) return 1.0;
    if (ba.empty() || bb.empty()) return 0.0;
    auto matched = [&](const auto& from, const auto& to) {
        std::size_t hit = 0;
        for (auto [r, c] : from) {
            double best = std::numeric_limits<double>::infinity();
            for (auto [r2, c2] : to) best = std::min(best, std::hypot(double(r - r2), double(c - c2)));
            if (best <= tol) ++hit;
        }
        return double(hit) / double(from.size());
    };
    const double precision = matched(ba, bb), recall = matched(bb, ba);
    return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

inline double min_distance_to(const DenseMap& e, PixelIndex p, const DenseMap& ref, const BinaryMask& ref_mask) {
    double best = std::numeric_limits<double>::infinity();
    for (PixelIndex q = 0; q < ref.pixel_count(); ++q) {
        if (!ref_mask[q]) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < e.channels(); ++i) {
            const double d = double(e.pixel(p)[i]) - double(ref.pixel(q)[i]);
            s += d * d;
        }
        best = std::min(best, s);
    }
    return std::sqrt(best);
}

inline BinaryMask random_mask(std::mt19937_64& rng, std::size_t h, std::size_t w, double density) {
    std::bernoulli_distribution bit(density);
    BinaryMask m(h, w);
    for (std::size_t p = 0; p < h * w; ++p) m.set(p, bit(rng));
    return m;
}

inline std::vector<std::pair<PixelIndex, double>> neighbours(const seedvos::PixelGraph& g, PixelIndex p) {
    const std::size_t w = g.width(), r = p / w, c = p % w;
    std::vector<std::pair<PixelIndex, double>> out;
    if (r > 0) out.emplace_back(p - w, g.down_weight(r - 1, c));
    if (r + 1 < g.height()) out.emplace_back(p + w, g.down_weight(r, c));
    if (c > 0) out.emplace_back(p - 1, g.right_weight(r, c - 1));
    if (c + 1 < w) out.emplace_back(p + 1, g.right_weight(r, c));
    return out;
}

// Min over every simple path from src to dst of the largest edge weight.
inline double minimax_by_enumeration(const seedvos::PixelGraph& g, PixelIndex src, PixelIndex dst) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> on_path(g.node_count(), false);
    auto walk = [&](auto&& self, PixelIndex p, double worst) -> void {
        if (p == dst) {
            best = std::min(best, worst);
            return;
        }
        on_path[p] = true;
        for (auto [q, w] : neighbours(g, p)) {
            if (!on_path[q]) self(self, q, std::max(worst, w));
        }
        on_path[p] = false;
    };
    walk(walk, src, 0.0);
    return best;
}

// Path-length sums by Bellman-Ford relaxation to a fixpoint.
inline std::vector<double> path_lengths(const seedvos::PixelGraph& g, PixelIndex src) {
    std::vector<double> d(g.node_count(), std::numeric_limits<double>::infinity());
    d[src] = 0.0;
    for (bool changed = true; changed;) {
        changed = false;
        for (PixelIndex p = 0; p < g.node_count(); ++p) {
            for (auto [q, w] : neighbours(g, p)) {
                if (d[p] + w < d[q]) {
                    d[q] = d[p] + w;
                    changed = true;
                }
            }
        }
    }
    return d;
}

// Nearest seed by path length, ties to the lower seed index.
inline std::vector<std::int32_t> voronoi(const seedvos::PixelGraph& g, const std::vector<PixelIndex>& seeds) {
    std::vector<std::vector<double>> d;
    for (PixelIndex s : seeds) d.push_back(path_lengths(g, s));
    std::vector<std::int32_t> out(g.node_count(), 0);
    for (PixelIndex p = 0; p < g.node_count(); ++p) {
        for (std::size_t s = 1; s < seeds.size(); ++s) {
            if (d[s][p] < d[std::size_t(out[p])][p]) out[p] = std::int32_t(s);
        }
    }
    return out;
}

inline seedvos::PixelGraph random_graph(std::mt19937_64& rng, std::size_t h, std::size_t w, int levels = 0) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::uniform_int_distribution<int> q(0, std::max(levels - 1, 0));
    auto draw = [&] { return levels > 0 ? float(q(rng)) : u(rng); };
    std::vector<float> hz(h * (w - 1)), vt((h - 1) * w);
    for (float& v : hz) v = draw();
    for (float& v : vt) v = draw();
    return seedvos::PixelGraph(h, w, hz, vt);
}

}  // namespace oracle
