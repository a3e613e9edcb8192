#include "seedvos/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include <json.hpp>

#include "seedvos/embedding_ops.hpp"
#include "seedvos/error.hpp"
#include "seedvos/parallel.hpp"

namespace seedvos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_size(const BinaryMask& a, const BinaryMask& b) {
    if (!a.same_size(b)) {
        fail(ErrorCode::DimensionMismatch, "masks differ in size: " + std::to_string(a.height()) + "x" +
                                               std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                                               "x" + std::to_string(b.width()));
    }
}

// 1-D squared distance transform of a sampled function (lower envelope of
// parabolas), in place.
void edt_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v, std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    int first = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] < kInf) {
            first = q;
            break;
        }
    }
    if (first < 0) {
        std::fill(d.begin(), d.end(), kInf);
        f = d;
        return;
    }
    v[0] = first;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = first + 1; q < n; ++q) {
        if (f[q] == kInf) continue;
        auto meet = [&](int p) {
            return ((f[q] + q * static_cast<double>(q)) - (f[p] + p * static_cast<double>(p))) / (2.0 * (q - p));
        };
        double s = meet(v[k]);
        // z[0] is -inf, so this stops at k == 0 at the latest.
        while (s <= z[k]) s = meet(v[--k]);
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
    f = d;
}

// Fraction of `from` pixels within the tolerance of the other boundary.
double matched_fraction(const BinaryMask& from, const std::vector<double>& to_distance, double tol2) {
    std::size_t matched = 0, count = 0;
    for (std::size_t p = 0; p < from.pixel_count(); ++p) {
        if (!from[p]) continue;
        ++count;
        if (to_distance[p] <= tol2) ++matched;
    }
    return count ? static_cast<double>(matched) / static_cast<double>(count) : 0.0;
}

std::vector<std::size_t> mask_pixels(const BinaryMask& m, bool value) {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < m.pixel_count(); ++p) {
        if (m[p] == value) out.push_back(p);
    }
    return out;
}

// Exact nearest-neighbour search over a fixed set of embeddings. Distances
// are computed exactly as squared_distance does, so results match a linear
// scan bit for bit.
class NearestIndex {
public:
    NearestIndex(const DenseMap& emb, std::span<const std::size_t> pixels) : dim_(emb.channels()) {
        // Repeated vectors cannot change a minimum; dropping them also keeps
        // piecewise-constant maps from collapsing into one huge leaf.
        std::vector<std::span<const float>> unique;
        for (std::size_t p : pixels) unique.push_back(emb.pixel(p));
        auto less = [](std::span<const float> a, std::span<const float> b) {
            return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
        };
        auto same = [](std::span<const float> a, std::span<const float> b) {
            return std::equal(a.begin(), a.end(), b.begin(), b.end());
        };
        std::sort(unique.begin(), unique.end(), less);
        unique.erase(std::unique(unique.begin(), unique.end(), same), unique.end());
        points_.reserve(unique.size() * dim_);
        for (const auto& e : unique) points_.insert(points_.end(), e.begin(), e.end());
        order_.resize(unique.size());
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
        if (!order_.empty()) build(0, order_.size());
    }

    bool empty() const noexcept { return order_.empty(); }

    // Squared distance to the nearest point; infinity if the set is empty.
    double query(std::span<const float> v) const {
        double best = kInf;
        if (!nodes_.empty()) search(0, v, best);
        return best;
    }

private:
    static constexpr std::size_t kLeaf = 16;

    struct Node {
        std::size_t begin, end;
        std::size_t axis = 0;
        float split = 0.0f;
        std::size_t left = 0, right = 0;  // 0 marks a leaf
    };

    float coord(std::size_t i, std::size_t axis) const { return points_[i * dim_ + axis]; }

    std::size_t build(std::size_t begin, std::size_t end) {
        const std::size_t id = nodes_.size();
        nodes_.push_back({begin, end});
        if (end - begin <= kLeaf) return id;
        std::size_t axis = 0;
        float widest = -1.0f;
        for (std::size_t a = 0; a < dim_; ++a) {
            float lo = std::numeric_limits<float>::infinity(), hi = -lo;
            for (std::size_t i = begin; i < end; ++i) {
                lo = std::min(lo, coord(order_[i], a));
                hi = std::max(hi, coord(order_[i], a));
            }
            if (hi - lo > widest) {
                widest = hi - lo;
                axis = a;
            }
        }
        if (widest <= 0.0f) return id;  // all points coincide
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                         order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::size_t a, std::size_t b) { return coord(a, axis) < coord(b, axis); });
        nodes_[id].axis = axis;
        nodes_[id].split = coord(order_[mid], axis);
        const std::size_t left = build(begin, mid);
        const std::size_t right = build(mid, end);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    void search(std::size_t id, std::span<const float> v, double& best) const {
        const Node& n = nodes_[id];
        if (n.left == 0) {
            for (std::size_t i = n.begin; i < n.end; ++i) {
                const std::span<const float> pt(points_.data() + order_[i] * dim_, dim_);
                best = std::min(best, squared_distance(v, pt));
            }
            return;
        }
        // Left holds coordinates <= split, right holds >= split.
        const double gap = static_cast<double>(v[n.axis]) - static_cast<double>(n.split);
        const std::size_t near = gap <= 0 ? n.left : n.right, far = gap <= 0 ? n.right : n.left;
        search(near, v, best);
        // The plane bound is a lower bound on every distance in the far half;
        // the margin keeps rounding from pruning an exact tie.
        if (gap * gap * (1.0 - 1e-9) <= best) search(far, v, best);
    }

    std::size_t dim_;
    std::vector<float> points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

void check_gt(const Sequence& seq, std::span<const BinaryMask> gt) {
    if (gt.size() != seq.frame_count()) {
        fail(ErrorCode::InvalidArgument, "need one ground-truth mask per frame (" + std::to_string(seq.frame_count()) +
                                             "), got " + std::to_string(gt.size()));
    }
    for (const auto& g : gt) {
        if (g.height() != seq.height() || g.width() != seq.width()) {
            fail(ErrorCode::DimensionMismatch, "ground-truth mask size differs from the sequence");
        }
    }
}

}  // namespace

double region_similarity(const BinaryMask& pred, const BinaryMask& gt) {
    check_same_size(pred, gt);
    std::size_t inter = 0, uni = 0;
    for (std::size_t p = 0; p < pred.pixel_count(); ++p) {
        inter += (pred[p] && gt[p]) ? 1 : 0;
        uni += (pred[p] || gt[p]) ? 1 : 0;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask boundary_pixels(const BinaryMask& mask) {
    const std::size_t h = mask.height(), w = mask.width();
    BinaryMask out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            if (!mask.at(r, c)) continue;
            const bool edge = r == 0 || c == 0 || r + 1 == h || c + 1 == w || !mask.at(r - 1, c) ||
                              !mask.at(r + 1, c) || !mask.at(r, c - 1) || !mask.at(r, c + 1);
            out.set(r, c, edge);
        }
    }
    return out;
}

std::vector<double> squared_distance_transform(const BinaryMask& sources) {
    const std::size_t h = sources.height(), w = sources.width();
    std::vector<double> grid(h * w);
    for (std::size_t p = 0; p < grid.size(); ++p) grid[p] = sources[p] ? 0.0 : kInf;

    const std::size_t n = std::max(h, w);
    std::vector<double> f, d;
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    // Columns, then rows.
    for (std::size_t c = 0; c < w; ++c) {
        f.resize(h);
        d.resize(h);
        for (std::size_t r = 0; r < h; ++r) f[r] = grid[r * w + c];
        edt_1d(f, d, v, z);
        for (std::size_t r = 0; r < h; ++r) grid[r * w + c] = f[r];
    }
    for (std::size_t r = 0; r < h; ++r) {
        f.assign(grid.begin() + static_cast<long>(r * w), grid.begin() + static_cast<long>((r + 1) * w));
        d.resize(w);
        edt_1d(f, d, v, z);
        std::copy(f.begin(), f.end(), grid.begin() + static_cast<long>(r * w));
    }
    return grid;
}

double default_boundary_tolerance(std::size_t height, std::size_t width) {
    const double diag = std::sqrt(static_cast<double>(height * height + width * width));
    return std::ceil(0.008 * diag);
}

double boundary_measure(const BinaryMask& pred, const BinaryMask& gt, double tolerance) {
    check_same_size(pred, gt);
    const BinaryMask bp = boundary_pixels(pred), bg = boundary_pixels(gt);
    const std::size_t np = bp.count(), ng = bg.count();
    if (np == 0 && ng == 0) return 1.0;
    if (np == 0 || ng == 0) return 0.0;
    const double tol2 = tolerance * tolerance;
    const double precision = matched_fraction(bp, squared_distance_transform(bg), tol2);
    const double recall = matched_fraction(bg, squared_distance_transform(bp), tol2);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double seed_accuracy(std::span<const PixelIndex> seeds, std::span<const BinaryMask> gt) {
    if (seeds.size() != gt.size()) fail(ErrorCode::InvalidArgument, "need one seed per annotated frame");
    if (seeds.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        if (seeds[k] >= gt[k].pixel_count()) fail(ErrorCode::InvalidArgument, "seed pixel outside the mask");
        hit += gt[k][seeds[k]] ? 1 : 0;
    }
    return static_cast<double>(hit) / static_cast<double>(seeds.size());
}

SequenceScores evaluate_sequence(const std::string& name, std::span<const BinaryMask> pred,
                                 std::span<const BinaryMask> gt, double tolerance) {
    if (pred.size() != gt.size()) {
        fail(ErrorCode::InvalidArgument, "frame count mismatch: " + std::to_string(pred.size()) + " predictions vs " +
                                             std::to_string(gt.size()) + " ground-truth masks");
    }
    SequenceScores s;
    s.sequence = name;
    s.frames.resize(pred.size());
    parallel_for(pred.size(), [&](std::size_t k) {
        const double tol = tolerance > 0 ? tolerance : default_boundary_tolerance(gt[k].height(), gt[k].width());
        s.frames[k] = {k, region_similarity(pred[k], gt[k]), boundary_measure(pred[k], gt[k], tol)};
    });
    for (const auto& f : s.frames) {
        s.mean_region += f.region;
        s.mean_boundary += f.boundary;
    }
    if (!s.frames.empty()) {
        s.mean_region /= static_cast<double>(s.frames.size());
        s.mean_boundary /= static_cast<double>(s.frames.size());
    }
    return s;
}

void write_scores_csv(std::span<const SequenceScores> scores, const fs::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << "sequence,frame,J,F\n" << std::setprecision(6) << std::fixed;
    for (const auto& s : scores) {
        for (const auto& f : s.frames) out << s.sequence << ',' << f.frame << ',' << f.region << ',' << f.boundary << '\n';
    }
}

void write_scores_json(std::span<const SequenceScores> scores, const fs::path& path) {
    nlohmann::json doc;
    doc["sequences"] = nlohmann::json::array();
    double j = 0.0, f = 0.0;
    for (const auto& s : scores) {
        nlohmann::json e{{"sequence", s.sequence},
                         {"frames", s.frames.size()},
                         {"J_mean", s.mean_region},
                         {"F_mean", s.mean_boundary}};
        if (s.seed_accuracy) e["seed_accuracy"] = *s.seed_accuracy;
        doc["sequences"].push_back(std::move(e));
        j += s.mean_region;
        f += s.mean_boundary;
    }
    const double n = scores.empty() ? 1.0 : static_cast<double>(scores.size());
    doc["J_mean"] = j / n;
    doc["F_mean"] = f / n;
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

std::vector<DriftPoint> embedding_drift(const Sequence& seq, std::span<const BinaryMask> gt,
                                        std::vector<std::string>* diagnostics) {
    check_gt(seq, gt);
    const DenseMap& ref = seq.frames[0].embedding;
    const NearestIndex ref_fg(ref, mask_pixels(gt[0], true)), ref_bg(ref, mask_pixels(gt[0], false));

    std::vector<DriftPoint> out(seq.frame_count());
    parallel_for(seq.frame_count(), [&](std::size_t k) {
        out[k].frame = k;
        const DenseMap& emb = seq.frames[k].embedding;
        auto mean_nearest = [&](bool value, const NearestIndex& refs) -> std::optional<double> {
            const auto pixels = mask_pixels(gt[k], value);
            if (pixels.empty() || refs.empty()) return std::nullopt;
            double sum = 0.0;
            for (std::size_t p : pixels) sum += std::sqrt(refs.query(emb.pixel(p)));
            return sum / static_cast<double>(pixels.size());
        };
        out[k].foreground = mean_nearest(true, ref_fg);
        out[k].background = mean_nearest(false, ref_bg);
    });
    if (diagnostics) {
        for (const auto& d : out) {
            if (!d.foreground || !d.background) {
                diagnostics->push_back("frame " + std::to_string(d.frame) +
                                       ": empty foreground or background region, drift skipped");
            }
        }
    }
    return out;
}

std::vector<std::optional<double>> misclassified_fg_fraction(const Sequence& seq, std::span<const BinaryMask> gt,
                                                             std::vector<std::string>* diagnostics) {
    check_gt(seq, gt);
    const DenseMap& ref = seq.frames[0].embedding;
    const NearestIndex ref_fg(ref, mask_pixels(gt[0], true)), ref_bg(ref, mask_pixels(gt[0], false));

    std::vector<std::optional<double>> out(seq.frame_count());
    parallel_for(seq.frame_count(), [&](std::size_t k) {
        const auto pixels = mask_pixels(gt[k], true);
        if (pixels.empty() || ref_fg.empty() || ref_bg.empty()) return;
        const DenseMap& emb = seq.frames[k].embedding;
        std::size_t wrong = 0;
        for (std::size_t p : pixels) {
            if (ref_bg.query(emb.pixel(p)) < ref_fg.query(emb.pixel(p))) ++wrong;
        }
        out[k] = static_cast<double>(wrong) / static_cast<double>(pixels.size());
    });
    if (diagnostics) {
        for (std::size_t k = 0; k < out.size(); ++k) {
            if (!out[k]) diagnostics->push_back("frame " + std::to_string(k) + ": no foreground to classify, skipped");
        }
    }
    return out;
}

}  // namespace seedvos
