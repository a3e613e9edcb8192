#include "seedvos/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>

#include "seedvos/error.hpp"
#include "seedvos/parallel.hpp"

namespace seedvos::synthetic {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<float> axis(std::size_t dim, std::size_t i, float scale) {
    std::vector<float> v(dim, 0.0f);
    v.at(i) = scale;
    return v;
}

std::vector<float> add(std::vector<float> a, const std::vector<float>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

std::string numbered(const char* prefix, std::size_t k, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%05zu%s", prefix, k, ext);
    return buf;
}

struct Placement {
    long row0, col0, row1, col1;  // inclusive bounding box
};

Placement place(const ObjectSpec& o, std::size_t k) {
    const double dr = o.velocity_row * static_cast<double>(k);
    const double dc = o.velocity_col * static_cast<double>(k);
    if (o.shape == Shape::Rectangle) {
        const long r0 = std::lround(o.row + dr), c0 = std::lround(o.col + dc);
        return {r0, c0, r0 + std::lround(o.height) - 1, c0 + std::lround(o.width) - 1};
    }
    const double cr = o.row + dr, cc = o.col + dc;
    return {static_cast<long>(std::ceil(cr - o.radius)), static_cast<long>(std::ceil(cc - o.radius)),
            static_cast<long>(std::floor(cr + o.radius)), static_cast<long>(std::floor(cc + o.radius))};
}

bool covers(const ObjectSpec& o, std::size_t k, long r, long c) {
    const Placement p = place(o, k);
    if (r < p.row0 || r > p.row1 || c < p.col0 || c > p.col1) return false;
    if (o.shape == Shape::Rectangle) return true;
    const double dr = static_cast<double>(r) - (o.row + o.velocity_row * static_cast<double>(k));
    const double dc = static_cast<double>(c) - (o.col + o.velocity_col * static_cast<double>(k));
    return dr * dr + dc * dc <= o.radius * o.radius;
}

void validate(const SceneSpec& spec) {
    if (spec.height == 0 || spec.width == 0 || spec.frames == 0 || spec.embedding_dim == 0) {
        fail(ErrorCode::InvalidArgument, "scene needs positive size, frame count and embedding width");
    }
    auto check_vec = [&](const std::vector<float>& v, const char* what) {
        if (!v.empty() && v.size() != spec.embedding_dim) {
            fail(ErrorCode::InvalidArgument, std::string(what) + " does not match the embedding width");
        }
    };
    check_vec(spec.background_centroid, "background centroid");
    check_vec(spec.background_drift, "background drift");
    for (std::size_t j = 0; j < spec.objects.size(); ++j) {
        const auto& o = spec.objects[j];
        if (o.centroid.size() != spec.embedding_dim) {
            fail(ErrorCode::InvalidArgument, "object " + std::to_string(j) + " centroid does not match the embedding width");
        }
        check_vec(o.drift, "object drift");
        for (std::size_t k = 0; k < spec.frames; ++k) {
            const Placement p = place(o, k);
            if (p.row0 < 0 || p.col0 < 0 || p.row1 >= static_cast<long>(spec.height) ||
                p.col1 >= static_cast<long>(spec.width) || p.row1 < p.row0 || p.col1 < p.col0) {
                fail(ErrorCode::InvalidArgument,
                     "object " + std::to_string(j) + " leaves the image on frame " + std::to_string(k));
            }
        }
    }
}

}  // namespace

std::uint64_t NormalStream::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double NormalStream::uniform() {
    // 53 random bits, shifted off zero.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double NormalStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

std::array<double, 2> ObjectSpec::region_flow() const {
    return flow ? *flow : std::array<double, 2>{velocity_col, velocity_row};
}

bool ObjectSpec::moving() const {
    const auto f = region_flow();
    return f[0] != 0.0 || f[1] != 0.0 || velocity_row != 0.0 || velocity_col != 0.0;
}

GeneratedSequence generate_sequence(const SceneSpec& spec) {
    validate(spec);
    const std::size_t h = spec.height, w = spec.width, e = spec.embedding_dim, n = spec.frames;
    const std::vector<float> bg_centroid =
        spec.background_centroid.empty() ? std::vector<float>(e, 0.0f) : spec.background_centroid;

    GeneratedSequence out;
    out.sequence.name = "synthetic";
    out.sequence.frames.resize(n);
    out.sequence.gt.resize(n);
    out.gt.resize(n);
    out.object_masks.resize(n);

    parallel_for(n, [&](std::size_t k) {
        NormalStream rng(mix64(spec.seed ^ mix64(k + 1)));
        // Owner of each pixel: -1 background, otherwise the topmost object.
        std::vector<int> owner(h * w, -1);
        for (std::size_t j = 0; j < spec.objects.size(); ++j) {
            for (std::size_t r = 0; r < h; ++r) {
                for (std::size_t c = 0; c < w; ++c) {
                    if (covers(spec.objects[j], k, static_cast<long>(r), static_cast<long>(c))) {
                        owner[r * w + c] = static_cast<int>(j);
                    }
                }
            }
        }

        // Centroids after k frames of drift.
        auto drifted = [&](const std::vector<float>& centroid, const std::vector<float>& drift) {
            std::vector<float> v = centroid;
            if (!drift.empty()) {
                for (std::size_t i = 0; i < e; ++i) v[i] += static_cast<float>(static_cast<double>(drift[i]) * k);
            }
            return v;
        };
        std::vector<std::vector<float>> centroids;
        for (const auto& o : spec.objects) centroids.push_back(drifted(o.centroid, o.drift));
        const std::vector<float> bg_now = drifted(bg_centroid, spec.background_drift);

        DenseFeatureFrame& f = out.sequence.frames[k];
        f.embedding = DenseMap(h, w, e);
        f.objectness = DenseMap::planar(h, w);
        f.flow = DenseMap(h, w, 2);
        f.rgb = RgbImage(h, w);
        BinaryMask gt(h, w);
        std::vector<BinaryMask> masks(spec.objects.size(), BinaryMask(h, w));

        for (std::size_t p = 0; p < h * w; ++p) {
            const int o = owner[p];
            const ObjectSpec* obj = o >= 0 ? &spec.objects[static_cast<std::size_t>(o)] : nullptr;
            const std::vector<float>& centroid = obj ? centroids[static_cast<std::size_t>(o)] : bg_now;
            const double noise = obj ? obj->noise : spec.background_noise;
            auto emb = f.embedding.pixel(p);
            for (std::size_t i = 0; i < e; ++i) emb[i] = static_cast<float>(centroid[i] + noise * rng.normal());

            const double level = obj ? obj->objectness : spec.background_objectness;
            f.objectness[p] = static_cast<float>(std::clamp(level + spec.objectness_noise * rng.normal(), 0.0, 1.0));

            const auto flow = obj ? obj->region_flow() : spec.background_flow;
            auto fl = f.flow.pixel(p);
            fl[0] = static_cast<float>(flow[0] + spec.flow_noise * rng.normal());
            fl[1] = static_cast<float>(flow[1] + spec.flow_noise * rng.normal());

            const auto& color = obj ? obj->color : spec.background_color;
            std::uint8_t* px = f.rgb->pixel(p);
            for (int ch = 0; ch < 3; ++ch) {
                px[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(color[ch] + spec.color_noise * rng.normal()), 0L, 255L));
            }

            if (obj) {
                masks[static_cast<std::size_t>(o)].set(p, true);
                if (obj->foreground()) gt.set(p, true);
            }
        }
        out.gt[k] = gt;
        out.sequence.gt[k] = gt;
        out.object_masks[k] = std::move(masks);
    });
    out.sequence.annotation0 = out.gt[0];
    return out;
}

SceneSpec preset(const std::string& name, std::uint64_t seed) {
    SceneSpec s;
    s.seed = seed;
    const std::size_t e = s.embedding_dim;

    ObjectSpec mover;
    mover.shape = Shape::Rectangle;
    mover.row = 10;
    mover.col = 10;
    mover.height = 24;
    mover.width = 24;
    mover.velocity_row = 0.5;
    mover.velocity_col = 5.0;
    mover.centroid = axis(e, 0, 1.5f);
    mover.objectness = 0.9f;
    mover.color = {200, 60, 60};

    // Same noise, size class and objectness as the mover; its centroid is
    // closer to the mover than to the background.
    ObjectSpec distractor;
    distractor.shape = Shape::Disk;
    distractor.row = 72;
    distractor.col = 40;
    distractor.radius = 14;
    distractor.centroid = add(axis(e, 0, 1.5f), axis(e, 1, 1.0f));
    distractor.objectness = 0.9f;
    distractor.color = {60, 60, 200};

    if (name == "clean") {
        s.objects = {mover, distractor};
    } else if (name == "drift") {
        mover.drift = axis(e, 1, 0.15f);
        distractor.drift = axis(e, 1, 0.15f);
        s.objects = {mover, distractor};
    } else if (name == "still") {
        mover.noise = 0.0;
        distractor.noise = 0.0;
        s.background_noise = 0.0;
        s.objects = {mover, distractor};
    } else if (name == "ranking") {
        mover.velocity_row = 0.0;
        mover.velocity_col = 4.0;
        mover.objectness = 0.7f;

        ObjectSpec statue = distractor;
        statue.row = 50;
        statue.col = 120;
        statue.radius = 12;
        statue.objectness = 0.95f;

        ObjectSpec water;
        water.shape = Shape::Rectangle;
        water.row = 78;
        water.col = 0;
        water.height = 18;
        water.width = static_cast<double>(s.width);
        water.flow = std::array<double, 2>{6.0, 0.0};
        water.centroid = axis(e, 2, 1.5f);
        water.objectness = 0.15f;
        water.color = {40, 80, 180};
        water.stuff = true;
        s.objects = {mover, statue, water};
    } else {
        fail(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
    }
    return s;
}

std::vector<std::string> preset_names() { return {"clean", "drift", "ranking", "still"}; }

fs::path write_sequence(const GeneratedSequence& g, const fs::path& dir) {
    fs::create_directories(dir / "gt");
    SequenceManifest m;
    m.name = g.sequence.name;
    for (std::size_t k = 0; k < g.sequence.frames.size(); ++k) {
        const auto& f = g.sequence.frames[k];
        FrameEntry e;
        e.embedding = dir / numbered("embedding_", k, ".npy");
        e.objectness = dir / numbered("objectness_", k, ".npy");
        e.flow = dir / numbered("flow_", k, ".npy");
        e.rgb = dir / numbered("rgb_", k, ".png");
        e.gt = dir / "gt" / numbered("", k, ".png");
        save_tensor(f.embedding, e.embedding);
        save_tensor(f.objectness, e.objectness);
        save_tensor(f.flow, e.flow);
        save_rgb(*f.rgb, *e.rgb);
        save_mask(g.gt[k], *e.gt);
        m.frames.push_back(std::move(e));
    }
    m.annotation0 = m.frames.at(0).gt;
    const fs::path manifest = dir / "manifest.json";
    save_manifest(m, manifest);
    return manifest;
}

double oracle_minimax(const PixelGraph& g, PixelIndex source, PixelIndex target) {
    if (g.height() > 4 || g.width() > 4) fail(ErrorCode::InvalidArgument, "minimax oracle is limited to 4x4 grids");
    if (source >= g.node_count() || target >= g.node_count()) fail(ErrorCode::InvalidArgument, "pixel out of range");
    if (source == target) return 0.0;

    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> visited(g.node_count(), false);
    std::function<void(PixelIndex, double)> walk = [&](PixelIndex p, double worst) {
        if (worst >= best) return;
        if (p == target) {
            best = worst;
            return;
        }
        visited[p] = true;
        g.for_each_neighbor(p, [&](PixelIndex q, float w) {
            if (!visited[q]) walk(q, std::max(worst, static_cast<double>(w)));
        });
        visited[p] = false;
    };
    walk(source, 0.0);
    return best;
}

std::vector<std::int32_t> oracle_geodesic(const PixelGraph& g, std::span<const PixelIndex> seeds) {
    if (g.height() > 8 || g.width() > 8) fail(ErrorCode::InvalidArgument, "geodesic oracle is limited to 8x8 grids");
    if (seeds.empty()) fail(ErrorCode::EmptyInput, "empty seed set");
    std::vector<std::vector<double>> dist;
    for (PixelIndex s : seeds) dist.push_back(geodesic_distances(g, s));
    std::vector<std::int32_t> labels(g.node_count(), 0);
    for (std::size_t p = 0; p < g.node_count(); ++p) {
        for (std::size_t s = 1; s < seeds.size(); ++s) {
            if (dist[s][p] < dist[static_cast<std::size_t>(labels[p])][p]) labels[p] = static_cast<std::int32_t>(s);
        }
    }
    return labels;
}

}  // namespace seedvos::synthetic
