#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "seedvos/evaluation.hpp"
#include "seedvos/parallel.hpp"
#include "seedvos/segmenter.hpp"
#include "seedvos/synthetic.hpp"
#include "support.hpp"

using namespace seedvos;

namespace {

RegionLabeling labeling(std::size_t h, std::size_t w, std::vector<std::int32_t> labels, std::size_t regions) {
    RegionLabeling r;
    r.height = h;
    r.width = w;
    r.counts.assign(regions, 0);
    for (auto l : labels) ++r.counts[static_cast<std::size_t>(l)];
    r.labels = std::move(labels);
    r.distance.assign(h * w, 0.0);
    return r;
}

BinaryMask mask_from(std::size_t h, std::size_t w, const std::vector<int>& bits) {
    BinaryMask m(h, w);
    for (std::size_t p = 0; p < bits.size(); ++p) m.set(p, bits[p] != 0);
    return m;
}

double mean_j(const SegmentationResult& r, const std::vector<BinaryMask>& gt) {
    double s = 0.0;
    for (std::size_t k = 0; k < gt.size(); ++k) s += region_similarity(r.frames[k].mask, gt[k]);
    return s / static_cast<double>(gt.size());
}

synthetic::SceneSpec small_scene(const std::string& preset) {
    auto spec = synthetic::preset(preset);
    spec.frames = 6;
    return spec;
}

}  // namespace

TEST_CASE("initial foreground") {
    SUBCASE("all distances tie") {
        const PixelGraph g(3, 3, std::vector<float>(6, 0.0f), std::vector<float>(6, 0.0f));
        const std::vector<PixelIndex> bg{8};
        CHECK(initial_foreground(g, 0, bg).count() == 0);
    }
    SUBCASE("two blobs") {
        // Columns 0-2 form blob A, 3-5 blob B, joined by heavy edges.
        DenseMap e(4, 6, 2);
        std::mt19937_64 rng(2);
        std::normal_distribution<float> n(0.0f, 0.05f);
        for (std::size_t p = 0; p < 24; ++p) {
            e.pixel(p)[0] = (p % 6 < 3 ? 0.0f : 3.0f) + n(rng);
            e.pixel(p)[1] = n(rng);
        }
        const PixelGraph g = PixelGraph::from_embeddings(e);
        const std::vector<PixelIndex> bg{11};
        const BinaryMask m = initial_foreground(g, 6, bg);
        for (PixelIndex p = 0; p < 24; ++p) {
            const double dfg = oracle::minimax_by_enumeration(g, 6, p);
            const double dbg = oracle::minimax_by_enumeration(g, 11, p);
            CHECK(m[p] == (static_cast<float>(dfg) < static_cast<float>(dbg)));
            CHECK(m[p] == (p % 6 < 3));
        }
    }
    SUBCASE("seed pixel is foreground") {
        std::mt19937_64 rng(5);
        const PixelGraph g = oracle::random_graph(rng, 4, 4);
        const std::vector<PixelIndex> bg{15};
        CHECK(initial_foreground(g, 0, bg)[0]);
    }
}

TEST_CASE("foreground seed expansion") {
    const auto r = labeling(2, 4, {0, 0, 1, 1, 0, 0, 2, 2}, 3);
    SUBCASE("full region") {
        const BinaryMask m = mask_from(2, 4, {1, 1, 1, 1, 1, 1, 0, 0});
        CHECK(expand_foreground_seeds(m, r, 0, 0.5) == std::vector<std::size_t>{0, 1});
    }
    SUBCASE("exactly alpha is excluded") {
        const BinaryMask m = mask_from(2, 4, {1, 1, 1, 0, 1, 1, 1, 0});
        CHECK(expand_foreground_seeds(m, r, 0, 0.5) == std::vector<std::size_t>{0});
    }
    SUBCASE("random counting") {
        std::mt19937_64 rng(8);
        std::uniform_int_distribution<int> lab(0, 5);
        for (int t = 0; t < 20; ++t) {
            std::vector<std::int32_t> labels(80);
            for (auto& l : labels) l = lab(rng);
            const auto rr = labeling(8, 10, labels, 6);
            const BinaryMask m = oracle::random_mask(rng, 8, 10, 0.5);
            std::vector<std::size_t> want{2};
            for (int j = 0; j < 6; ++j) {
                if (j == 2) continue;
                int in = 0, all = 0;
                for (std::size_t p = 0; p < 80; ++p) {
                    if (labels[p] != j) continue;
                    ++all;
                    in += m[p];
                }
                if (2 * in > all) want.push_back(static_cast<std::size_t>(j));
            }
            CHECK(expand_foreground_seeds(m, rr, 2, 0.5) == want);
        }
    }
}

TEST_CASE("background seed pool") {
    const std::vector<double> o{0.2, 0.5, 0.9}, m{0.5, 0.005, 0.5};
    CHECK(background_seed_pool(o, m, 0.3, 0.01, {}) == std::vector<std::size_t>{0, 1});
    CHECK(background_seed_pool(std::vector<double>{0.3, 0.9}, std::vector<double>{1.0, 1.0}, 0.3, 0.01, {}) ==
          std::vector<std::size_t>{0});
    const std::vector<std::size_t> fg{0};
    CHECK(background_seed_pool(o, m, 0.3, 0.01, fg) == std::vector<std::size_t>{1});
    CHECK(error_code_of([] {
              background_seed_pool(std::vector<double>{0.8, 0.9}, std::vector<double>{0.5, 0.5}, 0.3, 0.01, {});
          }) == ErrorCode::EmptyInput);
}

TEST_CASE("foreground probability") {
    SUBCASE("symmetric") {
        SeedPools pools;
        pools.foreground = EmbeddingSet(1);
        pools.background = EmbeddingSet(1);
        pools.foreground.add(std::vector<float>{1.0f});
        pools.background.add(std::vector<float>{-1.0f});
        const DenseMap e(1, 1, 1, 0.0f);
        CHECK(foreground_probability(e, pools)[0] == 0.5f);
    }
    SUBCASE("R_FG = 1, R_BG = 0.25") {
        // 2 / (1 + e^d) = 0.25 at d = ln 7.
        SeedPools pools;
        pools.foreground = EmbeddingSet(1);
        pools.background = EmbeddingSet(1);
        pools.foreground.add(std::vector<float>{0.0f});
        pools.background.add(std::vector<float>{static_cast<float>(std::sqrt(std::log(7.0)))});
        const DenseMap e(1, 1, 1, 0.0f);
        CHECK(foreground_probability(e, pools)[0] == doctest::Approx(0.8).epsilon(1e-6));
    }
    SUBCASE("random frame against the double loop") {
        std::mt19937_64 rng(14);
        std::normal_distribution<float> n(0.0f, 0.8f);
        DenseMap e(6, 7, 3);
        for (float& v : e.data()) v = n(rng);
        SeedPools pools;
        pools.foreground = EmbeddingSet(3);
        pools.background = EmbeddingSet(3);
        std::vector<std::vector<float>> fg, bg;
        for (int i = 0; i < 4; ++i) fg.push_back({n(rng), n(rng), n(rng)});
        for (int i = 0; i < 5; ++i) bg.push_back({n(rng), n(rng), n(rng)});
        for (auto& v : fg) pools.foreground.add(v);
        for (auto& v : bg) pools.background.add(v);
        const DenseMap prob = foreground_probability(e, pools);
        for (PixelIndex p = 0; p < 42; ++p) {
            auto best = [&](const std::vector<std::vector<float>>& set) {
                double r = 0.0;
                for (const auto& v : set) {
                    double d2 = 0.0;
                    for (int c = 0; c < 3; ++c) d2 += (double(e.pixel(p)[c]) - v[c]) * (double(e.pixel(p)[c]) - v[c]);
                    r = std::max(r, 2.0 / (1.0 + std::exp(d2)));
                }
                return r;
            };
            const double rf = best(fg), rb = best(bg);
            CHECK(prob[p] == doctest::Approx(rf / (rf + rb)).epsilon(1e-6));
        }
    }
    SUBCASE("far from both pools stays finite") {
        SeedPools pools;
        pools.foreground = EmbeddingSet(1);
        pools.background = EmbeddingSet(1);
        pools.foreground.add(std::vector<float>{40.0f});
        pools.background.add(std::vector<float>{-41.0f});
        const DenseMap e(1, 1, 1, 0.0f);
        const float p = foreground_probability(e, pools)[0];
        CHECK(std::isfinite(p));
        CHECK(p > 0.5f);
    }
}

TEST_CASE("semi-supervised pools") {
    DenseFeatureFrame f;
    f.embedding = DenseMap(1, 6, 1, std::vector<float>{1, 2, 3, 4, 5, 6});
    const auto r = labeling(1, 6, {0, 0, 1, 1, 2, 2}, 3);
    SUBCASE("inside, outside and half") {
        const BinaryMask g = mask_from(1, 6, {1, 1, 1, 0, 0, 0});
        const SeedPools pools = semisupervised_seed_pools(f, r, g, 0.7);
        REQUIRE(pools.foreground.size() == 1);
        CHECK(pools.foreground[0][0] == 1.5f);
        REQUIRE(pools.background.size() == 1);
        CHECK(pools.background[0][0] == 5.5f);
    }
    SUBCASE("mean over the covered part only") {
        DenseFeatureFrame big;
        big.embedding = DenseMap(1, 10, 1, std::vector<float>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
        const auto r2 = labeling(1, 10, {0, 0, 0, 0, 0, 0, 0, 0, 1, 1}, 2);
        const BinaryMask g = mask_from(1, 10, {1, 1, 1, 1, 1, 1, 0, 0, 0, 0});
        const SeedPools pools = semisupervised_seed_pools(big, r2, g, 0.7);
        REQUIRE(pools.foreground.size() == 1);
        CHECK(pools.foreground[0][0] == 3.5f);
        REQUIRE(pools.background.size() == 1);
        CHECK(pools.background[0][0] == 9.5f);
    }
    SUBCASE("nothing covered") {
        const BinaryMask g(1, 6);
        CHECK(error_code_of([&] { semisupervised_seed_pools(f, r, g, 0.7); }) == ErrorCode::EmptyInput);
    }
}

TEST_CASE("pool schedule") {
    PipelineConfig c;
    c.adapt_every = std::nullopt;
    for (auto k : pool_schedule(7, c)) CHECK(k == 0);
    c.adapt_every = 1;
    CHECK(pool_schedule(4, c) == std::vector<std::size_t>{0, 1, 2, 3});
    c.adapt_every = 3;
    CHECK(pool_schedule(7, c) == std::vector<std::size_t>{0, 0, 0, 3, 3, 3, 6});
    c.track_stride = 2;
    CHECK(pool_schedule(7, c) == std::vector<std::size_t>{0, 0, 0, 2, 2, 2, 6});
}

TEST_CASE("config validation") {
    PipelineConfig c;
    CHECK(c.background_seed_count() == 20);
    c.window = 8;
    CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
    c = PipelineConfig{};
    c.adapt_every = 0;
    CHECK(error_code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
    c = PipelineConfig{};
    c.num_seeds = 3;
    CHECK(c.background_seed_count() == 1);
}

TEST_CASE("pipeline on a short clean sequence") {
    const auto gen = synthetic::generate_sequence(small_scene("clean"));
    PipelineConfig c;
    c.crf_enabled = false;
    const auto r = segment_sequence(gen.sequence, c);
    REQUIRE(r.frames.size() == 6);
    CHECK(r.selected_track.has_value());
    CHECK(r.foreground_seed_pixels.size() == 6);
    CHECK(mean_j(r, gen.gt) >= 0.85);
    for (std::size_t k = 0; k < 6; ++k) CHECK(r.frames[k].pool_frame == k);

    SUBCASE("no adaptation reuses frame 0 and keeps frame 0 identical") {
        PipelineConfig never = c;
        never.adapt_every = std::nullopt;
        const auto r2 = segment_sequence(gen.sequence, never);
        for (const auto& f : r2.frames) CHECK(f.pool_frame == 0);
        CHECK(r2.pools.size() == 1);
        CHECK(r2.frames[0].mask == r.frames[0].mask);
        CHECK(r2.frames[0].probability == r.frames[0].probability);
    }
    SUBCASE("deterministic across thread counts") {
        set_max_threads(1);
        const auto a = segment_sequence(gen.sequence, c);
        set_max_threads(4);
        const auto b = segment_sequence(gen.sequence, c);
        set_max_threads(0);
        for (std::size_t k = 0; k < 6; ++k) CHECK(a.frames[k].probability == b.frames[k].probability);
    }
    SUBCASE("track stride") {
        PipelineConfig s = c;
        s.track_stride = 2;
        const auto r3 = segment_sequence(gen.sequence, s);
        CHECK(r3.track_frames == std::vector<std::size_t>{0, 2, 4});
        CHECK(r3.frames[5].pool_frame == 4);
        CHECK(mean_j(r3, gen.gt) >= 0.85);
    }
    SUBCASE("semi-supervised") {
        const auto rs = segment_semisupervised(gen.sequence, gen.gt[0], c);
        CHECK(mean_j(rs, gen.gt) >= 0.85);
    }
    SUBCASE("crf needs rgb") {
        Sequence seq = gen.sequence;
        seq.frames[3].rgb.reset();
        PipelineConfig crf = c;
        crf.crf_enabled = true;
        crf.crf.truncated = true;
        crf.crf.iterations = 1;
        const auto code = error_code_of([&] { segment_sequence(seq, crf); });
        CHECK(code == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("pipeline is agnostic to the embedding width") {
    auto spec = small_scene("clean");
    spec.frames = 4;
    spec.embedding_dim = 64;
    for (auto& o : spec.objects) {
        std::vector<float> c(64, 0.0f);
        std::copy(o.centroid.begin(), o.centroid.end(), c.begin());
        o.centroid = c;
    }
    const auto gen = synthetic::generate_sequence(spec);
    PipelineConfig c;
    c.crf_enabled = false;
    const auto r = segment_sequence(gen.sequence, c);
    CHECK(mean_j(r, gen.gt) >= 0.85);
}
