#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "seedvos/pixel_graph.hpp"
#include "seedvos/synthetic.hpp"
#include "support.hpp"

using namespace seedvos;

TEST_CASE("graph from embeddings") {
    SUBCASE("constant") {
        const PixelGraph g = PixelGraph::from_embeddings(DenseMap(3, 4, 2, 1.5f));
        for (float w : g.horizontal()) CHECK(w == 0.0f);
        for (float w : g.vertical()) CHECK(w == 0.0f);
    }
    SUBCASE("single edge") {
        const PixelGraph g = PixelGraph::from_embeddings(DenseMap(1, 2, 2, std::vector<float>{0, 0, 0, 2}));
        REQUIRE(g.horizontal().size() == 1);
        CHECK(g.horizontal()[0] == 2.0f);
        CHECK(g.vertical().empty());
        CHECK(g.weight(0, 1) == 2.0f);
        CHECK(g.weight(1, 0) == 2.0f);
    }
    SUBCASE("random map") {
        std::mt19937_64 rng(2);
        std::normal_distribution<float> n(0.0f, 1.0f);
        DenseMap e(6, 6, 3);
        for (float& v : e.data()) v = n(rng);
        const PixelGraph g = PixelGraph::from_embeddings(e);
        for (std::size_t r = 0; r < 6; ++r) {
            for (std::size_t c = 0; c < 6; ++c) {
                const PixelIndex p = r * 6 + c;
                if (c + 1 < 6) CHECK(g.right_weight(r, c) == static_cast<float>(std::sqrt(oracle::sqdist(e, p, p + 1))));
                if (r + 1 < 6) CHECK(g.down_weight(r, c) == static_cast<float>(std::sqrt(oracle::sqdist(e, p, p + 6))));
            }
        }
    }
    SUBCASE("bad weights") {
        CHECK(error_code_of([] { PixelGraph(2, 2, {0.1f, -0.5f}, {0.0f, 0.0f}); }) == ErrorCode::InvalidValue);
        CHECK(error_code_of([] { PixelGraph(2, 2, {0.1f}, {0.0f, 0.0f}); }) == ErrorCode::ShapeMismatch);
    }
}

TEST_CASE("geodesic regions") {
    SUBCASE("one seed") {
        std::mt19937_64 rng(4);
        const PixelGraph g = oracle::random_graph(rng, 5, 6);
        const std::vector<PixelIndex> seeds{17};
        const RegionLabeling r = assign_regions(g, seeds);
        for (auto l : r.labels) CHECK(l == 0);
        CHECK(r.counts == std::vector<std::size_t>{30});
        CHECK(r.distance[17] == 0.0);
    }
    SUBCASE("zero weights tie everywhere") {
        const PixelGraph g(3, 3, std::vector<float>(6, 0.0f), std::vector<float>(6, 0.0f));
        const std::vector<PixelIndex> seeds{8, 0};
        const RegionLabeling r = assign_regions(g, seeds);
        for (auto l : r.labels) CHECK(l == 0);
        CHECK(r.counts == std::vector<std::size_t>{9, 0});
    }
    SUBCASE("uniform weights, two seeds") {
        const PixelGraph g(4, 5, std::vector<float>(16, 1.0f), std::vector<float>(15, 1.0f));
        const std::vector<PixelIndex> seeds{0, 19};
        CHECK(assign_regions(g, seeds).labels == oracle::voronoi(g, seeds));
    }
    SUBCASE("random graphs match per-seed relaxation") {
        std::mt19937_64 rng(9);
        for (int t = 0; t < 40; ++t) {
            const std::size_t h = 2 + t % 5, w = 2 + (t / 5) % 5;
            const PixelGraph g = oracle::random_graph(rng, h, w, t % 2 ? 3 : 0);
            std::uniform_int_distribution<PixelIndex> pick(0, h * w - 1);
            std::vector<PixelIndex> seeds;
            while (seeds.size() < 3) {
                const PixelIndex p = pick(rng);
                if (std::find(seeds.begin(), seeds.end(), p) == seeds.end()) seeds.push_back(p);
            }
            const RegionLabeling r = assign_regions(g, seeds);
            CHECK(r.labels == oracle::voronoi(g, seeds));
            CHECK(r.labels == synthetic::oracle_geodesic(g, seeds));
        }
    }
    SUBCASE("no seeds") {
        const PixelGraph g(2, 2, {1, 1}, {1, 1});
        CHECK(error_code_of([&] { assign_regions(g, {}); }) == ErrorCode::EmptyInput);
    }
}

TEST_CASE("bottleneck distances") {
    SUBCASE("path") {
        const PixelGraph g(1, 4, {0.2f, 0.7f, 0.1f}, {});
        const std::vector<PixelIndex> src{0};
        const DenseMap d = bottleneck_distances(g, src);
        CHECK(d[0] == 0.0f);
        CHECK(d[1] == 0.2f);
        CHECK(d[2] == 0.7f);
        CHECK(d[3] == 0.7f);
    }
    SUBCASE("two paths on a 2x2 grid") {
        // top = (0,0)-(0,1), bottom = (1,0)-(1,1), left = (0,0)-(1,0), right = (0,1)-(1,1)
        const PixelGraph g(2, 2, {0.9f, 0.3f}, {0.2f, 0.1f});
        const std::vector<PixelIndex> src{0};
        CHECK(bottleneck_distances(g, src)[3] == 0.3f);
    }
    SUBCASE("random grids match path enumeration") {
        std::mt19937_64 rng(21);
        for (int t = 0; t < 25; ++t) {
            const PixelGraph g = oracle::random_graph(rng, 1 + t % 4, t % 4 == 0 ? 2 + (t / 4) % 3 : 1 + (t / 4) % 4);
            const std::vector<PixelIndex> src{0};
            const DenseMap d = bottleneck_distances(g, src);
            for (PixelIndex p = 0; p < g.node_count(); ++p) {
                CHECK(d[p] == static_cast<float>(oracle::minimax_by_enumeration(g, 0, p)));
                CHECK(synthetic::oracle_minimax(g, 0, p) == oracle::minimax_by_enumeration(g, 0, p));
            }
        }
    }
    SUBCASE("several sources take the minimum") {
        std::mt19937_64 rng(6);
        const PixelGraph g = oracle::random_graph(rng, 4, 4);
        const std::vector<PixelIndex> src{0, 15};
        const DenseMap d = bottleneck_distances(g, src);
        for (PixelIndex p = 0; p < 16; ++p) {
            const double want = std::min(oracle::minimax_by_enumeration(g, 0, p), oracle::minimax_by_enumeration(g, 15, p));
            CHECK(d[p] == static_cast<float>(want));
        }
    }
}
