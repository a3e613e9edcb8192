#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seedvos/crf.hpp"
#include "seedvos/embedding_ops.hpp"
#include "seedvos/feature_store.hpp"
#include "seedvos/motion_saliency.hpp"
#include "seedvos/pixel_graph.hpp"
#include "seedvos/seed_tracking.hpp"

namespace seedvos {

struct PipelineConfig {
    std::size_t num_seeds = 100;
    std::size_t window = 9;
    /// Unset means num_seeds / 5.
    std::optional<std::size_t> num_background_seeds;
    double alpha = 0.5;
    double objectness_bg = 0.3;
    double motion_bg = 0.01;
    double alpha_semi = 0.7;
    RankingMode ranking = RankingMode::Combined;
    /// Rebuild the seed pools every this many frames; unset = never.
    std::optional<std::size_t> adapt_every = 1;
    /// Seeds and tracks are computed on every stride-th frame.
    std::size_t track_stride = 1;
    bool crf_enabled = true;
    CrfParams crf;

    std::size_t background_seed_count() const;
    void validate() const;
};

/// Variable-count list of equal-length embedding vectors.
class EmbeddingSet {
public:
    EmbeddingSet() = default;
    explicit EmbeddingSet(std::size_t dim) : dim_(dim) {}

    void add(std::span<const float> v);
    std::size_t size() const noexcept { return dim_ ? data_.size() / dim_ : 0; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return data_.empty(); }
    std::span<const float> operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

private:
    std::size_t dim_ = 0;
    std::vector<float> data_;
};

/// Representative foreground/background embeddings taken from one frame.
struct SeedPools {
    std::size_t frame = 0;
    EmbeddingSet foreground;
    EmbeddingSet background;
    /// Seed indices that supplied the pools (empty for region-mean pools).
    std::vector<std::size_t> foreground_seeds;
    std::vector<std::size_t> background_seeds;
};

/// Per-frame quantities derived before any cross-frame reasoning.
struct FrameAnalysis {
    std::size_t frame = 0;
    SeedSet seeds;
    PixelGraph graph;
    RegionLabeling regions;
    std::vector<FlowVector> flows;
    MotionModel motion;
    std::vector<double> saliency;
};

FrameAnalysis analyze_frame(const DenseFeatureFrame& frame, std::size_t index, const PipelineConfig& config);

/// Pixels strictly closer (in bottleneck distance) to the foreground seed
/// than to every background seed. Ties are background.
BinaryMask initial_foreground(const PixelGraph& graph, PixelIndex foreground_seed,
                              std::span<const PixelIndex> background_seeds);

/// The foreground seed followed, in index order, by every other seed whose
/// region overlaps `initial` on more than alpha of its pixels.
std::vector<std::size_t> expand_foreground_seeds(const BinaryMask& initial, const RegionLabeling& regions,
                                                 std::size_t foreground_seed, double alpha);

/// Seeds with O <= objectness_bg or M <= motion_bg, minus the foreground pool.
std::vector<std::size_t> background_seed_pool(std::span<const double> objectness, std::span<const double> motion,
                                              double objectness_bg, double motion_bg,
                                              std::span<const std::size_t> foreground_pool);

/// Builds foreground/background pools on an analysed frame given the
/// selected foreground seed.
SeedPools build_seed_pools(const FrameAnalysis& analysis, std::size_t foreground_seed, const PipelineConfig& config);

/// R_FG / (R_FG + R_BG) per pixel, R being the best similarity to a pool.
DenseMap foreground_probability(const DenseMap& embedding, const SeedPools& pools);

/// Pools from a first-frame annotation: regions covered by the mask on at
/// least alpha_semi of their area contribute the mean embedding of the
/// covered part; regions not touching the mask contribute their mean.
SeedPools semisupervised_seed_pools(const DenseFeatureFrame& frame, const RegionLabeling& regions,
                                    const BinaryMask& annotation, double alpha_semi);

struct FrameResult {
    DenseMap probability;
    BinaryMask mask;
    std::size_t pool_frame = 0;
};

struct SegmentationResult {
    std::vector<FrameResult> frames;
    std::vector<std::size_t> track_frames;
    std::optional<std::size_t> selected_track;
    std::vector<double> track_scores;
    /// Foreground seed pixel on each track frame (unsupervised mode only).
    std::vector<PixelIndex> foreground_seed_pixels;
    std::vector<SeedPools> pools;
    std::vector<std::string> diagnostics;
    std::map<std::string, double> timings;
};

/// Frames between adaptation points reuse the pools of the most recent one.
std::vector<std::size_t> pool_schedule(std::size_t frame_count, const PipelineConfig& config);

SegmentationResult segment_sequence(const Sequence& sequence, const PipelineConfig& config);

/// Classifies every frame with pools derived from a frame-0 annotation.
SegmentationResult segment_semisupervised(const Sequence& sequence, const BinaryMask& annotation,
                                          const PipelineConfig& config);

}  // namespace seedvos
