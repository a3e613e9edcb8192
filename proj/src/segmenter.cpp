#include "seedvos/segmenter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "seedvos/error.hpp"
#include "seedvos/parallel.hpp"

namespace seedvos {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// log(1 + e^x) without overflow.
double log1p_exp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double min_squared_distance(std::span<const float> v, const EmbeddingSet& set) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < set.size(); ++i) best = std::min(best, squared_distance(v, set[i]));
    return best;
}

[[noreturn]] void rethrow_for_frame(std::size_t frame, const Error& e) {
    throw Error(e.is_input_error() ? e.code() : ErrorCode::Pipeline,
                "frame " + std::to_string(frame) + ": " + e.what());
}

template <class Fn>
auto with_frame(std::size_t frame, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        rethrow_for_frame(frame, e);
    }
}

BinaryMask threshold(const DenseMap& probability) {
    BinaryMask mask(probability.height(), probability.width());
    for (std::size_t p = 0; p < probability.pixel_count(); ++p) mask.set(p, probability[p] >= 0.5f);
    return mask;
}

void classify_frames(const Sequence& seq, const PipelineConfig& config, const std::vector<std::size_t>& schedule,
                     const std::map<std::size_t, std::size_t>& pool_slot, SegmentationResult& result) {
    const auto start = Clock::now();
    result.frames.resize(seq.frame_count());
    parallel_for(seq.frame_count(), [&](std::size_t l) {
        with_frame(l, [&] {
            const SeedPools& pools = result.pools[pool_slot.at(schedule[l])];
            FrameResult& out = result.frames[l];
            out.pool_frame = schedule[l];
            out.probability = foreground_probability(seq.frames[l].embedding, pools);
            if (config.crf_enabled) {
                if (!seq.frames[l].rgb) fail(ErrorCode::InvalidArgument, "CRF refinement needs an rgb image");
                out.mask = refine(out.probability, *seq.frames[l].rgb, config.crf).mask;
            } else {
                out.mask = threshold(out.probability);
            }
            return 0;
        });
    });
    result.timings["classify"] = seconds_since(start);
}

}  // namespace

std::size_t PipelineConfig::background_seed_count() const {
    return num_background_seeds.value_or(std::max<std::size_t>(1, num_seeds / 5));
}

void PipelineConfig::validate() const {
    auto unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 1]");
    };
    if (num_seeds == 0) fail(ErrorCode::InvalidArgument, "num_seeds must be >= 1");
    if (window < 3 || window % 2 == 0) fail(ErrorCode::InvalidArgument, "window must be odd and >= 3");
    if (background_seed_count() == 0) fail(ErrorCode::InvalidArgument, "num_background_seeds must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
    if (!(alpha_semi > 0.0 && alpha_semi <= 1.0)) fail(ErrorCode::InvalidArgument, "alpha_semi must lie in (0, 1]");
    unit(objectness_bg, "objectness_bg");
    unit(motion_bg, "motion_bg");
    if (adapt_every && *adapt_every == 0) fail(ErrorCode::InvalidArgument, "adapt_every must be >= 1 or inf");
    if (track_stride == 0) fail(ErrorCode::InvalidArgument, "track_stride must be >= 1");
    crf.validate();
}

void EmbeddingSet::add(std::span<const float> v) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_) fail(ErrorCode::DimensionMismatch, "embedding dimension differs from the set");
    data_.insert(data_.end(), v.begin(), v.end());
}

FrameAnalysis analyze_frame(const DenseFeatureFrame& frame, std::size_t index, const PipelineConfig& config) {
    FrameAnalysis a;
    a.frame = index;
    const DenseMap edges = edge_map(frame.embedding);
    const auto candidates = candidate_points(edges, config.window);
    a.seeds = sample_diverse_seeds(candidates, frame.embedding, frame.objectness, config.num_seeds, index);
    a.graph = PixelGraph::from_embeddings(frame.embedding);
    const auto pixels = a.seeds.pixels();
    a.regions = assign_regions(a.graph, pixels);
    a.flows = region_mean_flow(a.regions, frame.flow, pixels);
    std::vector<float> objectness;
    for (const auto& s : a.seeds.seeds) objectness.push_back(s.objectness);
    a.motion = background_motion_model(objectness, a.flows, config.background_seed_count());
    a.saliency = motion_saliency(a.flows, a.motion);
    return a;
}

BinaryMask initial_foreground(const PixelGraph& graph, PixelIndex foreground_seed,
                              std::span<const PixelIndex> background_seeds) {
    if (background_seeds.empty()) fail(ErrorCode::EmptyInput, "initial foreground needs background seeds");
    const PixelIndex fg[] = {foreground_seed};
    const DenseMap d_fg = bottleneck_distances(graph, fg);
    const DenseMap d_bg = bottleneck_distances(graph, background_seeds);
    BinaryMask mask(graph.height(), graph.width());
    for (std::size_t p = 0; p < graph.node_count(); ++p) mask.set(p, d_fg[p] < d_bg[p]);
    return mask;
}

std::vector<std::size_t> expand_foreground_seeds(const BinaryMask& initial, const RegionLabeling& regions,
                                                 std::size_t foreground_seed, double alpha) {
    if (initial.height() != regions.height || initial.width() != regions.width) {
        fail(ErrorCode::DimensionMismatch, "mask and region labeling differ in size");
    }
    if (foreground_seed >= regions.region_count()) fail(ErrorCode::InvalidArgument, "foreground seed out of range");
    std::vector<std::size_t> inside(regions.region_count(), 0);
    for (std::size_t p = 0; p < regions.labels.size(); ++p) {
        if (initial[p]) ++inside[static_cast<std::size_t>(regions.labels[p])];
    }
    std::vector<std::size_t> out{foreground_seed};
    for (std::size_t j = 0; j < inside.size(); ++j) {
        if (j == foreground_seed) continue;
        if (static_cast<double>(inside[j]) > alpha * static_cast<double>(regions.counts[j])) out.push_back(j);
    }
    return out;
}

std::vector<std::size_t> background_seed_pool(std::span<const double> objectness, std::span<const double> motion,
                                              double objectness_bg, double motion_bg,
                                              std::span<const std::size_t> foreground_pool) {
    if (objectness.size() != motion.size()) fail(ErrorCode::DimensionMismatch, "score lists differ in length");
    const std::set<std::size_t> fg(foreground_pool.begin(), foreground_pool.end());
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < objectness.size(); ++s) {
        if ((objectness[s] <= objectness_bg || motion[s] <= motion_bg) && !fg.contains(s)) out.push_back(s);
    }
    if (out.empty()) fail(ErrorCode::EmptyInput, "no seed qualifies as background");
    return out;
}

SeedPools build_seed_pools(const FrameAnalysis& a, std::size_t foreground_seed, const PipelineConfig& config) {
    const auto pixels = a.seeds.pixels();
    std::vector<PixelIndex> background;
    for (std::size_t s : a.motion.background_seeds) {
        if (s != foreground_seed) background.push_back(pixels[s]);
    }
    const BinaryMask initial = initial_foreground(a.graph, pixels[foreground_seed], background);

    std::vector<double> objectness, motion = a.saliency;
    for (const auto& s : a.seeds.seeds) objectness.push_back(s.objectness);

    SeedPools pools;
    pools.frame = a.frame;
    pools.foreground_seeds = expand_foreground_seeds(initial, a.regions, foreground_seed, config.alpha);
    pools.background_seeds =
        background_seed_pool(objectness, motion, config.objectness_bg, config.motion_bg, pools.foreground_seeds);
    for (std::size_t s : pools.foreground_seeds) pools.foreground.add(a.seeds[s].embedding);
    for (std::size_t s : pools.background_seeds) pools.background.add(a.seeds[s].embedding);
    return pools;
}

DenseMap foreground_probability(const DenseMap& embedding, const SeedPools& pools) {
    if (pools.foreground.empty() || pools.background.empty()) {
        fail(ErrorCode::EmptyInput, "foreground and background pools must be non-empty");
    }
    if (pools.foreground.dim() != embedding.channels() || pools.background.dim() != embedding.channels()) {
        fail(ErrorCode::DimensionMismatch, "pool embeddings do not match the frame's embedding width");
    }
    DenseMap prob = DenseMap::planar(embedding.height(), embedding.width());
    for (std::size_t p = 0; p < embedding.pixel_count(); ++p) {
        // The best similarity comes from the nearest pool vector. With
        // R = 2 / (1 + e^d), R_BG / R_FG = exp(log1p(e^d_fg) - log1p(e^d_bg)),
        // which stays finite when both similarities underflow.
        const double d_fg = min_squared_distance(embedding.pixel(p), pools.foreground);
        const double d_bg = min_squared_distance(embedding.pixel(p), pools.background);
        const double ratio = std::exp(log1p_exp(d_fg) - log1p_exp(d_bg));
        prob[p] = static_cast<float>(1.0 / (1.0 + ratio));
    }
    return prob;
}

SeedPools semisupervised_seed_pools(const DenseFeatureFrame& frame, const RegionLabeling& regions,
                                    const BinaryMask& annotation, double alpha_semi) {
    const DenseMap& emb = frame.embedding;
    if (annotation.height() != emb.height() || annotation.width() != emb.width() ||
        regions.height != emb.height() || regions.width != emb.width()) {
        fail(ErrorCode::DimensionMismatch, "annotation, regions and frame differ in size");
    }
    const std::size_t k = regions.region_count(), dim = emb.channels();
    std::vector<std::size_t> inside(k, 0);
    std::vector<double> sum_inside(k * dim, 0.0), sum_all(k * dim, 0.0);
    for (std::size_t p = 0; p < regions.labels.size(); ++p) {
        const auto j = static_cast<std::size_t>(regions.labels[p]);
        const auto e = emb.pixel(p);
        for (std::size_t c = 0; c < dim; ++c) {
            sum_all[j * dim + c] += e[c];
            if (annotation[p]) sum_inside[j * dim + c] += e[c];
        }
        if (annotation[p]) ++inside[j];
    }

    SeedPools pools;
    pools.frame = 0;
    pools.foreground = EmbeddingSet(dim);
    pools.background = EmbeddingSet(dim);
    std::vector<float> mean(dim);
    for (std::size_t j = 0; j < k; ++j) {
        const auto count = regions.counts[j];
        if (count == 0) continue;
        if (static_cast<double>(inside[j]) >= alpha_semi * static_cast<double>(count)) {
            for (std::size_t c = 0; c < dim; ++c) {
                mean[c] = static_cast<float>(sum_inside[j * dim + c] / static_cast<double>(inside[j]));
            }
            pools.foreground.add(mean);
        } else if (inside[j] == 0) {
            for (std::size_t c = 0; c < dim; ++c) {
                mean[c] = static_cast<float>(sum_all[j * dim + c] / static_cast<double>(count));
            }
            pools.background.add(mean);
        }
    }
    if (pools.foreground.empty()) fail(ErrorCode::EmptyInput, "annotation does not cover any region sufficiently");
    if (pools.background.empty()) fail(ErrorCode::EmptyInput, "every region touches the annotation");
    return pools;
}

std::vector<std::size_t> pool_schedule(std::size_t frame_count, const PipelineConfig& config) {
    std::vector<std::size_t> out(frame_count, 0);
    for (std::size_t l = 0; l < frame_count; ++l) {
        const std::size_t adapt = config.adapt_every ? (l / *config.adapt_every) * *config.adapt_every : 0;
        out[l] = (adapt / config.track_stride) * config.track_stride;
    }
    return out;
}

SegmentationResult segment_sequence(const Sequence& seq, const PipelineConfig& config) {
    config.validate();
    validate_sequence(seq);
    SegmentationResult result;
    const std::size_t n = seq.frame_count();

    for (std::size_t k = 0; k < n; k += config.track_stride) result.track_frames.push_back(k);

    auto start = Clock::now();
    std::vector<FrameAnalysis> analyses(result.track_frames.size());
    parallel_for(analyses.size(), [&](std::size_t i) {
        const std::size_t k = result.track_frames[i];
        analyses[i] = with_frame(k, [&] { return analyze_frame(seq.frames[k], k, config); });
    });
    for (const auto& a : analyses) {
        if (a.motion.degenerate()) {
            result.diagnostics.push_back("frame " + std::to_string(a.frame) +
                                         ": all region flows coincide with the background model; motion saliency "
                                         "set to 0");
        }
    }
    result.timings["seeds"] = seconds_since(start);

    start = Clock::now();
    std::vector<SeedSet> seed_sets;
    for (const auto& a : analyses) seed_sets.push_back(a.seeds);
    const auto tracks = build_tracks(seed_sets);
    result.track_scores.resize(tracks.size());
    for (std::size_t j = 0; j < tracks.size(); ++j) {
        std::vector<double> o, m;
        for (std::size_t i = 0; i < tracks[j].length(); ++i) {
            const auto& a = analyses[tracks[j].frames[i]];
            const std::size_t s = tracks[j].seeds[i];
            o.push_back(a.seeds[s].objectness);
            m.push_back(a.saliency[s]);
        }
        result.track_scores[j] = score_track(o, m, config.ranking);
    }
    const std::size_t chosen = select_foreground_track(result.track_scores);
    result.selected_track = chosen;
    for (std::size_t i = 0; i < analyses.size(); ++i) {
        result.foreground_seed_pixels.push_back(analyses[i].seeds[tracks[chosen].seeds[i]].pixel);
    }
    result.timings["tracks"] = seconds_since(start);

    start = Clock::now();
    const auto schedule = pool_schedule(n, config);
    std::vector<std::size_t> sources(schedule.begin(), schedule.end());
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    std::map<std::size_t, std::size_t> slot;
    for (std::size_t i = 0; i < sources.size(); ++i) slot[sources[i]] = i;
    result.pools.resize(sources.size());
    parallel_for(sources.size(), [&](std::size_t i) {
        const std::size_t k = sources[i];
        const std::size_t ti = k / config.track_stride;
        result.pools[i] = with_frame(k, [&] { return build_seed_pools(analyses[ti], tracks[chosen].seeds[ti], config); });
    });
    result.timings["pools"] = seconds_since(start);

    classify_frames(seq, config, schedule, slot, result);
    return result;
}

SegmentationResult segment_semisupervised(const Sequence& seq, const BinaryMask& annotation,
                                          const PipelineConfig& config) {
    config.validate();
    validate_sequence(seq);
    SegmentationResult result;
    result.track_frames.push_back(0);

    auto start = Clock::now();
    const FrameAnalysis a = with_frame(0, [&] { return analyze_frame(seq.frames[0], 0, config); });
    result.pools.push_back(
        with_frame(0, [&] { return semisupervised_seed_pools(seq.frames[0], a.regions, annotation, config.alpha_semi); }));
    result.timings["pools"] = seconds_since(start);

    const std::vector<std::size_t> schedule(seq.frame_count(), 0);
    classify_frames(seq, config, schedule, {{0, 0}}, result);
    return result;
}

}  // namespace seedvos
