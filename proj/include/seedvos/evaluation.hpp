#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seedvos/dense_map.hpp"
#include "seedvos/feature_store.hpp"

namespace seedvos {

/// Intersection over union; 1 when both masks are empty.
double region_similarity(const BinaryMask& pred, const BinaryMask& gt);

/// Foreground pixels with at least one background or out-of-image 4-neighbour.
BinaryMask boundary_pixels(const BinaryMask& mask);

/// Squared Euclidean distance from every pixel to the nearest set pixel
/// (exact, separable lower-envelope transform). Infinity if nothing is set.
std::vector<double> squared_distance_transform(const BinaryMask& sources);

/// DAVIS-style boundary tolerance: ceil(0.8% of the image diagonal).
double default_boundary_tolerance(std::size_t height, std::size_t width);

/// Harmonic mean of boundary precision and recall, a boundary pixel
/// counting as matched when the other boundary lies within `tolerance`
/// pixels (inclusive). 1 when both boundaries are empty.
double boundary_measure(const BinaryMask& pred, const BinaryMask& gt, double tolerance);

/// Fraction of seed pixels inside the matching ground-truth mask.
double seed_accuracy(std::span<const PixelIndex> seeds, std::span<const BinaryMask> gt);

struct FrameScore {
    std::size_t frame = 0;
    double region = 0.0;    // J
    double boundary = 0.0;  // F
};

struct SequenceScores {
    std::string sequence;
    std::vector<FrameScore> frames;
    double mean_region = 0.0;
    double mean_boundary = 0.0;
    std::optional<double> seed_accuracy;
};

/// Scores every frame; `tolerance` <= 0 selects the default.
SequenceScores evaluate_sequence(const std::string& name, std::span<const BinaryMask> pred,
                                 std::span<const BinaryMask> gt, double tolerance = 0.0);

void write_scores_csv(std::span<const SequenceScores> scores, const fs::path& path);
void write_scores_json(std::span<const SequenceScores> scores, const fs::path& path);

struct DriftPoint {
    std::size_t frame = 0;
    std::optional<double> foreground;  // d_FG(k, 0); unset if the frame was skipped
    std::optional<double> background;  // d_BG(k, 0)
};

/// Mean distance from each frame's ground-truth foreground (background)
/// embeddings to the nearest frame-0 foreground (background) embedding.
/// Frames with an empty region are skipped and reported in `diagnostics`.
std::vector<DriftPoint> embedding_drift(const Sequence& seq, std::span<const BinaryMask> gt,
                                        std::vector<std::string>* diagnostics = nullptr);

/// Per frame, the fraction of ground-truth foreground pixels whose
/// embedding is strictly closer to some frame-0 background embedding than
/// to every frame-0 foreground embedding.
std::vector<std::optional<double>> misclassified_fg_fraction(const Sequence& seq, std::span<const BinaryMask> gt,
                                                             std::vector<std::string>* diagnostics = nullptr);

}  // namespace seedvos
