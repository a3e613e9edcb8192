#pragma once

#include <span>
#include <vector>

#include "seedvos/dense_map.hpp"
#include "seedvos/pixel_graph.hpp"

namespace seedvos {

struct FlowVector {
    double dx = 0.0;
    double dy = 0.0;

    friend bool operator==(const FlowVector&, const FlowVector&) = default;
};

inline double squared_norm(FlowVector a, FlowVector b) {
    const double x = a.dx - b.dx, y = a.dy - b.dy;
    return x * x + y * y;
}

/// Background motion: the region flows of the lowest-objectness seeds and
/// the normaliser Z (largest squared distance of any seed flow to its
/// nearest background vector).
struct MotionModel {
    std::vector<std::size_t> background_seeds;
    std::vector<FlowVector> background_flows;
    double normalizer = 0.0;

    /// Z == 0: every region moves identically, so there is no motion contrast.
    bool degenerate() const noexcept { return normalizer == 0.0; }
};

/// Mean flow over each seed's region. A region emptied by a distance tie
/// (possible only with zero-weight edges) falls back to the flow at the
/// seed pixel.
std::vector<FlowVector> region_mean_flow(const RegionLabeling& regions, const DenseMap& flow,
                                         std::span<const PixelIndex> seed_pixels);

/// Indices of the `count` smallest objectness values, ties to the lower index.
std::vector<std::size_t> lowest_objectness(std::span<const float> objectness, std::size_t count);

MotionModel background_motion_model(std::span<const float> objectness, std::span<const FlowVector> flows,
                                    std::size_t background_count);

/// min_b |v_s - v_b|^2 / Z per seed; all zeros when Z == 0.
std::vector<double> motion_saliency(std::span<const FlowVector> flows, const MotionModel& model);

}  // namespace seedvos
