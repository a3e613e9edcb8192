#include "seedvos/motion_saliency.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "seedvos/error.hpp"

namespace seedvos {

namespace {

double nearest_background(FlowVector v, std::span<const FlowVector> background) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : background) best = std::min(best, squared_norm(v, b));
    return best;
}

}  // namespace

std::vector<FlowVector> region_mean_flow(const RegionLabeling& regions, const DenseMap& flow,
                                         std::span<const PixelIndex> seed_pixels) {
    if (regions.height != flow.height() || regions.width != flow.width()) {
        fail(ErrorCode::DimensionMismatch, "region labeling and flow map differ in size");
    }
    if (flow.channels() != 2) fail(ErrorCode::DimensionMismatch, "flow must have two channels");
    if (seed_pixels.size() != regions.region_count()) {
        fail(ErrorCode::DimensionMismatch, "seed count does not match the region labeling");
    }

    const std::size_t k = regions.region_count();
    std::vector<double> sx(k, 0.0), sy(k, 0.0);
    for (std::size_t p = 0; p < regions.labels.size(); ++p) {
        const auto l = static_cast<std::size_t>(regions.labels[p]);
        const auto f = flow.pixel(p);
        sx[l] += f[0];
        sy[l] += f[1];
    }
    std::vector<FlowVector> out(k);
    for (std::size_t s = 0; s < k; ++s) {
        if (regions.counts[s] == 0) {
            const auto f = flow.pixel(seed_pixels[s]);
            out[s] = {f[0], f[1]};
        } else {
            const auto n = static_cast<double>(regions.counts[s]);
            out[s] = {sx[s] / n, sy[s] / n};
        }
    }
    return out;
}

std::vector<std::size_t> lowest_objectness(std::span<const float> objectness, std::size_t count) {
    std::vector<std::size_t> order(objectness.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return objectness[a] < objectness[b]; });
    order.resize(std::min(count, order.size()));
    return order;
}

MotionModel background_motion_model(std::span<const float> objectness, std::span<const FlowVector> flows,
                                    std::size_t background_count) {
    if (objectness.empty()) fail(ErrorCode::EmptyInput, "motion model needs at least one seed");
    if (objectness.size() != flows.size()) {
        fail(ErrorCode::DimensionMismatch, "objectness and flow lists differ in length");
    }
    MotionModel m;
    m.background_seeds = lowest_objectness(objectness, std::max<std::size_t>(background_count, 1));
    for (std::size_t s : m.background_seeds) m.background_flows.push_back(flows[s]);
    for (const auto& v : flows) m.normalizer = std::max(m.normalizer, nearest_background(v, m.background_flows));
    return m;
}

std::vector<double> motion_saliency(std::span<const FlowVector> flows, const MotionModel& model) {
    std::vector<double> out(flows.size(), 0.0);
    if (model.degenerate()) return out;
    for (std::size_t s = 0; s < flows.size(); ++s) {
        out[s] = std::min(1.0, nearest_background(flows[s], model.background_flows) / model.normalizer);
    }
    return out;
}

}  // namespace seedvos
