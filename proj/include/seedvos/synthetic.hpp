#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seedvos/feature_store.hpp"
#include "seedvos/pixel_graph.hpp"

namespace seedvos::synthetic {

enum class Shape { Rectangle, Disk };

/// An object or "stuff" region painted over the background. Objects that
/// move are foreground; stuff never is, whatever its flow.
struct ObjectSpec {
    Shape shape = Shape::Rectangle;
    double row = 0.0;     // top-left for rectangles, centre for disks (frame 0)
    double col = 0.0;
    double height = 0.0;  // rectangle size; disks use `radius`
    double width = 0.0;
    double radius = 0.0;
    double velocity_row = 0.0;  // displacement of the shape per frame
    double velocity_col = 0.0;
    /// Flow reported on the region; defaults to the shape's velocity.
    std::optional<std::array<double, 2>> flow;  // (dx, dy)
    std::vector<float> centroid;                // embedding centroid
    std::vector<float> drift;                   // added to the centroid once per frame
    double noise = 0.05;
    float objectness = 0.9f;
    std::array<std::uint8_t, 3> color{200, 60, 60};
    bool stuff = false;

    std::array<double, 2> region_flow() const;
    bool moving() const;
    bool foreground() const { return !stuff && moving(); }
};

struct SceneSpec {
    std::size_t height = 96;
    std::size_t width = 160;
    std::size_t frames = 20;
    std::size_t embedding_dim = 8;
    std::vector<float> background_centroid;  // zeros if empty
    std::vector<float> background_drift;
    double background_noise = 0.05;
    float background_objectness = 0.05f;
    std::array<double, 2> background_flow{0.0, 0.0};
    std::array<std::uint8_t, 3> background_color{60, 120, 60};
    double objectness_noise = 0.02;
    double flow_noise = 0.05;
    double color_noise = 4.0;
    std::vector<ObjectSpec> objects;  // later entries are drawn on top
    std::uint64_t seed = 7;
};

struct GeneratedSequence {
    Sequence sequence;  // gt filled for every frame, annotation0 = gt[0]
    std::vector<BinaryMask> gt;
    /// object_masks[k][j]: visible pixels of object j on frame k.
    std::vector<std::vector<BinaryMask>> object_masks;
};

/// Deterministic given `spec.seed`. Throws if an object leaves the image.
GeneratedSequence generate_sequence(const SceneSpec& spec);

/// Named presets: "clean" (mover + static distractor), "drift" (both drift
/// in embedding space), "ranking" (mover, static high-objectness object,
/// moving low-objectness stuff), "still" (no noise, no drift).
SceneSpec preset(const std::string& name, std::uint64_t seed = 7);
std::vector<std::string> preset_names();

/// Writes tensors, RGB frames, gt masks and manifest.json into `dir`.
/// Returns the manifest path.
fs::path write_sequence(const GeneratedSequence& generated, const fs::path& dir);

/// Exhaustive min over simple paths of the max edge weight. Grids up to 4x4.
double oracle_minimax(const PixelGraph& graph, PixelIndex source, PixelIndex target);

/// Nearest seed by independent single-source shortest paths, ties to the
/// lowest index. Grids up to 8x8.
std::vector<std::int32_t> oracle_geodesic(const PixelGraph& graph, std::span<const PixelIndex> seeds);

/// Seedable normal generator: SplitMix64 stream, 53-bit uniforms,
/// Box-Muller. Pinned so sequences reproduce across platforms.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double uniform();  // in (0, 1)
    double normal();

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace seedvos::synthetic
