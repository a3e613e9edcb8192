#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seedvos/dense_map.hpp"

namespace seedvos {

namespace fs = std::filesystem;

/// Everything the pipeline consumes for one frame.
struct DenseFeatureFrame {
    DenseMap embedding;   // H x W x E
    DenseMap objectness;  // H x W, values in [0, 1]
    DenseMap flow;        // H x W x 2, (dx, dy) in pixels/frame
    std::optional<RgbImage> rgb;
};

struct FrameEntry {
    fs::path embedding;
    fs::path objectness;
    fs::path flow;
    std::optional<fs::path> rgb;
    std::optional<fs::path> gt;
};

/// Paths are stored already resolved against the manifest's directory.
struct SequenceManifest {
    std::string name;
    std::vector<FrameEntry> frames;
    std::optional<fs::path> annotation0;
};

struct Sequence {
    std::string name;
    std::vector<DenseFeatureFrame> frames;
    std::vector<std::optional<BinaryMask>> gt;  // one slot per frame
    std::optional<BinaryMask> annotation0;

    std::size_t frame_count() const noexcept { return frames.size(); }
    std::size_t height() const { return frames.at(0).embedding.height(); }
    std::size_t width() const { return frames.at(0).embedding.width(); }
    std::size_t embedding_dim() const { return frames.at(0).embedding.channels(); }
    bool has_full_gt() const;
    std::vector<BinaryMask> gt_masks() const;
};

// NPY v1.0, little-endian float32, C order.
DenseMap load_tensor(const fs::path& path);
void save_tensor(const DenseMap& map, const fs::path& path);
DenseMap parse_tensor(const std::string& bytes, const std::string& origin = "<memory>");
std::string encode_tensor(const DenseMap& map);

// 8-bit grayscale PNG holding only 0 and 255.
BinaryMask load_mask(const fs::path& path);
void save_mask(const BinaryMask& mask, const fs::path& path);

RgbImage load_rgb(const fs::path& path);
void save_rgb(const RgbImage& image, const fs::path& path);

SequenceManifest load_manifest(const fs::path& path);
void save_manifest(const SequenceManifest& manifest, const fs::path& path);

/// Loads every frame and checks the cross-frame invariants: shared H x W,
/// constant embedding width, 2-channel flow, objectness within [0, 1]
/// (values up to 1e-6 outside are clamped, anything further is rejected).
Sequence load_sequence(const SequenceManifest& manifest);
Sequence load_sequence(const fs::path& manifest_path);

/// Checks the same invariants on an in-memory sequence.
void validate_sequence(const Sequence& sequence);

}  // namespace seedvos
