#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace seedvos {

/// Row-major pixel index, `row * width + col`.
using PixelIndex = std::size_t;

/// H x W x C block of 32-bit floats, row-major with channels innermost.
/// Maps that came from 2-D tensors (objectness, probabilities) remember
/// that so they are written back with the same shape.
class DenseMap {
public:
    DenseMap() = default;
    DenseMap(std::size_t height, std::size_t width, std::size_t channels, float fill = 0.0f);
    DenseMap(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data);

    /// A single-channel map stored as a rank-2 tensor.
    static DenseMap planar(std::size_t height, std::size_t width, float fill = 0.0f);
    static DenseMap planar(std::size_t height, std::size_t width, std::vector<float> data);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return height_ * width_; }
    std::size_t rank() const noexcept { return planar_ ? 2 : 3; }
    bool is_planar() const noexcept { return planar_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const float> pixel(PixelIndex p) const {
        return {data_.data() + p * channels_, channels_};
    }
    std::span<float> pixel(PixelIndex p) { return {data_.data() + p * channels_, channels_}; }

    float at(std::size_t row, std::size_t col, std::size_t ch = 0) const {
        return data_[(row * width_ + col) * channels_ + ch];
    }
    float& at(std::size_t row, std::size_t col, std::size_t ch = 0) {
        return data_[(row * width_ + col) * channels_ + ch];
    }
    float operator[](PixelIndex p) const { return data_[p * channels_]; }
    float& operator[](PixelIndex p) { return data_[p * channels_]; }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    bool same_size(const DenseMap& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const DenseMap&, const DenseMap&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    bool planar_ = false;
    std::vector<float> data_;
};

/// Per-pixel foreground flag.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(std::size_t height, std::size_t width, bool fill = false)
        : height_(height), width_(width), bits_(height * width, fill ? 1 : 0) {}

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t pixel_count() const noexcept { return bits_.size(); }

    bool operator[](PixelIndex p) const { return bits_[p] != 0; }
    bool at(std::size_t row, std::size_t col) const { return bits_[row * width_ + col] != 0; }
    void set(PixelIndex p, bool value) { bits_[p] = value ? 1 : 0; }
    void set(std::size_t row, std::size_t col, bool value) { set(row * width_ + col, value); }

    std::size_t count() const noexcept;
    bool same_size(const BinaryMask& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// 8-bit interleaved RGB image.
struct RgbImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> data;

    RgbImage() = default;
    RgbImage(std::size_t h, std::size_t w) : height(h), width(w), data(h * w * 3, 0) {}

    const std::uint8_t* pixel(PixelIndex p) const { return data.data() + 3 * p; }
    std::uint8_t* pixel(PixelIndex p) { return data.data() + 3 * p; }
    bool empty() const noexcept { return data.empty(); }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

}  // namespace seedvos
