#include "seedvos/dense_map.hpp"

#include <algorithm>
#include <string>

#include "seedvos/error.hpp"

namespace seedvos {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid argument";
        case ErrorCode::DimensionMismatch: return "dimension mismatch";
        case ErrorCode::FileNotFound: return "file not found";
        case ErrorCode::Io: return "i/o error";
        case ErrorCode::MalformedHeader: return "malformed header";
        case ErrorCode::NonFloatPayload: return "non-float payload";
        case ErrorCode::ShapeMismatch: return "shape mismatch";
        case ErrorCode::InvalidValue: return "invalid value";
        case ErrorCode::EmptyInput: return "empty input";
        case ErrorCode::Pipeline: return "pipeline error";
    }
    return "unknown error";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

DenseMap::DenseMap(std::size_t height, std::size_t width, std::size_t channels, float fill)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {
    if (channels == 0) fail(ErrorCode::InvalidArgument, "DenseMap needs at least one channel");
}

DenseMap::DenseMap(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (channels == 0) fail(ErrorCode::InvalidArgument, "DenseMap needs at least one channel");
    if (data_.size() != height * width * channels) {
        fail(ErrorCode::ShapeMismatch, "DenseMap payload has " + std::to_string(data_.size()) +
                                           " values, shape requires " +
                                           std::to_string(height * width * channels));
    }
}

DenseMap DenseMap::planar(std::size_t height, std::size_t width, float fill) {
    DenseMap m(height, width, 1, fill);
    m.planar_ = true;
    return m;
}

DenseMap DenseMap::planar(std::size_t height, std::size_t width, std::vector<float> data) {
    DenseMap m(height, width, 1, std::move(data));
    m.planar_ = true;
    return m;
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

}  // namespace seedvos
