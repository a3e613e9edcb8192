#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "seedvos/error.hpp"
#include "seedvos/feature_store.hpp"

namespace seedvos {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        fail(mode[0] == 'r' ? ErrorCode::FileNotFound : ErrorCode::Io,
             std::string("cannot open image file ") + path.string());
    }
    return f;
}

struct DecodedPng {
    std::size_t height = 0;
    std::size_t width = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;
};

// Decodes to 8-bit samples. When `to_rgb` is set palette/gray/alpha inputs
// are converted; otherwise the stored layout must already be 8-bit gray.
DecodedPng decode_png(const fs::path& path, bool to_rgb) {
    FilePtr file = open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        fail(ErrorCode::Io, path.string() + ": not a PNG file");
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(ErrorCode::Io, "libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(ErrorCode::Io, "libpng initialisation failed");
    }

    DecodedPng out;
    std::vector<png_bytep> rows;
    std::string layout_error;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::Io, path.string() + ": corrupt PNG data");
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (to_rgb) {
        if (depth == 16) png_set_strip_16(png);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    } else if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        layout_error = "mask must be an 8-bit single-channel PNG";
    }

    if (layout_error.empty()) {
        png_read_update_info(png, info);
        out.width = png_get_image_width(png, info);
        out.height = png_get_image_height(png, info);
        out.channels = png_get_channels(png, info);
        const std::size_t stride = png_get_rowbytes(png, info);
        out.pixels.resize(stride * out.height);
        rows.resize(out.height);
        for (std::size_t r = 0; r < out.height; ++r) rows[r] = out.pixels.data() + r * stride;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (!layout_error.empty()) fail(ErrorCode::InvalidValue, path.string() + ": " + layout_error);
    return out;
}

void encode_png(const fs::path& path, std::size_t height, std::size_t width, int color_type, int channels,
                const std::uint8_t* pixels) {
    FilePtr file = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail(ErrorCode::Io, "libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(ErrorCode::Io, "libpng initialisation failed");
    }
    std::vector<png_bytep> rows(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::Io, "failed writing " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // Fixed settings keep the encoded bytes reproducible.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_write_info(png, info);
    for (std::size_t r = 0; r < height; ++r) {
        rows[r] = const_cast<png_bytep>(pixels + r * width * static_cast<std::size_t>(channels));
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

BinaryMask load_mask(const fs::path& path) {
    DecodedPng png = decode_png(path, false);
    BinaryMask mask(png.height, png.width);
    for (std::size_t p = 0; p < png.pixels.size(); ++p) {
        const auto v = png.pixels[p];
        if (v != 0 && v != 255) {
            fail(ErrorCode::InvalidValue, path.string() + ": mask pixel " + std::to_string(p) + " has value " +
                                              std::to_string(v) + " (only 0 and 255 allowed)");
        }
        mask.set(p, v == 255);
    }
    return mask;
}

void save_mask(const BinaryMask& mask, const fs::path& path) {
    std::vector<std::uint8_t> gray(mask.pixel_count());
    for (std::size_t p = 0; p < gray.size(); ++p) gray[p] = mask[p] ? 255 : 0;
    encode_png(path, mask.height(), mask.width(), PNG_COLOR_TYPE_GRAY, 1, gray.data());
}

RgbImage load_rgb(const fs::path& path) {
    DecodedPng png = decode_png(path, true);
    if (png.channels != 3) fail(ErrorCode::InvalidValue, path.string() + ": could not convert to RGB");
    RgbImage image;
    image.height = png.height;
    image.width = png.width;
    image.data = std::move(png.pixels);
    return image;
}

void save_rgb(const RgbImage& image, const fs::path& path) {
    encode_png(path, image.height, image.width, PNG_COLOR_TYPE_RGB, 3, image.data.data());
}

}  // namespace seedvos
