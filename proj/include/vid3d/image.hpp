#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vid3d {

/// Interleaved H x W x C float image, row-major, values nominally in [0,1].
struct Image {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c = 3, float fill = 0.0f)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {}

    float& at(int x, int y, int ch) { return data[(static_cast<std::size_t>(y) * width + x) * channels + ch]; }
    float at(int x, int y, int ch) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + ch]; }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
    bool operator==(const Image& o) const = default;
};

/// 8-bit quantization used by every PNG writer: round(clamp(v,0,1) * 255).
std::uint8_t quantize_u8(float v);

/// Round-trips `img` through 8-bit quantization without touching disk.
Image quantized(const Image& img);

/// Encodes to an 8-bit RGB (3 channel) or gray (1 channel) PNG.
std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const Image& img);
/// Throws ImageReadError when the file is missing or not a decodable PNG.
Image read_png(const std::filesystem::path& path);

/// Area-average resize (box filter); used for embeddings and thumbnails.
Image resize_area(const Image& img, int width, int height);

}  // namespace vid3d
