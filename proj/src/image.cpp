#include "vid3d/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "vid3d/error.hpp"

namespace vid3d {

std::uint8_t quantize_u8(float v) {
    const float c = std::clamp(v, 0.0f, 1.0f);
    return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

Image quantized(const Image& img) {
    Image out = img;
    for (auto& v : out.data) v = quantize_u8(v) / 255.0f;
    return out;
}

std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.channels != 3 && img.channels != 1) throw InvalidArgument("PNG export supports 1 or 3 channels");
    std::vector<std::uint8_t> pixels(img.data.size());
    std::transform(img.data.begin(), img.data.end(), pixels.begin(), quantize_u8);

    png_image pi;
    std::memset(&pi, 0, sizeof(pi));
    pi.version = PNG_IMAGE_VERSION;
    pi.width = static_cast<png_uint_32>(img.width);
    pi.height = static_cast<png_uint_32>(img.height);
    pi.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&pi, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw IoError(std::string("PNG encode failed: ") + pi.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&pi, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw IoError(std::string("PNG encode failed: ") + pi.message);
    }
    out.resize(size);
    return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    png_image pi;
    std::memset(&pi, 0, sizeof(pi));
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&pi, bytes.data(), bytes.size())) {
        throw ImageReadError(std::string("PNG decode failed: ") + pi.message);
    }
    const bool gray = (pi.format & PNG_FORMAT_FLAG_COLOR) == 0;
    pi.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(pi));
    if (!png_image_finish_read(&pi, nullptr, pixels.data(), 0, nullptr)) {
        png_image_free(&pi);
        throw ImageReadError(std::string("PNG decode failed: ") + pi.message);
    }
    Image img(static_cast<int>(pi.width), static_cast<int>(pi.height), gray ? 1 : 3);
    std::transform(pixels.begin(), pixels.end(), img.data.begin(),
                   [](std::uint8_t v) { return v / 255.0f; });
    return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Image read_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageReadError("cannot open image " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_png(bytes);
    } catch (const ImageReadError& e) {
        throw ImageReadError(path.string() + ": " + e.what());
    }
}

Image resize_area(const Image& img, int width, int height) {
    if (width < 1 || height < 1) throw InvalidArgument("resize target must be at least 1x1");
    Image out(width, height, img.channels);
    const double sx = static_cast<double>(img.width) / width;
    const double sy = static_cast<double>(img.height) / height;
    for (int y = 0; y < height; ++y) {
        const double y0 = y * sy, y1 = (y + 1) * sy;
        for (int x = 0; x < width; ++x) {
            const double x0 = x * sx, x1 = (x + 1) * sx;
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0, wsum = 0.0;
                for (int iy = static_cast<int>(y0); iy < std::min<double>(y1, img.height); ++iy) {
                    const double wy = std::min<double>(iy + 1, y1) - std::max<double>(iy, y0);
                    for (int ix = static_cast<int>(x0); ix < std::min<double>(x1, img.width); ++ix) {
                        const double wx = std::min<double>(ix + 1, x1) - std::max<double>(ix, x0);
                        acc += wx * wy * img.at(ix, iy, c);
                        wsum += wx * wy;
                    }
                }
                out.at(x, y, c) = static_cast<float>(wsum > 0.0 ? acc / wsum : 0.0);
            }
        }
    }
    return out;
}

}  // namespace vid3d
