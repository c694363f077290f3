// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vtp {

struct Rgb {
    uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Plain RGBA8 raster, row-major, no padding.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // width * height * 4

    static Image filled(int w, int h, Rgb color);

    uint8_t* at(int x, int y) { return pixels.data() + 4 * (size_t(y) * width + x); }
    const uint8_t* at(int x, int y) const { return pixels.data() + 4 * (size_t(y) * width + x); }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

    std::string content_hash() const;  // sha256 over w, h, pixel bytes

    friend bool operator==(const Image&, const Image&) = default;
};

/// Deterministic PNG encoder: 8-bit RGBA, filter 0, stored deflate blocks.
/// Identical pixels always produce identical bytes, on any platform.
std::vector<uint8_t> encode_png(const Image& img);

/// Decode 8-bit gray/RGB/RGBA PNG (non-interlaced). Anything else raises
/// UndecodableImage.
Image decode_png(const std::vector<uint8_t>& bytes);

Image load_image(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const Image& img);

} // namespace vtp
