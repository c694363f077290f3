// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/image.hpp"

#include <fstream>

#include "vtprompt/error.hpp"
#include "vtprompt/hash.hpp"
#include "vtprompt/util.hpp"

namespace vtp {

Image Image::filled(int w, int h, Rgb color) {
    Image img;
    img.width = w;
    img.height = h;
    img.pixels.resize(size_t(w) * h * 4);
    for (size_t i = 0; i < img.pixels.size(); i += 4) {
        img.pixels[i] = color.r;
        img.pixels[i + 1] = color.g;
        img.pixels[i + 2] = color.b;
        img.pixels[i + 3] = 255;
    }
    return img;
}

std::string Image::content_hash() const {
    Sha256 h;
    uint32_t dims[2] = {uint32_t(width), uint32_t(height)};
    h.update(dims, sizeof(dims));
    h.update(pixels.data(), pixels.size());
    auto d = h.finish();
    return to_hex(d.data(), d.size());
}

Image load_image(const std::filesystem::path& path) {
    std::vector<uint8_t> bytes;
    try {
        bytes = read_file_bytes(path);
    } catch (const Error&) {
        fail(Errc::UndecodableImage, "cannot read " + path.string());
    }
    return decode_png(bytes);
}

void save_image(const std::filesystem::path& path, const Image& img) {
    auto bytes = encode_png(img);
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

} // namespace vtp
