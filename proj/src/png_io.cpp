// SPDX-License-Identifier: Apache-2.0
//
// Minimal PNG I/O. The encoder emits stored (uncompressed) deflate blocks
// so output bytes are a pure function of the pixels and never depend on the
// zlib version; golden-image checks rely on that. Decoding goes through
// system zlib, which is exact for any conforming stream.

#include <algorithm>
#include <cstdlib>
#include <cstring>

#include <zlib.h>

#include "vtprompt/error.hpp"
#include "vtprompt/image.hpp"

namespace vtp {

namespace {

constexpr uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

uint32_t crc32_of(const uint8_t* data, size_t len, uint32_t seed = 0) {
    return uint32_t(::crc32(seed, data, uInt(len)));
}

uint32_t adler32_of(const uint8_t* data, size_t len) {
    return uint32_t(::adler32(::adler32(0, nullptr, 0), data, uInt(len)));
}

void put_be32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v >> 24));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v));
}

uint32_t read_be32(const uint8_t* p) {
    return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void append_chunk(std::vector<uint8_t>& out, const char type[4], const std::vector<uint8_t>& body) {
    put_be32(out, uint32_t(body.size()));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), body.begin(), body.end());
    put_be32(out, crc32_of(out.data() + crc_start, out.size() - crc_start));
}

// raw scanlines -> zlib stream of stored blocks
std::vector<uint8_t> deflate_stored(const std::vector<uint8_t>& raw) {
    std::vector<uint8_t> z;
    z.reserve(raw.size() + raw.size() / 65535 * 5 + 16);
    z.push_back(0x78);  // 32K window, deflate
    z.push_back(0x01);  // no dict, fastest-compression flag, check bits valid
    size_t off = 0;
    do {
        size_t n = std::min<size_t>(65535, raw.size() - off);
        bool final = off + n == raw.size();
        z.push_back(final ? 1 : 0);
        z.push_back(uint8_t(n & 0xff));
        z.push_back(uint8_t(n >> 8));
        z.push_back(uint8_t(~n & 0xff));
        z.push_back(uint8_t(~n >> 8));
        z.insert(z.end(), raw.begin() + std::ptrdiff_t(off), raw.begin() + std::ptrdiff_t(off + n));
        off += n;
    } while (off < raw.size());
    put_be32(z, adler32_of(raw.data(), raw.size()));
    return z;
}

std::vector<uint8_t> zlib_inflate(const uint8_t* data, size_t len, size_t expected_size) {
    std::vector<uint8_t> out(expected_size);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) fail(Errc::UndecodableImage, "inflateInit failed");
    zs.next_in = const_cast<Bytef*>(data);
    zs.avail_in = uInt(len);
    zs.next_out = out.data();
    zs.avail_out = uInt(out.size());
    int rc = inflate(&zs, Z_FINISH);
    size_t produced = out.size() - zs.avail_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected_size)
        fail(Errc::UndecodableImage, "corrupt or truncated image data");
    return out;
}

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

} // namespace

std::vector<uint8_t> encode_png(const Image& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != size_t(img.width) * img.height * 4)
        fail(Errc::Precondition, "image buffer does not match its dimensions");

    std::vector<uint8_t> out(kSignature, kSignature + 8);

    std::vector<uint8_t> ihdr;
    put_be32(ihdr, uint32_t(img.width));
    put_be32(ihdr, uint32_t(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(6);  // RGBA
    ihdr.push_back(0);  // deflate
    ihdr.push_back(0);  // adaptive filtering
    ihdr.push_back(0);  // no interlace
    append_chunk(out, "IHDR", ihdr);

    const size_t stride = size_t(img.width) * 4;
    std::vector<uint8_t> raw;
    raw.reserve((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        const uint8_t* row = img.pixels.data() + stride * y;
        raw.insert(raw.end(), row, row + stride);
    }
    append_chunk(out, "IDAT", deflate_stored(raw));
    append_chunk(out, "IEND", {});
    return out;
}

Image decode_png(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0)
        fail(Errc::UndecodableImage, "not a PNG file");

    uint32_t width = 0, height = 0;
    int bit_depth = 0, color_type = 0, interlace = 0;
    std::vector<uint8_t> idat;

    size_t pos = 8;
    bool saw_end = false;
    while (pos + 8 <= bytes.size() && !saw_end) {
        uint32_t len = read_be32(&bytes[pos]);
        if (pos + 12 + len > bytes.size()) fail(Errc::UndecodableImage, "truncated chunk");
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const uint8_t* body = &bytes[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) fail(Errc::UndecodableImage, "bad IHDR");
            width = read_be32(body);
            height = read_be32(body + 4);
            bit_depth = body[8];
            color_type = body[9];
            interlace = body[12];
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), body, body + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            saw_end = true;
        }
        pos += 12 + len;
    }

    if (width == 0 || height == 0 || idat.empty()) fail(Errc::UndecodableImage, "missing image data");
    if (bit_depth != 8) fail(Errc::UndecodableImage, "unsupported bit depth");
    if (interlace != 0) fail(Errc::UndecodableImage, "interlaced PNG not supported");
    int channels;
    switch (color_type) {
    case 0: channels = 1; break;
    case 2: channels = 3; break;
    case 4: channels = 2; break;
    case 6: channels = 4; break;
    default: fail(Errc::UndecodableImage, "unsupported color type");
    }
    if (width > (1u << 24) || height > (1u << 24))
        fail(Errc::UndecodableImage, "implausible dimensions");

    const size_t stride = size_t(width) * channels;
    auto raw = zlib_inflate(idat.data(), idat.size(), (stride + 1) * height);

    // defilter in place into a clean pixel buffer
    std::vector<uint8_t> data(stride * height);
    for (uint32_t y = 0; y < height; ++y) {
        uint8_t filter = raw[(stride + 1) * y];
        const uint8_t* src = &raw[(stride + 1) * y + 1];
        uint8_t* dst = &data[stride * y];
        const uint8_t* prev = y > 0 ? &data[stride * (y - 1)] : nullptr;
        for (size_t x = 0; x < stride; ++x) {
            int a = x >= size_t(channels) ? dst[x - channels] : 0;
            int b = prev ? prev[x] : 0;
            int c = (prev && x >= size_t(channels)) ? prev[x - channels] : 0;
            int v = src[x];
            switch (filter) {
            case 0: break;
            case 1: v += a; break;
            case 2: v += b; break;
            case 3: v += (a + b) / 2; break;
            case 4: v += paeth(a, b, c); break;
            default: fail(Errc::UndecodableImage, "unknown filter type");
            }
            dst[x] = uint8_t(v);
        }
    }

    Image img;
    img.width = int(width);
    img.height = int(height);
    img.pixels.resize(size_t(width) * height * 4);
    for (size_t i = 0; i < size_t(width) * height; ++i) {
        const uint8_t* s = &data[i * channels];
        uint8_t* d = &img.pixels[i * 4];
        switch (channels) {
        case 1: d[0] = d[1] = d[2] = s[0]; d[3] = 255; break;
        case 2: d[0] = d[1] = d[2] = s[0]; d[3] = s[1]; break;
        case 3: d[0] = s[0]; d[1] = s[1]; d[2] = s[2]; d[3] = 255; break;
        case 4: std::memcpy(d, s, 4); break;
        }
    }
    return img;
}

} // namespace vtp
