// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/util.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>

#include <unistd.h>

#include "vtprompt/error.hpp"

namespace vtp {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot open " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::string s = read_file(path);
    return std::vector<uint8_t>(s.begin(), s.end());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    // unique temp name per writer, same filesystem as the target
    static std::atomic<uint64_t> counter{0};
    auto tmp = path;
    tmp += ".tmp." + std::to_string(uint64_t(::getpid())) + "." +
           std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(Errc::IoError, "cannot write " + tmp.string());
        out.write(content.data(), std::streamsize(content.size()));
        if (!out) fail(Errc::IoError, "short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(Errc::IoError, "rename to " + path.string() + " failed");
    }
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

} // namespace vtp
