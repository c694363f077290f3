// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vtp {

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = char(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Lowercase, trim, collapse runs of internal whitespace to single spaces.
inline std::string normalize_token(std::string_view s) {
    std::string lowered = to_lower(trim(s));
    std::string out;
    out.reserve(lowered.size());
    bool prev_space = false;
    for (char c : lowered) {
        bool space = std::isspace(static_cast<unsigned char>(c));
        if (space) {
            if (!prev_space && !out.empty()) out.push_back(' ');
        } else {
            out.push_back(c);
        }
        prev_space = space;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string read_file(const std::filesystem::path& path);
std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Write-then-rename so concurrent readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string format_fixed(double value, int decimals);

} // namespace vtp
