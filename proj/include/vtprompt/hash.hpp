// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace vtp {

/// Incremental SHA-256. Used for request fingerprints, cache keys and
/// artifact provenance hashes; output is stable across platforms.
class Sha256 {
public:
    Sha256();
    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::array<uint8_t, 32> finish();

private:
    void process_block(const uint8_t* block);

    std::array<uint32_t, 8> state_;
    uint64_t total_len_ = 0;
    std::array<uint8_t, 64> buffer_{};
    size_t buffer_len_ = 0;
};

std::string to_hex(const uint8_t* data, size_t len);
std::string sha256_hex(std::string_view data);
std::string sha256_hex(const std::vector<uint8_t>& data);

uint64_t fnv1a64(std::string_view s);

} // namespace vtp
