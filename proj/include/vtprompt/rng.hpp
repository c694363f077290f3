// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace vtp {

/// SplitMix64 generator. Standard-library engines and distributions are
/// implementation-defined across toolchains; sampling results feed frozen
/// fixtures, so the whole chain is pinned here.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform-ish value in [0, n). Modulo bias is negligible for the
    /// small ranges used here and keeps the mapping trivially portable.
    uint64_t bounded(uint64_t n) { return n == 0 ? 0 : next() % n; }

private:
    uint64_t state_;
};

template <typename T>
void deterministic_shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = size_t(rng.bounded(i));
        std::swap(v[i - 1], v[j]);
    }
}

/// First k elements of a deterministic shuffle of [0, n).
inline std::vector<size_t> sample_indices(size_t n, size_t k, SplitMix64& rng) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < k && i + 1 < n; ++i) {
        size_t j = i + size_t(rng.bounded(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k < n ? k : n);
    return idx;
}

} // namespace vtp
