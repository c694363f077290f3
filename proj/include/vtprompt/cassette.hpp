// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace vtp {

enum class CassetteMode { Record, Replay, Passthrough };

CassetteMode cassette_mode_from_name(std::string_view name);
std::string_view cassette_mode_name(CassetteMode m);

struct CassetteEntry {
    int status = 0;
    std::string body;
};

/// Append-only store of recorded backend responses, one JSON file per
/// request fingerprint under {root}/{backend}/{fingerprint}.json.
/// Existing entries are never rewritten.
class CassetteStore {
public:
    CassetteStore(std::filesystem::path root, std::string backend_id);

    std::optional<CassetteEntry> find(const std::string& fingerprint) const;

    /// No-op if the fingerprint is already stored.
    void put(const std::string& fingerprint, const CassetteEntry& entry) const;

    const std::filesystem::path& root() const { return root_; }
    const std::string& backend_id() const { return backend_id_; }

private:
    std::filesystem::path entry_path(const std::string& fingerprint) const;

    std::filesystem::path root_;
    std::string backend_id_;
};

} // namespace vtp
