// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/cassette.hpp"

#include <json.hpp>

#include "vtprompt/error.hpp"
#include "vtprompt/util.hpp"

namespace vtp {

CassetteMode cassette_mode_from_name(std::string_view name) {
    if (name == "record") return CassetteMode::Record;
    if (name == "replay") return CassetteMode::Replay;
    if (name == "passthrough") return CassetteMode::Passthrough;
    fail(Errc::ConfigInvalid, "unknown cassette mode '" + std::string(name) + "'");
}

std::string_view cassette_mode_name(CassetteMode m) {
    switch (m) {
    case CassetteMode::Record: return "record";
    case CassetteMode::Replay: return "replay";
    case CassetteMode::Passthrough: return "passthrough";
    }
    return "replay";
}

CassetteStore::CassetteStore(std::filesystem::path root, std::string backend_id)
    : root_(std::move(root)), backend_id_(std::move(backend_id)) {}

std::filesystem::path CassetteStore::entry_path(const std::string& fingerprint) const {
    return root_ / backend_id_ / (fingerprint + ".json");
}

std::optional<CassetteEntry> CassetteStore::find(const std::string& fingerprint) const {
    auto path = entry_path(fingerprint);
    if (!std::filesystem::exists(path)) return std::nullopt;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
        CassetteEntry e;
        e.status = j.at("status").get<int>();
        e.body = j.at("body").get<std::string>();
        return e;
    } catch (const std::exception& e) {
        fail(Errc::IoError, "corrupt cassette entry " + path.string() + ": " + e.what());
    }
}

void CassetteStore::put(const std::string& fingerprint, const CassetteEntry& entry) const {
    auto path = entry_path(fingerprint);
    if (std::filesystem::exists(path)) return;  // append-only
    nlohmann::json j{{"fingerprint", fingerprint}, {"status", entry.status}, {"body", entry.body}};
    write_file_atomic(path, j.dump(2));
}

} // namespace vtp
