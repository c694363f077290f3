// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "vtprompt/cassette.hpp"

namespace vtp {

/// One remote backend. Credentials come from the named environment
/// variable, never from the config file itself.
struct BackendConfig {
    std::string id;        // cassette namespace
    std::string model_id;  // chat backends
    std::string version;   // detector backends
    std::string host;
    int port = 80;
    std::string path;
    std::string api_key_env;

    bool has_endpoint() const { return !host.empty(); }
};

struct SampleSpec {
    size_t n = 0;
    uint64_t seed = 0;
};

struct RunConfig {
    std::filesystem::path manifest;
    std::filesystem::path output_dir = "runs";
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path cassette_dir = "cassettes";
    std::string run_id;  // empty: derived from the config hash

    bool baseline = false;  // send the original image, skip extraction/detection/render
    std::string detector_kind = "grounding_box";
    std::string style = "type_b";
    std::string strategy = "tprompt";
    std::optional<SampleSpec> sample;
    CassetteMode cassette_mode = CassetteMode::Replay;
    int max_concurrency = 4;

    BackendConfig text_backend = default_backend("textllm");
    BackendConfig vision_backend = default_backend("vision");
    BackendConfig detector_backend = default_backend("detector");

    static BackendConfig default_backend(std::string id) {
        BackendConfig b;
        b.id = std::move(id);
        return b;
    }

    // test hook: simulate a crash after this many records are on disk
    size_t abort_after_records = 0;

    /// Hash over every output-affecting field (manifest content included);
    /// directories, cassette mode and concurrency stay out.
    std::string config_hash() const;

    std::string effective_run_id() const;
    void validate() const;
};

/// Parse a key = value config document (TOML subset: [sections], strings,
/// integers, booleans, comments). Relative paths resolve against the
/// config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

/// The raw key/value view, exposed for tooling.
std::map<std::string, std::string> parse_kv_document(const std::string& text);

} // namespace vtp
