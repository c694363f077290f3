// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/config.hpp"

#include <json.hpp>

#include "vtprompt/concepts.hpp"
#include "vtprompt/detection.hpp"
#include "vtprompt/error.hpp"
#include "vtprompt/hash.hpp"
#include "vtprompt/render.hpp"
#include "vtprompt/tprompt.hpp"
#include "vtprompt/util.hpp"

namespace vtp {

std::map<std::string, std::string> parse_kv_document(const std::string& text) {
    std::map<std::string, std::string> out;
    std::string section;
    size_t start = 0, line_no = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        std::string line =
            nl == std::string::npos ? text.substr(start) : text.substr(start, nl - start);
        ++line_no;

        // strip comments outside quotes
        bool in_quote = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quote = !in_quote;
            if (line[i] == '#' && !in_quote) {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (!line.empty()) {
            if (line.front() == '[') {
                if (line.back() != ']')
                    fail(Errc::ConfigInvalid, "line " + std::to_string(line_no) + ": bad section");
                section = trim(line.substr(1, line.size() - 2));
            } else {
                size_t eq = line.find('=');
                if (eq == std::string::npos)
                    fail(Errc::ConfigInvalid,
                         "line " + std::to_string(line_no) + ": expected key = value");
                std::string key = trim(line.substr(0, eq));
                std::string value = trim(line.substr(eq + 1));
                if (key.empty())
                    fail(Errc::ConfigInvalid, "line " + std::to_string(line_no) + ": empty key");
                if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
                    value = value.substr(1, value.size() - 2);
                out[section.empty() ? key : section + "." + key] = value;
            }
        }
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return out;
}

namespace {

std::string get_or(const std::map<std::string, std::string>& kv, const std::string& key,
                   const std::string& fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

int64_t get_int(const std::map<std::string, std::string>& kv, const std::string& key,
                int64_t fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        fail(Errc::ConfigInvalid, "key '" + key + "' is not an integer: " + it->second);
    }
}

bool get_bool(const std::map<std::string, std::string>& kv, const std::string& key,
              bool fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    fail(Errc::ConfigInvalid, "key '" + key + "' is not a boolean: " + it->second);
}

BackendConfig parse_backend(const std::map<std::string, std::string>& kv,
                            const std::string& section, BackendConfig defaults) {
    BackendConfig b = std::move(defaults);
    b.id = get_or(kv, section + ".id", b.id);
    b.model_id = get_or(kv, section + ".model", b.model_id);
    b.version = get_or(kv, section + ".version", b.version);
    b.host = get_or(kv, section + ".host", b.host);
    b.port = int(get_int(kv, section + ".port", b.port));
    b.path = get_or(kv, section + ".path", b.path);
    b.api_key_env = get_or(kv, section + ".api_key_env", b.api_key_env);
    return b;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base / path : path;
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    auto kv = parse_kv_document(read_file(path));
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    RunConfig cfg;
    if (auto it = kv.find("manifest"); it != kv.end()) cfg.manifest = resolve(base, it->second);
    cfg.output_dir = resolve(base, get_or(kv, "output_dir", "runs"));
    cfg.cache_dir = resolve(base, get_or(kv, "cache_dir", "cache"));
    cfg.cassette_dir = resolve(base, get_or(kv, "cassette_dir", "cassettes"));
    cfg.run_id = get_or(kv, "run_id", "");
    cfg.baseline = get_bool(kv, "baseline", false);
    cfg.detector_kind = get_or(kv, "detector_kind", cfg.detector_kind);
    cfg.style = get_or(kv, "style", cfg.style);
    cfg.strategy = get_or(kv, "strategy", cfg.strategy);
    cfg.cassette_mode = cassette_mode_from_name(get_or(kv, "cassette_mode", "replay"));
    cfg.max_concurrency = int(get_int(kv, "max_concurrency", cfg.max_concurrency));
    if (kv.contains("sample_n")) {
        SampleSpec s;
        s.n = size_t(get_int(kv, "sample_n", 0));
        s.seed = uint64_t(get_int(kv, "sample_seed", 0));
        cfg.sample = s;
    }
    cfg.text_backend = parse_backend(kv, "text_backend", RunConfig::default_backend("textllm"));
    cfg.vision_backend = parse_backend(kv, "vision_backend", RunConfig::default_backend("vision"));
    cfg.detector_backend =
        parse_backend(kv, "detector_backend", RunConfig::default_backend("detector"));
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    if (manifest.empty()) fail(Errc::ConfigInvalid, "manifest path is required");
    detector_backend_from_name(detector_kind);               // throws on bad value
    if (!baseline) VPromptStyle::from_name(style);           // throws on bad value
    prompt_strategy_from_name(strategy);                     // throws on bad value
    if (max_concurrency < 1) fail(Errc::ConfigInvalid, "max_concurrency must be >= 1");
    if (sample && sample->n == 0) fail(Errc::ConfigInvalid, "sample_n must be positive");
}

std::string RunConfig::config_hash() const {
    std::string manifest_digest;
    try {
        manifest_digest = sha256_hex(read_file(manifest));
    } catch (const Error&) {
        manifest_digest = "missing:" + manifest.string();
    }
    nlohmann::json j{
        {"manifest_sha256", manifest_digest},
        {"baseline", baseline},
        {"detector_kind", detector_kind},
        {"style", baseline ? "original" : style},
        {"strategy", strategy},
        {"text_model", text_backend.model_id},
        {"vision_model", vision_backend.model_id},
        {"detector_version", detector_backend.version},
        {"extraction_prompt_version", std::string(kExtractionPromptVersion)},
        {"answer_prompt_version", std::string(kAnswerPromptVersion)},
    };
    if (sample) j["sample"] = {{"n", sample->n}, {"seed", sample->seed}};
    return sha256_hex(j.dump());
}

std::string RunConfig::effective_run_id() const {
    if (!run_id.empty()) return run_id;
    return config_hash().substr(0, 12);
}

} // namespace vtp
