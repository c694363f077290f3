// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vtprompt/config.hpp"
#include "vtprompt/report.hpp"
#include "vtprompt/scoring.hpp"

namespace vtp {

inline constexpr const char* kToolVersion = "0.1.0";

/// Thrown by the abort_after_records test hook; mimics a hard crash
/// without taking the test process down.
struct AbortForTest : std::exception {
    const char* what() const noexcept override { return "aborted by test hook"; }
};

struct StageStats {
    uint64_t hits = 0;
    uint64_t misses = 0;
};

struct RunManifest {
    std::string run_id;
    std::string config_hash;
    std::string tool_version = kToolVersion;
    uint64_t wall_ms = 0;
    uint64_t records = 0;
    uint64_t network_calls = 0;
    std::map<std::string, StageStats> stages;  // concepts / detections / render / response

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

struct RunResult {
    std::filesystem::path run_dir;
    RunManifest manifest;
};

/// Execute the full pipeline over every manifest instance: concepts ->
/// detection -> marker render -> answer query -> parse, with per-stage
/// caching and append-only records. Rerunning the same config resumes:
/// already-recorded instances are skipped and remaining ones appended in
/// manifest order, so an interrupted run converges to the same bytes.
RunResult run_eval(const RunConfig& config);

struct AblationAxes {
    std::vector<std::string> strategies;
    std::vector<std::string> styles;
    std::vector<std::string> detector_kinds;
};

struct AblationResult {
    std::vector<RunResult> cells;
    std::filesystem::path report_path;
};

/// One run per grid cell; caches and cassettes are shared, so stages whose
/// inputs coincide across cells compute once. Empty axes collapse to the
/// base config.
AblationResult run_ablation(const RunConfig& base, const AblationAxes& axes);

std::vector<RunRecord> load_records(const std::filesystem::path& run_dir);

/// Optional error-category labels, JSONL of {"instance_id", "category"}.
void apply_error_labels(std::vector<RunRecord>& records, const std::filesystem::path& labels_path);

/// Score a run directory, write report.md / report.csv next to the
/// records, and return the report. A baseline directory adds deltas.
MetricsReport score_run(const std::filesystem::path& run_dir,
                        const std::optional<std::filesystem::path>& baseline_dir = std::nullopt,
                        const std::optional<std::filesystem::path>& labels_path = std::nullopt);

} // namespace vtp
