// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtprompt/tprompt.hpp"
#include "vtprompt/types.hpp"

namespace vtp {

enum class ErrorCategory {
    InadequateVisualGrounding,
    FaultyAttributeSpatialExtraction,
    FaultyLogicalReasoning,
    Other,
};

std::string_view error_category_name(ErrorCategory c);
ErrorCategory error_category_from_name(std::string_view name);

struct StageArtifacts {
    std::string concepts_hash;
    std::string detections_hash;
    std::string annotated_image_hash;
    std::string prompt_hash;
    std::string response_hash;
};

/// Per-instance outcome of a run. `correct` is derived from the parsed
/// answer and ground truth; scoring recomputes it rather than trusting
/// the stored flag.
struct RunRecord {
    std::string instance_id;
    TaskKind task;
    std::string image_group_id;
    std::string ground_truth;
    Options options;
    std::optional<ParsedAnswer> parsed;  // empty when unparsable or failed
    std::string raw_response;
    bool correct = false;
    std::string status = "ok";  // "ok" | "failed"
    std::string error;          // failure detail for failed records
    std::optional<ErrorCategory> error_category;
    StageArtifacts artifacts;

    nlohmann::json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
};

bool answer_matches_truth(const ParsedAnswer& parsed, const std::string& ground_truth);
bool record_correct(const RunRecord& r);

struct ConfusionCounts {
    uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
    uint64_t total() const { return tp + fp + tn + fn; }
};

/// A metric that may be undefined; absent values carry the reason instead
/// of silently collapsing to zero.
struct MetricValue {
    std::optional<double> value;
    std::string note;

    static MetricValue of(double v) { return {v, {}}; }
    static MetricValue absent(std::string reason) { return {std::nullopt, std::move(reason)}; }
};

struct MmeSubtaskScore {
    double acc = 0;       // percent
    double acc_plus = 0;  // percent
    double points = 0;    // acc + acc_plus, up to 200
    uint64_t questions = 0;
    uint64_t images = 0;
};

struct PopeMetrics {
    ConfusionCounts counts;
    MetricValue accuracy, precision, recall, f1;
};

struct MetricsReport {
    std::map<std::string, MmeSubtaskScore> mme_subtasks;
    std::optional<double> mme_total;

    std::map<std::string, double> mmb_abilities;  // percent per ability
    std::optional<double> mmb_overall;
    uint64_t mmb_questions = 0;

    std::map<std::string, PopeMetrics> pope_settings;

    std::map<std::string, double> error_distribution;  // percent per category
    uint64_t labeled_errors = 0;

    /// Flat numeric view ("mme.total", "pope.random.f1", ...) used for
    /// delta computation and CSV output.
    std::map<std::string, double> flat() const;
};

// Confusion counting over yes/no records: an unparsable or failed answer
// counts as a negative prediction.
ConfusionCounts count_confusion(const std::vector<RunRecord>& records);

double mme_acc(const std::vector<RunRecord>& records);
double mme_acc_plus(const std::vector<RunRecord>& records);

/// Per-subtask Acc + Acc+ points and their sum. Records are grouped by
/// task name; each subtask contributes up to 200 points.
std::pair<std::map<std::string, MmeSubtaskScore>, double> mme_score(
    const std::vector<RunRecord>& records);

double mmb_accuracy(const std::vector<RunRecord>& records);
std::map<std::string, double> mmb_by_ability(const std::vector<RunRecord>& records);

PopeMetrics pope_metrics(const std::vector<RunRecord>& records);

std::map<std::string, double> error_distribution(const std::vector<RunRecord>& records);

/// Score everything present in the record set.
MetricsReport score_records(const std::vector<RunRecord>& records);

struct DeltaEntry {
    std::string key;
    double baseline = 0;
    double treatment = 0;
    double delta = 0;
};

struct DeltaReport {
    std::vector<DeltaEntry> entries;  // keys shared by both reports
};

DeltaReport delta_report(const MetricsReport& baseline, const MetricsReport& treatment);

/// Display formatting: "2110.00(+183.50)" style, decimals per benchmark
/// family (2 for MME/MMB, 1 for POPE).
int display_decimals(const std::string& key);
std::string format_metric(const std::string& key, double value);
std::string format_delta(const std::string& key, double delta);

} // namespace vtp
