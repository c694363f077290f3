// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "vtprompt/util.hpp"

namespace vtp {

std::string_view error_category_name(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::InadequateVisualGrounding: return "inadequate_visual_grounding";
    case ErrorCategory::FaultyAttributeSpatialExtraction:
        return "faulty_attribute_spatial_extraction";
    case ErrorCategory::FaultyLogicalReasoning: return "faulty_logical_reasoning";
    case ErrorCategory::Other: return "other";
    }
    return "other";
}

ErrorCategory error_category_from_name(std::string_view name) {
    if (name == "inadequate_visual_grounding") return ErrorCategory::InadequateVisualGrounding;
    if (name == "faulty_attribute_spatial_extraction")
        return ErrorCategory::FaultyAttributeSpatialExtraction;
    if (name == "faulty_logical_reasoning") return ErrorCategory::FaultyLogicalReasoning;
    if (name == "other") return ErrorCategory::Other;
    fail(Errc::ConfigInvalid, "unknown error category '" + std::string(name) + "'");
}

nlohmann::json RunRecord::to_json() const {
    nlohmann::json j;
    j["instance_id"] = instance_id;
    nlohmann::json task_j{{"bench", std::string(bench_name(task.bench))}};
    if (task.bench == Bench::Pope)
        task_j["setting"] = std::string(pope_setting_name(task.setting));
    else
        task_j["name"] = task.name;
    j["task"] = std::move(task_j);
    j["image_group_id"] = image_group_id;
    j["ground_truth"] = ground_truth;
    if (!options.empty()) {
        nlohmann::json opts = nlohmann::json::array();
        for (const auto& [letter, text] : options) opts.push_back({letter, text});
        j["options"] = std::move(opts);
    }
    if (parsed) {
        nlohmann::json p;
        if (const auto* yn = std::get_if<YesNoAnswer>(&parsed->value)) {
            p["kind"] = "yes_no";
            p["value"] = yn->value;
        } else if (const auto* opt = std::get_if<OptionAnswer>(&parsed->value)) {
            p["kind"] = "option";
            p["value"] = opt->letter;
        } else if (const auto* fr = std::get_if<FreeAnswer>(&parsed->value)) {
            p["kind"] = "free";
            p["value"] = fr->text;
        }
        p["parse_path"] = std::string(parse_path_name(parsed->parse_path));
        j["parsed"] = std::move(p);
    } else {
        j["parsed"] = nullptr;
    }
    j["raw_response"] = raw_response;
    j["correct"] = correct;
    j["status"] = status;
    if (!error.empty()) j["error"] = error;
    if (error_category) j["error_category"] = std::string(error_category_name(*error_category));
    j["artifacts"] = {{"concepts", artifacts.concepts_hash},
                      {"detections", artifacts.detections_hash},
                      {"annotated_image", artifacts.annotated_image_hash},
                      {"prompt", artifacts.prompt_hash},
                      {"response", artifacts.response_hash}};
    return j;
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
    RunRecord r;
    try {
        r.instance_id = j.at("instance_id").get<std::string>();
        const auto& tj = j.at("task");
        Bench bench = bench_from_name(tj.at("bench").get<std::string>());
        switch (bench) {
        case Bench::Mme: r.task = TaskKind::mme(tj.at("name").get<std::string>()); break;
        case Bench::Mmb: r.task = TaskKind::mmb(tj.at("name").get<std::string>()); break;
        case Bench::Pope:
            r.task = TaskKind::pope(pope_setting_from_name(tj.at("setting").get<std::string>()));
            break;
        }
        r.image_group_id = j.at("image_group_id").get<std::string>();
        r.ground_truth = j.at("ground_truth").get<std::string>();
        if (auto it = j.find("options"); it != j.end() && it->is_array()) {
            for (const auto& o : *it)
                r.options.emplace_back(o.at(0).get<std::string>(), o.at(1).get<std::string>());
        }
        if (auto it = j.find("parsed"); it != j.end() && !it->is_null()) {
            ParsedAnswer p;
            std::string kind = it->at("kind").get<std::string>();
            if (kind == "yes_no")
                p.value = YesNoAnswer{it->at("value").get<bool>()};
            else if (kind == "option")
                p.value = OptionAnswer{it->at("value").get<std::string>()};
            else
                p.value = FreeAnswer{it->at("value").get<std::string>()};
            std::string path = it->at("parse_path").get<std::string>();
            p.parse_path = path == "pattern"   ? ParsePath::Pattern
                           : path == "fallback" ? ParsePath::Fallback
                                                : ParsePath::Exact;
            r.parsed = std::move(p);
        }
        r.raw_response = j.value("raw_response", std::string());
        r.correct = j.value("correct", false);
        r.status = j.value("status", std::string("ok"));
        r.error = j.value("error", std::string());
        if (auto it = j.find("error_category"); it != j.end() && !it->is_null())
            r.error_category = error_category_from_name(it->get<std::string>());
        if (auto it = j.find("artifacts"); it != j.end() && it->is_object()) {
            r.artifacts.concepts_hash = it->value("concepts", std::string());
            r.artifacts.detections_hash = it->value("detections", std::string());
            r.artifacts.annotated_image_hash = it->value("annotated_image", std::string());
            r.artifacts.prompt_hash = it->value("prompt", std::string());
            r.artifacts.response_hash = it->value("response", std::string());
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::ManifestError, std::string("run record: ") + e.what());
    }
    return r;
}

bool answer_matches_truth(const ParsedAnswer& parsed, const std::string& ground_truth) {
    if (const auto* yn = std::get_if<YesNoAnswer>(&parsed.value))
        return (yn->value ? "yes" : "no") == ground_truth;
    if (const auto* opt = std::get_if<OptionAnswer>(&parsed.value))
        return opt->letter == ground_truth;
    if (const auto* fr = std::get_if<FreeAnswer>(&parsed.value))
        return normalize_token(fr->text) == normalize_token(ground_truth);
    return false;
}

bool record_correct(const RunRecord& r) {
    if (r.status != "ok" || !r.parsed) return false;
    return answer_matches_truth(*r.parsed, r.ground_truth);
}

ConfusionCounts count_confusion(const std::vector<RunRecord>& records) {
    ConfusionCounts c;
    for (const auto& r : records) {
        bool truth = r.ground_truth == "yes";
        bool predicted_yes = r.status == "ok" && r.parsed && r.parsed->is_yes();
        if (truth)
            predicted_yes ? ++c.tp : ++c.fn;
        else
            predicted_yes ? ++c.fp : ++c.tn;
    }
    return c;
}

double mme_acc(const std::vector<RunRecord>& records) {
    if (records.empty()) fail(Errc::EmptyRecordSet, "mme_acc over zero records");
    uint64_t correct = 0;
    for (const auto& r : records) correct += record_correct(r) ? 1 : 0;
    return 100.0 * double(correct) / double(records.size());
}

double mme_acc_plus(const std::vector<RunRecord>& records) {
    if (records.empty()) fail(Errc::EmptyRecordSet, "mme_acc_plus over zero records");
    std::map<std::string, std::pair<uint64_t, uint64_t>> groups;  // group -> (count, correct)
    for (const auto& r : records) {
        auto& [count, correct] = groups[r.image_group_id];
        ++count;
        correct += record_correct(r) ? 1 : 0;
    }
    uint64_t full = 0;
    for (const auto& [group, cc] : groups) {
        if (cc.first != 2)
            fail(Errc::MalformedGroup, "image group '" + group + "' has " +
                                           std::to_string(cc.first) + " records, expected 2");
        if (cc.second == 2) ++full;
    }
    return 100.0 * double(full) / double(groups.size());
}

std::pair<std::map<std::string, MmeSubtaskScore>, double> mme_score(
    const std::vector<RunRecord>& records) {
    std::map<std::string, std::vector<RunRecord>> by_subtask;
    for (const auto& r : records)
        if (r.task.bench == Bench::Mme) by_subtask[r.task.name].push_back(r);
    if (by_subtask.empty()) fail(Errc::EmptyRecordSet, "no MME records");

    std::map<std::string, MmeSubtaskScore> scores;
    double total = 0;
    for (const auto& [name, recs] : by_subtask) {
        MmeSubtaskScore s;
        s.acc = mme_acc(recs);
        s.acc_plus = mme_acc_plus(recs);
        s.points = s.acc + s.acc_plus;
        s.questions = recs.size();
        s.images = recs.size() / 2;
        total += s.points;
        scores.emplace(name, s);
    }
    return {std::move(scores), total};
}

double mmb_accuracy(const std::vector<RunRecord>& records) {
    if (records.empty()) fail(Errc::EmptyRecordSet, "mmb_accuracy over zero records");
    uint64_t correct = 0;
    for (const auto& r : records) correct += record_correct(r) ? 1 : 0;
    return 100.0 * double(correct) / double(records.size());
}

std::map<std::string, double> mmb_by_ability(const std::vector<RunRecord>& records) {
    std::map<std::string, std::vector<RunRecord>> by_ability;
    for (const auto& r : records)
        if (r.task.bench == Bench::Mmb) by_ability[r.task.name].push_back(r);
    std::map<std::string, double> out;
    for (const auto& [name, recs] : by_ability) out[name] = mmb_accuracy(recs);
    return out;
}

PopeMetrics pope_metrics(const std::vector<RunRecord>& records) {
    if (records.empty()) fail(Errc::EmptyRecordSet, "pope_metrics over zero records");
    PopeMetrics m;
    m.counts = count_confusion(records);
    const auto& c = m.counts;

    m.accuracy = MetricValue::of(100.0 * double(c.tp + c.tn) / double(c.total()));
    if (c.tp + c.fp == 0)
        m.precision = MetricValue::absent("no positive predictions");
    else
        m.precision = MetricValue::of(100.0 * double(c.tp) / double(c.tp + c.fp));
    if (c.tp + c.fn == 0)
        m.recall = MetricValue::absent("no positive ground truths");
    else
        m.recall = MetricValue::of(100.0 * double(c.tp) / double(c.tp + c.fn));

    if (!m.precision.value)
        m.f1 = MetricValue::absent("precision undefined: " + m.precision.note);
    else if (!m.recall.value)
        m.f1 = MetricValue::absent("recall undefined: " + m.recall.note);
    else if (*m.precision.value + *m.recall.value == 0.0)
        m.f1 = MetricValue::absent("precision and recall both zero");
    else
        m.f1 = MetricValue::of(2.0 * *m.precision.value * *m.recall.value /
                               (*m.precision.value + *m.recall.value));
    return m;
}

std::map<std::string, double> error_distribution(const std::vector<RunRecord>& records) {
    std::map<std::string, uint64_t> counts;
    uint64_t labeled = 0;
    for (const auto& r : records) {
        if (!r.error_category) continue;
        ++labeled;
        ++counts[std::string(error_category_name(*r.error_category))];
    }
    std::map<std::string, double> out;
    if (labeled == 0) return out;
    for (const auto& [name, n] : counts) out[name] = 100.0 * double(n) / double(labeled);
    return out;
}

MetricsReport score_records(const std::vector<RunRecord>& records) {
    MetricsReport report;
    std::vector<RunRecord> mme, mmb;
    std::map<std::string, std::vector<RunRecord>> pope;
    for (const auto& r : records) {
        switch (r.task.bench) {
        case Bench::Mme: mme.push_back(r); break;
        case Bench::Mmb: mmb.push_back(r); break;
        case Bench::Pope:
            pope[std::string(pope_setting_name(r.task.setting))].push_back(r);
            break;
        }
    }
    if (!mme.empty()) {
        auto [subtasks, total] = mme_score(mme);
        report.mme_subtasks = std::move(subtasks);
        report.mme_total = total;
    }
    if (!mmb.empty()) {
        report.mmb_overall = mmb_accuracy(mmb);
        report.mmb_abilities = mmb_by_ability(mmb);
        report.mmb_questions = mmb.size();
    }
    for (const auto& [setting, recs] : pope) report.pope_settings[setting] = pope_metrics(recs);
    report.error_distribution = error_distribution(records);
    for (const auto& r : records) report.labeled_errors += r.error_category ? 1 : 0;
    return report;
}

std::map<std::string, double> MetricsReport::flat() const {
    std::map<std::string, double> out;
    for (const auto& [name, s] : mme_subtasks) {
        out["mme." + name + ".acc"] = s.acc;
        out["mme." + name + ".acc_plus"] = s.acc_plus;
        out["mme." + name + ".points"] = s.points;
    }
    if (mme_total) out["mme.total"] = *mme_total;
    for (const auto& [name, acc] : mmb_abilities) out["mmb." + name] = acc;
    if (mmb_overall) out["mmb.overall"] = *mmb_overall;
    for (const auto& [setting, m] : pope_settings) {
        const std::string prefix = "pope." + setting + ".";
        if (m.accuracy.value) out[prefix + "accuracy"] = *m.accuracy.value;
        if (m.precision.value) out[prefix + "precision"] = *m.precision.value;
        if (m.recall.value) out[prefix + "recall"] = *m.recall.value;
        if (m.f1.value) out[prefix + "f1"] = *m.f1.value;
    }
    for (const auto& [name, pct] : error_distribution) out["errors." + name] = pct;
    return out;
}

DeltaReport delta_report(const MetricsReport& baseline, const MetricsReport& treatment) {
    auto base = baseline.flat();
    auto treat = treatment.flat();
    DeltaReport out;
    for (const auto& [key, tv] : treat) {
        auto it = base.find(key);
        if (it == base.end()) continue;
        out.entries.push_back({key, it->second, tv, tv - it->second});
    }
    return out;
}

int display_decimals(const std::string& key) {
    return key.rfind("pope.", 0) == 0 ? 1 : 2;
}

std::string format_metric(const std::string& key, double value) {
    return format_fixed(value, display_decimals(key));
}

std::string format_delta(const std::string& key, double delta) {
    std::string s = format_fixed(delta, display_decimals(key));
    if (delta >= 0) s.insert(s.begin(), '+');
    return s;
}

} // namespace vtp
