// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vtprompt/error.hpp"
#include "vtprompt/rng.hpp"
#include "vtprompt/report.hpp"
#include "vtprompt/scoring.hpp"
#include "vtprompt/util.hpp"

using namespace vtp;

namespace {

RunRecord yes_no_record(const std::string& id, const std::string& group, bool truth,
                        std::optional<bool> predicted, TaskKind task = TaskKind::mme("existence")) {
    RunRecord r;
    r.instance_id = id;
    r.task = task;
    r.image_group_id = group;
    r.ground_truth = truth ? "yes" : "no";
    if (predicted) r.parsed = ParsedAnswer{YesNoAnswer{*predicted}, "", ParsePath::Exact};
    r.correct = record_correct(r);
    return r;
}

RunRecord option_record(const std::string& id, const std::string& truth,
                        std::optional<std::string> predicted,
                        const std::string& ability = "object_localization") {
    RunRecord r;
    r.instance_id = id;
    r.task = TaskKind::mmb(ability);
    r.image_group_id = id;
    r.ground_truth = truth;
    r.options = {{"A", "a"}, {"B", "b"}, {"C", "c"}, {"D", "d"}};
    if (predicted) r.parsed = ParsedAnswer{OptionAnswer{*predicted}, "", ParsePath::Exact};
    r.correct = record_correct(r);
    return r;
}

// Independent confusion oracle: plain enumeration, no shared code path.
struct OracleCounts {
    uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
};
OracleCounts oracle_confusion(const std::vector<RunRecord>& records) {
    OracleCounts c;
    for (const auto& r : records) {
        bool truth = r.ground_truth == "yes";
        bool pred = false;
        if (r.status == "ok" && r.parsed)
            if (const auto* yn = std::get_if<YesNoAnswer>(&r.parsed->value)) pred = yn->value;
        if (truth && pred) ++c.tp;
        if (truth && !pred) ++c.fn;
        if (!truth && pred) ++c.fp;
        if (!truth && !pred) ++c.tn;
    }
    return c;
}

std::vector<RunRecord> random_yes_no_records(SplitMix64& rng, size_t max_n,
                                             TaskKind task = TaskKind::pope(PopeSetting::Random)) {
    size_t n = 1 + rng.bounded(max_n);
    std::vector<RunRecord> records;
    for (size_t i = 0; i < n; ++i) {
        bool truth = rng.bounded(2) == 0;
        std::optional<bool> pred;
        uint64_t roll = rng.bounded(10);
        if (roll < 8) pred = rng.bounded(2) == 0;  // 20% unparsable
        records.push_back(yes_no_record("r" + std::to_string(i), "g" + std::to_string(i / 2),
                                        truth, pred, task));
    }
    return records;
}

} // namespace

TEST_CASE("mme_acc basics") {
    std::vector<RunRecord> all_wrong, all_right;
    for (int i = 0; i < 60; ++i) {
        all_wrong.push_back(yes_no_record("w" + std::to_string(i), "g", true, false));
        all_right.push_back(yes_no_record("r" + std::to_string(i), "g", true, true));
    }
    CHECK(mme_acc(all_wrong) == 0.0);
    CHECK(mme_acc(all_right) == 100.0);

    // 17 of 20 correct, counted by hand
    std::vector<RunRecord> mixed;
    for (int i = 0; i < 20; ++i)
        mixed.push_back(yes_no_record("m" + std::to_string(i), "g", true, i < 17));
    CHECK(mme_acc(mixed) == doctest::Approx(85.0));

    CHECK_THROWS_AS(mme_acc({}), Error);
}

TEST_CASE("mme_acc_plus needs both answers of an image right") {
    // 10 groups: 6 fully correct, 3 half, 1 none -> 60.0
    std::vector<RunRecord> records;
    for (int g = 0; g < 10; ++g) {
        bool first_ok = g < 6 || (g >= 6 && g < 9);
        bool second_ok = g < 6;
        std::string group = "g" + std::to_string(g);
        records.push_back(yes_no_record(group + "_1", group, true, first_ok));
        records.push_back(yes_no_record(group + "_2", group, false, second_ok ? false : true));
    }
    CHECK(mme_acc_plus(records) == doctest::Approx(60.0));

    // every group exactly one correct: acc+ 0, acc 50
    std::vector<RunRecord> halves;
    for (int g = 0; g < 4; ++g) {
        std::string group = "h" + std::to_string(g);
        halves.push_back(yes_no_record(group + "_1", group, true, true));
        halves.push_back(yes_no_record(group + "_2", group, false, true));
    }
    CHECK(mme_acc_plus(halves) == 0.0);
    CHECK(mme_acc(halves) == doctest::Approx(50.0));

    // fully correct groups
    std::vector<RunRecord> full;
    for (int g = 0; g < 4; ++g) {
        std::string group = "f" + std::to_string(g);
        full.push_back(yes_no_record(group + "_1", group, true, true));
        full.push_back(yes_no_record(group + "_2", group, false, false));
    }
    CHECK(mme_acc_plus(full) == 100.0);

    // malformed group
    std::vector<RunRecord> lonely{yes_no_record("x", "gx", true, true)};
    CHECK_THROWS_AS(mme_acc_plus(lonely), Error);
}

TEST_CASE("acc_plus never exceeds acc") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        size_t groups = 1 + rng.bounded(30);
        std::vector<RunRecord> records;
        for (size_t g = 0; g < groups; ++g) {
            std::string group = "g" + std::to_string(g);
            records.push_back(
                yes_no_record(group + "_1", group, rng.bounded(2) == 0, rng.bounded(2) == 0));
            records.push_back(
                yes_no_record(group + "_2", group, rng.bounded(2) == 0, rng.bounded(2) == 0));
        }
        CHECK(mme_acc_plus(records) <= mme_acc(records) + 1e-12);
    }
}

TEST_CASE("mme_score sums acc and acc_plus per subtask") {
    // one subtask: 10 images, first question right everywhere, second in 6
    std::vector<RunRecord> records;
    for (int g = 0; g < 10; ++g) {
        std::string group = "g" + std::to_string(g);
        records.push_back(yes_no_record(group + "_1", group, true, true,
                                        TaskKind::mme("counting")));
        records.push_back(yes_no_record(group + "_2", group, false, g < 6 ? false : true,
                                        TaskKind::mme("counting")));
    }
    auto [subtasks, total] = mme_score(records);
    REQUIRE(subtasks.contains("counting"));
    // acc = 16/20 = 80, acc+ = 6/10 = 60, points = 140
    CHECK(subtasks["counting"].acc == doctest::Approx(80.0));
    CHECK(subtasks["counting"].acc_plus == doctest::Approx(60.0));
    CHECK(subtasks["counting"].points == doctest::Approx(140.0));
    CHECK(total == doctest::Approx(140.0));

    CHECK_THROWS_AS(mme_score({}), Error);
}

TEST_CASE("a perfect 14-subtask run scores 2800") {
    std::vector<RunRecord> records;
    for (const auto& subtask : mme_subtask_names()) {
        for (int g = 0; g < 3; ++g) {
            std::string group = subtask + std::to_string(g);
            records.push_back(
                yes_no_record(group + "_1", group, true, true, TaskKind::mme(subtask)));
            records.push_back(
                yes_no_record(group + "_2", group, false, false, TaskKind::mme(subtask)));
        }
    }
    auto [subtasks, total] = mme_score(records);
    CHECK(subtasks.size() == 14);
    for (const auto& [name, s] : subtasks) CHECK(s.points == doctest::Approx(200.0));
    CHECK(total == doctest::Approx(2800.0));
}

TEST_CASE("subtask points stay within [0,200] under random records") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<RunRecord> records;
        size_t groups = 1 + rng.bounded(10);
        for (size_t g = 0; g < groups; ++g) {
            std::string group = "g" + std::to_string(g);
            records.push_back(yes_no_record(group + "_1", group, rng.bounded(2) == 0,
                                            rng.bounded(2) == 0, TaskKind::mme("color")));
            records.push_back(yes_no_record(group + "_2", group, rng.bounded(2) == 0,
                                            rng.bounded(2) == 0, TaskKind::mme("color")));
        }
        auto [subtasks, total] = mme_score(records);
        CHECK(total >= 0.0);
        CHECK(total <= 200.0);
    }
}

TEST_CASE("mmb accuracy rounds to table precision at display") {
    // 211 of 315 correct -> 66.9841...%, printed 66.98
    std::vector<RunRecord> records;
    for (int i = 0; i < 315; ++i)
        records.push_back(option_record("q" + std::to_string(i), "A", i < 211 ? "A" : "B"));
    double acc = mmb_accuracy(records);
    CHECK(format_metric("mmb.object_localization", acc) == "66.98");

    // 8517 of 10000 -> 85.17 exactly at 2dp
    std::vector<RunRecord> big;
    for (int i = 0; i < 10000; ++i)
        big.push_back(option_record("b" + std::to_string(i), "C", i < 8517 ? "C" : "D"));
    CHECK(format_metric("mmb.overall", mmb_accuracy(big)) == "85.17");

    CHECK(mmb_accuracy({option_record("z", "A", "B")}) == 0.0);
}

TEST_CASE("unparsable answers count as incorrect") {
    std::vector<RunRecord> records{option_record("u1", "A", std::nullopt),
                                   option_record("u2", "A", "A")};
    CHECK(mmb_accuracy(records) == doctest::Approx(50.0));
}

TEST_CASE("pope metrics match the brute-force oracle") {
    SplitMix64 rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        auto records = random_yes_no_records(rng, 400);
        auto oracle = oracle_confusion(records);
        auto m = pope_metrics(records);
        CHECK(m.counts.tp == oracle.tp);
        CHECK(m.counts.fp == oracle.fp);
        CHECK(m.counts.tn == oracle.tn);
        CHECK(m.counts.fn == oracle.fn);

        double n = double(oracle.tp + oracle.fp + oracle.tn + oracle.fn);
        CHECK(*m.accuracy.value == doctest::Approx(100.0 * (oracle.tp + oracle.tn) / n).epsilon(1e-12));
        if (oracle.tp + oracle.fp > 0)
            CHECK(*m.precision.value ==
                  doctest::Approx(100.0 * oracle.tp / double(oracle.tp + oracle.fp)).epsilon(1e-12));
        else
            CHECK_FALSE(m.precision.value);
    }
}

TEST_CASE("f1 is the harmonic mean, between min and max of P and R") {
    SplitMix64 rng(4242);
    for (int trial = 0; trial < 200; ++trial) {
        auto records = random_yes_no_records(rng, 200);
        auto m = pope_metrics(records);
        if (!m.precision.value || !m.recall.value || !m.f1.value) continue;
        double p = *m.precision.value, r = *m.recall.value, f1 = *m.f1.value;
        CHECK(f1 == doctest::Approx(2 * p * r / (p + r)).epsilon(1e-12));
        CHECK(f1 >= std::min(p, r) - 1e-9);
        CHECK(f1 <= std::max(p, r) + 1e-9);
    }
}

TEST_CASE("undefined denominators report reasons, not zeros") {
    // nothing predicted positive
    std::vector<RunRecord> records{
        yes_no_record("a", "g", true, false, TaskKind::pope(PopeSetting::Random)),
        yes_no_record("b", "g", false, false, TaskKind::pope(PopeSetting::Random)),
    };
    auto m = pope_metrics(records);
    CHECK_FALSE(m.precision.value);
    CHECK(m.precision.note == "no positive predictions");
    CHECK_FALSE(m.f1.value);

    CHECK_THROWS_AS(pope_metrics({}), Error);
}

TEST_CASE("paper-table f1 consistency spot checks") {
    auto f1 = [](double p, double r) { return 2 * p * r / (p + r); };
    CHECK(format_fixed(f1(96.9, 54.4), 1) == "69.7");
    CHECK(format_fixed(f1(93.5, 81.1), 1) == "86.9");
}

TEST_CASE("delta report reproduces published deltas and formatting") {
    MetricsReport baseline, treatment;
    baseline.mme_total = 1926.50;
    treatment.mme_total = 2110.00;
    baseline.mmb_overall = 65.00;
    treatment.mmb_overall = 80.69;

    auto deltas = delta_report(baseline, treatment);
    REQUIRE(deltas.entries.size() == 2);
    for (const auto& e : deltas.entries) {
        if (e.key == "mme.total") {
            CHECK(format_delta(e.key, e.delta) == "+183.50");
            CHECK(format_metric(e.key, e.treatment) == "2110.00");
        } else {
            CHECK(e.key == "mmb.overall");
            CHECK(format_delta(e.key, e.delta) == "+15.69");
        }
    }

    auto zero = delta_report(baseline, baseline);
    for (const auto& e : zero.entries) CHECK(e.delta == 0.0);
}

TEST_CASE("error distribution over labeled records") {
    std::vector<RunRecord> records;
    auto labeled = [&](int n, ErrorCategory cat) {
        for (int i = 0; i < n; ++i) {
            auto r = option_record("e" + std::to_string(records.size()), "A", "B");
            r.error_category = cat;
            records.push_back(std::move(r));
        }
    };
    labeled(43, ErrorCategory::InadequateVisualGrounding);
    labeled(35, ErrorCategory::FaultyAttributeSpatialExtraction);
    labeled(18, ErrorCategory::FaultyLogicalReasoning);
    labeled(4, ErrorCategory::Other);

    auto dist = error_distribution(records);
    CHECK(dist["inadequate_visual_grounding"] == doctest::Approx(43.0));
    CHECK(dist["faulty_attribute_spatial_extraction"] == doctest::Approx(35.0));
    CHECK(dist["faulty_logical_reasoning"] == doctest::Approx(18.0));
    CHECK(dist["other"] == doctest::Approx(4.0));

    double sum = 0;
    for (const auto& [_, pct] : dist) sum += pct;
    CHECK(sum == doctest::Approx(100.0));

    CHECK(error_distribution({option_record("x", "A", "A")}).empty());

    // single category -> 100%
    std::vector<RunRecord> single;
    auto r = option_record("s", "A", "B");
    r.error_category = ErrorCategory::Other;
    single.push_back(r);
    CHECK(error_distribution(single)["other"] == doctest::Approx(100.0));
}

TEST_CASE("scoring is order independent") {
    SplitMix64 rng(777);
    auto records = random_yes_no_records(rng, 100);
    auto forward = pope_metrics(records);
    std::reverse(records.begin(), records.end());
    auto backward = pope_metrics(records);
    CHECK(forward.counts.tp == backward.counts.tp);
    CHECK(*forward.accuracy.value == *backward.accuracy.value);
}

TEST_CASE("markdown and csv reports carry deltas in table-style cells") {
    MetricsReport baseline, treatment;
    baseline.mmb_overall = 77.00;
    baseline.mmb_abilities["object_localization"] = 57.74;
    treatment.mmb_overall = 85.17;
    treatment.mmb_abilities["object_localization"] = 66.98;
    treatment.pope_settings["random"] = [] {
        PopeMetrics m;
        m.counts = {81, 0, 0, 19};
        m.accuracy = MetricValue::of(81.0);
        m.precision = MetricValue::of(100.0);
        m.recall = MetricValue::of(66.7);
        m.f1 = MetricValue::of(80.0);
        return m;
    }();

    auto md = render_markdown_report(treatment, baseline);
    CHECK(md.find("| **overall** | 85.17(+8.17) |") != std::string::npos);
    CHECK(md.find("66.98(+9.24)") != std::string::npos);
    CHECK(md.find("| random | 81.0 | 100.0 | 66.7 | 80.0 |") != std::string::npos);

    auto csv = render_csv_report(treatment, baseline);
    CHECK(csv.find("mmb.overall,85.17,77.00,+8.17") != std::string::npos);
    CHECK(csv.find("pope.random.f1,80.0") != std::string::npos);

    // absent metrics render their reason
    MetricsReport lonely;
    lonely.pope_settings["popular"] = [] {
        PopeMetrics m;
        m.counts = {0, 0, 5, 5};
        m.accuracy = MetricValue::of(50.0);
        m.precision = MetricValue::absent("no positive predictions");
        m.recall = MetricValue::of(0.0);
        m.f1 = MetricValue::absent("precision undefined: no positive predictions");
        return m;
    }();
    auto lonely_md = render_markdown_report(lonely);
    CHECK(lonely_md.find("n/a (no positive predictions)") != std::string::npos);
}

TEST_CASE("run records serialize and load back") {
    auto r = option_record("rt", "B", "B");
    r.error_category = ErrorCategory::FaultyLogicalReasoning;
    r.artifacts.concepts_hash = "c";
    r.artifacts.response_hash = "resp";
    auto j = r.to_json();
    auto back = RunRecord::from_json(j);
    CHECK(back.instance_id == r.instance_id);
    CHECK(back.ground_truth == r.ground_truth);
    CHECK(back.task.bench == Bench::Mmb);
    CHECK(back.options == r.options);
    REQUIRE(back.parsed.has_value());
    CHECK(*back.parsed->option_letter() == "B");
    CHECK(back.error_category == r.error_category);
    CHECK(back.artifacts.response_hash == "resp");
    CHECK(record_correct(back));
}
