// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "test_support.hpp"
#include "vtprompt/dataset.hpp"
#include "vtprompt/pipeline.hpp"
#include "vtprompt/util.hpp"

using namespace vtp;

namespace {

const std::filesystem::path kFixtureDir = VT_FIXTURE_DIR;

RunConfig fixture_config(const std::filesystem::path& work) {
    RunConfig cfg;
    cfg.manifest = kFixtureDir / "run5" / "manifest.jsonl";
    cfg.cassette_dir = kFixtureDir / "run5" / "cassettes";
    cfg.output_dir = work / "runs";
    cfg.cache_dir = work / "cache";
    cfg.cassette_mode = CassetteMode::Replay;
    cfg.detector_kind = "grounding_box";
    cfg.style = "type_a";
    cfg.strategy = "tprompt";
    cfg.text_backend.model_id = "fixture-text";
    cfg.vision_backend.model_id = "fixture-vision";
    cfg.detector_backend.version = "v1";
    return cfg;
}

std::string records_bytes(const std::filesystem::path& run_dir) {
    return read_file(run_dir / "records.jsonl");
}

size_t line_count(const std::string& content) {
    size_t n = 0;
    for (char c : content) n += c == '\n' ? 1 : 0;
    return n;
}

} // namespace

TEST_CASE("config documents parse with sections, comments and overrides") {
    vtt::TempDir tmp;
    auto manifest = kFixtureDir / "run5" / "manifest.jsonl";
    std::string doc;
    doc += "# harness config\n";
    doc += "manifest = \"" + manifest.string() + "\"\n";
    doc += "style = \"type_c\"   # comment after value\n";
    doc += "strategy = \"zs_cot\"\n";
    doc += "cassette_mode = \"record\"\n";
    doc += "sample_n = 4\n";
    doc += "sample_seed = 11\n";
    doc += "max_concurrency = 2\n";
    doc += "baseline = false\n";
    doc += "\n[vision_backend]\n";
    doc += "model = \"gpt-like\"\n";
    doc += "host = \"127.0.0.1\"\n";
    doc += "port = 8080\n";
    doc += "api_key_env = \"VISION_KEY\"\n";
    auto path = tmp.file("cfg.toml", doc);

    auto cfg = load_run_config(path);
    CHECK(cfg.manifest == manifest);
    CHECK(cfg.style == "type_c");
    CHECK(cfg.strategy == "zs_cot");
    CHECK(cfg.cassette_mode == CassetteMode::Record);
    REQUIRE(cfg.sample.has_value());
    CHECK(cfg.sample->n == 4);
    CHECK(cfg.sample->seed == 11);
    CHECK(cfg.max_concurrency == 2);
    CHECK(cfg.vision_backend.model_id == "gpt-like");
    CHECK(cfg.vision_backend.host == "127.0.0.1");
    CHECK(cfg.vision_backend.port == 8080);
    CHECK(cfg.vision_backend.api_key_env == "VISION_KEY");
    // relative paths resolve against the config file directory
    CHECK(cfg.output_dir == tmp.path / "runs");
}

TEST_CASE("config validation rejects bad values") {
    vtt::TempDir tmp;
    auto manifest = kFixtureDir / "run5" / "manifest.jsonl";
    auto base = [&](const std::string& extra) {
        return "manifest = \"" + manifest.string() + "\"\n" + extra;
    };
    CHECK_THROWS_AS(load_run_config(tmp.file("a.toml", base("style = \"type_q\"\n"))), Error);
    CHECK_THROWS_AS(load_run_config(tmp.file("b.toml", base("strategy = \"vibes\"\n"))), Error);
    CHECK_THROWS_AS(load_run_config(tmp.file("c.toml", base("max_concurrency = 0\n"))), Error);
    CHECK_THROWS_AS(load_run_config(tmp.file("d.toml", base("sample_n = 0\n"))), Error);
    CHECK_THROWS_AS(load_run_config(tmp.file("e.toml", "style = \"type_a\"\n")), Error);
    CHECK_THROWS_AS(load_run_config(tmp.file("f.toml", base("no equals sign here\n"))), Error);
}

TEST_CASE("config hash tracks output-affecting fields only") {
    vtt::TempDir tmp;
    auto cfg = fixture_config(tmp.path);
    auto base_hash = cfg.config_hash();

    auto widened = cfg;
    widened.max_concurrency = 16;
    widened.cassette_mode = CassetteMode::Record;
    widened.output_dir = tmp.path / "elsewhere";
    CHECK(widened.config_hash() == base_hash);

    auto restyled = cfg;
    restyled.style = "type_d";
    CHECK(restyled.config_hash() != base_hash);

    auto sampled = cfg;
    sampled.sample = SampleSpec{2, 9};
    CHECK(sampled.config_hash() != base_hash);

    auto baselined = cfg;
    baselined.baseline = true;
    CHECK(baselined.config_hash() != base_hash);
}

TEST_CASE("replay run over the bundled fixture is deterministic") {
    vtt::TempDir tmp_a, tmp_b;
    auto a = run_eval(fixture_config(tmp_a.path));
    auto b = run_eval(fixture_config(tmp_b.path));

    CHECK(a.manifest.records == 5);
    CHECK(a.manifest.network_calls == 0);
    CHECK(records_bytes(a.run_dir) == records_bytes(b.run_dir));

    // annotated outputs byte-identical too
    for (const auto& entry : std::filesystem::directory_iterator(a.run_dir / "annotated")) {
        if (entry.path().extension() != ".png") continue;
        auto other = b.run_dir / "annotated" / entry.path().filename();
        REQUIRE(std::filesystem::exists(other));
        CHECK(read_file(entry.path()) == read_file(other));
    }
}

TEST_CASE("rerunning the same config is all cache hits with identical bytes") {
    vtt::TempDir tmp;
    auto first = run_eval(fixture_config(tmp.path));
    auto bytes_first = records_bytes(first.run_dir);

    auto second = run_eval(fixture_config(tmp.path));
    CHECK(second.run_dir == first.run_dir);
    CHECK(records_bytes(second.run_dir) == bytes_first);
    CHECK(second.manifest.stages["render"].misses == 0);
    CHECK(second.manifest.stages["concepts"].misses == 0);
    // no instance re-processed: hit counters stay zero because records exist
    CHECK(second.manifest.records == 5);
}

TEST_CASE("a cassette miss fails one record without touching its neighbors") {
    vtt::TempDir tmp;
    // clone the fixture manifest, inserting an uncovered instance third
    auto fixture_manifest = kFixtureDir / "run5" / "manifest.jsonl";
    std::ifstream in(fixture_manifest);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        // the clone lives outside the fixture dir: make image paths absolute
        auto j = nlohmann::json::parse(line);
        j["image_path"] =
            (kFixtureDir / "run5" / j["image_path"].get<std::string>()).string();
        lines.push_back(j.dump());
    }
    REQUIRE(lines.size() == 5);

    auto img_path = (kFixtureDir / "run5" / "images" / "img1.png").string();
    std::string intruder =
        R"({"id": "no_cassette", "image_path": ")" + img_path +
        R"(", "question": "Is there a purple cube?", "ground_truth": "no", )"
        R"("task": {"bench": "mme", "name": "existence"}, "image_group_id": "gx"})";
    std::string intruder2 =
        R"({"id": "no_cassette_2", "image_path": ")" + img_path +
        R"(", "question": "Is there an orange cone?", "ground_truth": "no", )"
        R"("task": {"bench": "mme", "name": "existence"}, "image_group_id": "gx"})";

    std::string manifest;
    manifest += lines[0] + "\n" + lines[1] + "\n";
    manifest += intruder + "\n" + intruder2 + "\n";
    manifest += lines[2] + "\n" + lines[3] + "\n" + lines[4] + "\n";
    auto manifest_path = tmp.file("manifest.jsonl", manifest);

    auto cfg = fixture_config(tmp.path);
    cfg.manifest = manifest_path;
    auto result = run_eval(cfg);
    CHECK(result.manifest.records == 7);

    auto records = load_records(result.run_dir);
    REQUIRE(records.size() == 7);
    std::map<std::string, std::string> status;
    for (const auto& r : records) status[r.instance_id] = r.status;
    CHECK(status["no_cassette"] == "failed");
    CHECK(status["no_cassette_2"] == "failed");
    CHECK(status["mme_g1_q1"] == "ok");
    CHECK(status["mme_g1_q2"] == "ok");
    CHECK(status["mmb_loc_1"] == "ok");
    CHECK(status["mmb_loc_2"] == "ok");
    CHECK(status["pope_r_1"] == "ok");

    for (const auto& r : records) {
        if (r.status != "failed") continue;
        CHECK(r.error.find("CassetteMiss") != std::string::npos);
        CHECK_FALSE(record_correct(r));
    }
}

TEST_CASE("an interrupted run resumes to the exact bytes of a clean run") {
    vtt::TempDir clean_dir, crash_dir;
    auto clean = run_eval(fixture_config(clean_dir.path));
    auto clean_bytes = records_bytes(clean.run_dir);

    auto cfg = fixture_config(crash_dir.path);
    cfg.abort_after_records = 2;
    CHECK_THROWS_AS(run_eval(cfg), AbortForTest);

    auto run_dir = cfg.output_dir / cfg.effective_run_id();
    auto partial = records_bytes(run_dir);
    CHECK(line_count(partial) == 2);
    CHECK_FALSE(std::filesystem::exists(run_dir / "manifest.json"));  // incomplete by definition

    cfg.abort_after_records = 0;
    auto resumed = run_eval(cfg);
    CHECK(resumed.manifest.records == 5);
    auto final_bytes = records_bytes(resumed.run_dir);
    CHECK(final_bytes == clean_bytes);

    // no duplicate ids
    auto records = load_records(resumed.run_dir);
    std::set<std::string> ids;
    for (const auto& r : records) ids.insert(r.instance_id);
    CHECK(ids.size() == 5);
}

TEST_CASE("resume drops a half-written trailing line") {
    vtt::TempDir tmp;
    auto cfg = fixture_config(tmp.path);
    auto result = run_eval(cfg);
    auto records_path = result.run_dir / "records.jsonl";

    // chop the file mid-line, as a hard kill would
    auto bytes = read_file(records_path);
    write_file_atomic(records_path, bytes.substr(0, bytes.size() - 25));

    auto resumed = run_eval(cfg);
    CHECK(records_bytes(resumed.run_dir) == bytes);
}

TEST_CASE("baseline mode skips extraction, detection and render") {
    vtt::TempDir tmp;
    auto cfg = fixture_config(tmp.path);
    cfg.baseline = true;
    auto result = run_eval(cfg);
    CHECK(result.manifest.records == 5);
    CHECK(result.manifest.network_calls == 0);

    const auto& stages = result.manifest.stages;
    CHECK(stages.at("concepts").hits + stages.at("concepts").misses == 0);
    CHECK(stages.at("render").hits + stages.at("render").misses == 0);
    CHECK(stages.at("detections").hits == 0);

    auto records = load_records(result.run_dir);
    for (const auto& r : records) {
        CHECK(r.status == "ok");
        CHECK(r.artifacts.concepts_hash.empty());
        CHECK(r.artifacts.detections_hash.empty());
    }

    // same responses in the fixture, so the same scores
    auto report = score_run(result.run_dir);
    CHECK(*report.mme_total == doctest::Approx(50.0));
    CHECK(*report.mmb_overall == doctest::Approx(50.0));

    // distinct run directory: baseline mode participates in the config hash
    CHECK(cfg.effective_run_id() != fixture_config(tmp.path).effective_run_id());
}

TEST_CASE("score_run reproduces the fixture's hand-computed metrics") {
    vtt::TempDir tmp;
    auto result = run_eval(fixture_config(tmp.path));
    auto report = score_run(result.run_dir);

    // MME existence: yes-question right, no-question wrong
    REQUIRE(report.mme_subtasks.contains("existence"));
    CHECK(report.mme_subtasks.at("existence").acc == doctest::Approx(50.0));
    CHECK(report.mme_subtasks.at("existence").acc_plus == doctest::Approx(0.0));
    CHECK(report.mme_subtasks.at("existence").points == doctest::Approx(50.0));
    CHECK(*report.mme_total == doctest::Approx(50.0));

    // MMB: one right, one unparsable
    CHECK(*report.mmb_overall == doctest::Approx(50.0));

    // POPE random: single true positive
    REQUIRE(report.pope_settings.contains("random"));
    const auto& pope = report.pope_settings.at("random");
    CHECK(*pope.accuracy.value == doctest::Approx(100.0));
    CHECK(*pope.precision.value == doctest::Approx(100.0));
    CHECK(*pope.recall.value == doctest::Approx(100.0));
    CHECK(*pope.f1.value == doctest::Approx(100.0));

    CHECK(std::filesystem::exists(result.run_dir / "report.md"));
    CHECK(std::filesystem::exists(result.run_dir / "report.csv"));
}

TEST_CASE("scoring a run against itself gives zero deltas") {
    vtt::TempDir tmp;
    auto result = run_eval(fixture_config(tmp.path));
    auto report = score_run(result.run_dir, result.run_dir);
    auto same = score_run(result.run_dir);
    auto deltas = delta_report(same, report);
    for (const auto& e : deltas.entries) CHECK(e.delta == doctest::Approx(0.0));
}

TEST_CASE("an empty manifest yields an empty completed run") {
    vtt::TempDir tmp;
    auto cfg = fixture_config(tmp.path);
    cfg.manifest = tmp.file("empty.jsonl", "");
    auto result = run_eval(cfg);
    CHECK(result.manifest.records == 0);
    CHECK(std::filesystem::exists(result.run_dir / "manifest.json"));
    CHECK(load_records(result.run_dir).empty());
}

TEST_CASE("missing records file raises ManifestError") {
    vtt::TempDir tmp;
    try {
        score_run(tmp.path);
        FAIL("expected ManifestError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ManifestError);
    }
}

TEST_CASE("error labels fold into the scored report") {
    vtt::TempDir tmp;
    auto result = run_eval(fixture_config(tmp.path));
    auto labels = tmp.file("labels.jsonl",
                           R"({"instance_id": "mme_g1_q2", "category": "inadequate_visual_grounding"})"
                           "\n"
                           R"({"instance_id": "mmb_loc_2", "category": "faulty_logical_reasoning"})"
                           "\n"
                           R"({"instance_id": "mme_g1_q1", "category": "other"})"
                           "\n");
    auto report = score_run(result.run_dir, std::nullopt, labels);
    // mme_g1_q1 was answered correctly; its label must be ignored
    CHECK(report.labeled_errors == 2);
    CHECK(report.error_distribution.at("inadequate_visual_grounding") == doctest::Approx(50.0));
    CHECK(report.error_distribution.at("faulty_logical_reasoning") == doctest::Approx(50.0));
}

TEST_CASE("ablation with empty axes is a single base run") {
    vtt::TempDir tmp;
    auto result = run_ablation(fixture_config(tmp.path), {});
    CHECK(result.cells.size() == 1);
    CHECK(std::filesystem::exists(result.report_path));
}

TEST_CASE("ablation cells share stage caches") {
    vtt::TempDir tmp;
    AblationAxes axes;
    axes.strategies = {"tprompt"};  // only strategy covered by the fixture cassettes
    axes.styles = {"type_a", "type_b"};
    auto base = fixture_config(tmp.path);

    // style type_b needs masks; grounded boxes carry none, so those cells
    // fail per-instance but must not poison the grid
    auto result = run_ablation(base, axes);
    CHECK(result.cells.size() == 2);

    // concepts were cached by the first cell; the second cell reuses them
    CHECK(result.cells[1].manifest.stages.at("concepts").misses == 0);
    CHECK(result.cells[1].manifest.stages.at("concepts").hits == 5);
}
