// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "vtprompt/concepts.hpp"
#include "vtprompt/dataset.hpp"
#include "vtprompt/detector_client.hpp"
#include "vtprompt/hash.hpp"
#include "vtprompt/render.hpp"
#include "vtprompt/util.hpp"

namespace vtp {

nlohmann::json RunManifest::to_json() const {
    nlohmann::json stages_j;
    for (const auto& [name, s] : stages)
        stages_j[name] = {{"hits", s.hits}, {"misses", s.misses}};
    return nlohmann::json{{"run_id", run_id},
                          {"config_hash", config_hash},
                          {"tool_version", tool_version},
                          {"wall_ms", wall_ms},
                          {"records", records},
                          {"network_calls", network_calls},
                          {"stages", std::move(stages_j)}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.tool_version = j.value("tool_version", std::string());
    m.wall_ms = j.value("wall_ms", uint64_t(0));
    m.records = j.value("records", uint64_t(0));
    m.network_calls = j.value("network_calls", uint64_t(0));
    if (auto it = j.find("stages"); it != j.end() && it->is_object()) {
        for (auto& [name, s] : it->items())
            m.stages[name] = StageStats{s.value("hits", uint64_t(0)), s.value("misses", uint64_t(0))};
    }
    return m;
}

namespace {

std::string env_or_empty(const std::string& name) {
    if (name.empty()) return {};
    const char* v = std::getenv(name.c_str());
    return v ? v : "";
}

std::optional<ChatEndpoint> chat_endpoint(const BackendConfig& b) {
    if (!b.has_endpoint()) return std::nullopt;
    ChatEndpoint e;
    e.host = b.host;
    e.port = b.port;
    if (!b.path.empty()) e.path = b.path;
    e.api_key = env_or_empty(b.api_key_env);
    return e;
}

std::optional<DetectorEndpoint> detector_endpoint(const BackendConfig& b) {
    if (!b.has_endpoint()) return std::nullopt;
    DetectorEndpoint e;
    e.host = b.host;
    e.port = b.port;
    if (!b.path.empty()) e.path = b.path;
    return e;
}

/// Everything one run needs, wired from the config.
struct RunContext {
    const RunConfig& cfg;
    std::filesystem::path run_dir;
    std::string config_hash;

    ChatClient text_client;
    ChatClient vision_client;
    DetectorClient detector;
    ConceptExtractor extractor;
    VPromptStyle style;
    RenderConfig render_cfg;
    PromptStrategy strategy;
    DetectorBackend detector_kind;

    std::atomic<uint64_t> render_hits{0};
    std::atomic<uint64_t> render_misses{0};

    RunContext(const RunConfig& cfg, std::shared_ptr<ConcurrencyLimiter> limiter)
        : cfg(cfg),
          run_dir(cfg.output_dir / cfg.effective_run_id()),
          config_hash(cfg.config_hash()),
          text_client(cfg.text_backend.id, cfg.cassette_mode,
                      CassetteStore(cfg.cassette_dir, cfg.text_backend.id),
                      chat_endpoint(cfg.text_backend), RetryPolicy{}, limiter),
          vision_client(cfg.vision_backend.id, cfg.cassette_mode,
                        CassetteStore(cfg.cassette_dir, cfg.vision_backend.id),
                        chat_endpoint(cfg.vision_backend), RetryPolicy{}, limiter),
          detector(cfg.detector_backend.id,
                   cfg.detector_backend.version.empty() ? "v1" : cfg.detector_backend.version,
                   cfg.cassette_mode, CassetteStore(cfg.cassette_dir, cfg.detector_backend.id),
                   detector_endpoint(cfg.detector_backend), RetryPolicy{}, DetectorLimits{},
                   limiter),
          extractor(&text_client, cfg.text_backend.model_id, cfg.cache_dir),
          style(cfg.baseline ? VPromptStyle::type_b() : VPromptStyle::from_name(cfg.style)),
          render_cfg(RenderConfig::defaults()),
          strategy(prompt_strategy_from_name(cfg.strategy)),
          detector_kind(detector_backend_from_name(cfg.detector_kind)) {}
};

DetectionSet run_detector(RunContext& ctx, const Image& image, const std::string& image_id,
                          const ConceptSet& concepts) {
    switch (ctx.detector_kind) {
    case DetectorBackend::GroundingBox: return ctx.detector.detect_grounded(image, image_id, concepts);
    case DetectorBackend::SegmentEverything: return ctx.detector.segment_everything(image, image_id);
    case DetectorBackend::ConditionalSegment:
        return ctx.detector.segment_conditional(image, image_id, concepts);
    }
    fail(Errc::ConfigInvalid, "unreachable detector kind");
}

/// Reuse a rendered marker image when its provenance sidecar matches the
/// current detections and render config; render and persist otherwise.
std::string file_safe(std::string name) {
    for (char& c : name)
        if (c == '/' || c == '\\') c = '_';
    return name;
}

Image rendered_image(RunContext& ctx, const Image& source, const DetectionSet& dets,
                     StageArtifacts& artifacts) {
    const auto annotated_dir = ctx.run_dir / "annotated";
    const std::string stem = file_safe(dets.image_id);
    const auto png_path = annotated_dir / (stem + ".png");
    const auto sidecar_path = annotated_dir / (stem + ".json");

    const std::string detections_hash = dets.content_hash();
    const std::string render_hash =
        sha256_hex(ctx.render_cfg.content_hash() + ctx.style.name + "|" + ctx.config_hash);

    if (std::filesystem::exists(png_path) && std::filesystem::exists(sidecar_path)) {
        try {
            auto sidecar = nlohmann::json::parse(read_file(sidecar_path));
            if (sidecar.value("detections_hash", std::string()) == detections_hash &&
                sidecar.value("render_hash", std::string()) == render_hash) {
                Image img = load_image(png_path);
                ctx.render_hits.fetch_add(1);
                artifacts.detections_hash = detections_hash;
                artifacts.annotated_image_hash = img.content_hash();
                return img;
            }
        } catch (const std::exception&) {
            // stale or unreadable sidecar: re-render below
        }
    }

    ctx.render_misses.fetch_add(1);
    AnnotatedImage annotated = render_vprompt(source, dets, ctx.style, ctx.render_cfg);
    save_image(png_path, annotated.pixels);
    nlohmann::json sidecar{{"image_id", dets.image_id},
                           {"style", ctx.style.name},
                           {"detections_hash", detections_hash},
                           {"render_hash", render_hash},
                           {"pixels_hash", annotated.pixels.content_hash()}};
    write_file_atomic(sidecar_path, sidecar.dump(2));
    artifacts.detections_hash = detections_hash;
    artifacts.annotated_image_hash = annotated.pixels.content_hash();
    return annotated.pixels;
}

RunRecord process_instance(RunContext& ctx, const VQAInstance& inst) {
    RunRecord rec;
    rec.instance_id = inst.id;
    rec.task = inst.task;
    rec.image_group_id = inst.image_group_id;
    rec.ground_truth = inst.ground_truth;
    rec.options = inst.options;

    try {
        ImagePayload payload;
        if (ctx.cfg.baseline) {
            payload.bytes = read_file_bytes(inst.image_path);
        } else {
            Image source = load_image(inst.image_path);
            ConceptSet concepts = ctx.extractor.extract(inst.question);
            rec.artifacts.concepts_hash = sha256_hex(render_concepts(concepts));
            DetectionSet dets = run_detector(ctx, source, inst.id, concepts);
            Image annotated = rendered_image(ctx, source, dets, rec.artifacts);
            payload.bytes = encode_png(annotated);
        }

        AnswerPrompt prompt = build_answer_prompt(inst.question, inst.options, ctx.strategy);
        rec.artifacts.prompt_hash = sha256_hex(prompt.text);

        ChatRequest req;
        req.image = std::move(payload);
        req.prompt = prompt.text;
        req.model_id = ctx.cfg.vision_backend.model_id;
        rec.raw_response = ctx.vision_client.query_vision(req);
        rec.artifacts.response_hash = sha256_hex(rec.raw_response);

        try {
            rec.parsed = parse_answer(rec.raw_response, inst.task, inst.options);
        } catch (const Error& e) {
            if (e.code() != Errc::UnparsableAnswer) throw;
            rec.parsed = std::nullopt;  // scored as incorrect
        }
        rec.correct = record_correct(rec);
    } catch (const std::exception& e) {
        rec.status = "failed";
        rec.error = e.what();
        rec.parsed = std::nullopt;
        rec.correct = false;
    }
    return rec;
}

// A hard kill can leave a half-written trailing line; drop it before
// resuming so appended records start on a clean line.
std::set<std::string> existing_record_ids(const std::filesystem::path& records_path) {
    std::set<std::string> ids;
    if (!std::filesystem::exists(records_path)) return ids;
    std::string content = read_file(records_path);
    if (!content.empty() && content.back() != '\n') {
        size_t cut = content.find_last_of('\n');
        content = cut == std::string::npos ? std::string() : content.substr(0, cut + 1);
        write_file_atomic(records_path, content);
    }
    size_t start = 0;
    while (start < content.size()) {
        size_t nl = content.find('\n', start);
        std::string line = content.substr(start, nl - start);
        start = nl + 1;
        if (trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            ids.insert(j.at("instance_id").get<std::string>());
        } catch (const std::exception&) {
            fail(Errc::ManifestError, "corrupt records file " + records_path.string());
        }
    }
    return ids;
}

} // namespace

RunResult run_eval(const RunConfig& config) {
    config.validate();
    const auto t0 = std::chrono::steady_clock::now();

    Dataset dataset = load_manifest(config.manifest);
    if (config.sample) dataset = sample_instances(dataset, config.sample->n, config.sample->seed);

    auto limiter = std::make_shared<ConcurrencyLimiter>(config.max_concurrency);
    RunContext ctx(config, limiter);
    std::filesystem::create_directories(ctx.run_dir / "annotated");

    const auto records_path = ctx.run_dir / "records.jsonl";
    const std::set<std::string> done = existing_record_ids(records_path);

    // workers fill slots, the writer appends them strictly in manifest order
    const size_t n = dataset.size();
    std::vector<std::optional<RunRecord>> slots(n);
    std::vector<bool> skip(n, false);
    for (size_t i = 0; i < n; ++i) skip[i] = done.contains(dataset[i].id);

    std::mutex mu;
    std::condition_variable cv;
    std::atomic<size_t> next{0};
    std::atomic<bool> stop{false};

    auto worker = [&] {
        while (!stop.load()) {
            size_t i = next.fetch_add(1);
            if (i >= n) break;
            if (skip[i]) {
                std::lock_guard lock(mu);
                slots[i].emplace();  // placeholder, never written
                cv.notify_all();
                continue;
            }
            RunRecord rec = process_instance(ctx, dataset[i]);
            {
                std::lock_guard lock(mu);
                slots[i] = std::move(rec);
            }
            cv.notify_all();
        }
        cv.notify_all();
    };

    int thread_count = std::max(1, std::min<int>(config.max_concurrency, int(n)));
    std::vector<std::thread> threads;
    threads.reserve(size_t(thread_count));
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);

    uint64_t written = done.size();
    bool aborted = false;
    {
        std::ofstream out(records_path, std::ios::app | std::ios::binary);
        if (!out) {
            stop.store(true);
            for (auto& t : threads) t.join();
            fail(Errc::IoError, "cannot open " + records_path.string());
        }
        for (size_t i = 0; i < n && !aborted; ++i) {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return slots[i].has_value(); });
            if (skip[i]) continue;
            out << slots[i]->to_json().dump() << "\n";
            out.flush();
            ++written;
            if (config.abort_after_records > 0 && written >= config.abort_after_records) {
                aborted = true;  // simulated crash: stop before the remaining records
            }
        }
    }
    stop.store(true);
    next.store(n);  // release any worker still picking up work
    for (auto& t : threads) t.join();
    if (aborted) throw AbortForTest{};

    RunManifest manifest;
    manifest.run_id = config.effective_run_id();
    manifest.config_hash = ctx.config_hash;
    manifest.records = written;
    manifest.network_calls = ctx.text_client.network_calls() + ctx.vision_client.network_calls() +
                             ctx.detector.network_calls();
    manifest.stages["concepts"] = {ctx.extractor.cache_hits(), ctx.extractor.cache_misses()};
    manifest.stages["detections"] = {ctx.detector.cassette_hits(), ctx.detector.network_calls()};
    manifest.stages["render"] = {ctx.render_hits.load(), ctx.render_misses.load()};
    manifest.stages["response"] = {
        ctx.text_client.cassette_hits() + ctx.vision_client.cassette_hits(),
        ctx.text_client.network_calls() + ctx.vision_client.network_calls()};
    manifest.wall_ms = uint64_t(std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count());
    write_file_atomic(ctx.run_dir / "manifest.json", manifest.to_json().dump(2));

    return RunResult{ctx.run_dir, std::move(manifest)};
}

AblationResult run_ablation(const RunConfig& base, const AblationAxes& axes) {
    auto strategies = axes.strategies.empty() ? std::vector<std::string>{base.strategy}
                                              : axes.strategies;
    auto styles = axes.styles.empty() ? std::vector<std::string>{base.style} : axes.styles;
    auto kinds = axes.detector_kinds.empty() ? std::vector<std::string>{base.detector_kind}
                                             : axes.detector_kinds;

    AblationResult result;
    struct Cell {
        std::string label;
        MetricsReport report;
    };
    std::vector<Cell> cells;

    for (const auto& strategy : strategies) {
        for (const auto& style : styles) {
            for (const auto& kind : kinds) {
                RunConfig cfg = base;
                cfg.strategy = strategy;
                cfg.style = style;
                cfg.detector_kind = kind;
                cfg.run_id.clear();  // per-cell id from the cell's config hash
                RunResult run = run_eval(cfg);
                MetricsReport report = score_run(run.run_dir);
                std::string label = strategy + "/" + style + "/" + kind;
                cells.push_back({std::move(label), std::move(report)});
                result.cells.push_back(std::move(run));
            }
        }
    }

    // grid report: one row per metric, one column per cell
    std::set<std::string> keys;
    for (const auto& c : cells)
        for (const auto& [k, _] : c.report.flat()) keys.insert(k);

    std::ostringstream md;
    md << "# Ablation report\n\n| Metric |";
    for (const auto& c : cells) md << " " << c.label << " |";
    md << "\n|---|";
    for (size_t i = 0; i < cells.size(); ++i) md << "---|";
    md << "\n";
    for (const auto& key : keys) {
        md << "| " << key << " |";
        for (const auto& c : cells) {
            auto flat = c.report.flat();
            auto it = flat.find(key);
            md << " " << (it == flat.end() ? std::string("-") : format_metric(key, it->second))
               << " |";
        }
        md << "\n";
    }

    result.report_path = base.output_dir / "ablation.md";
    write_file_atomic(result.report_path, md.str());
    return result;
}

std::vector<RunRecord> load_records(const std::filesystem::path& run_dir) {
    const auto records_path = run_dir / "records.jsonl";
    if (!std::filesystem::exists(records_path))
        fail(Errc::ManifestError, "no records file at " + records_path.string());
    std::ifstream in(records_path);
    if (!in) fail(Errc::ManifestError, "cannot open " + records_path.string());
    std::vector<RunRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            records.push_back(RunRecord::from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::ManifestError, "corrupt record line: " + std::string(e.what()));
        }
    }
    return records;
}

void apply_error_labels(std::vector<RunRecord>& records,
                        const std::filesystem::path& labels_path) {
    std::map<std::string, ErrorCategory> labels;
    std::ifstream in(labels_path);
    if (!in) fail(Errc::ManifestError, "cannot open labels " + labels_path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            labels[j.at("instance_id").get<std::string>()] =
                error_category_from_name(j.at("category").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::ManifestError, "corrupt label line: " + std::string(e.what()));
        }
    }
    for (auto& r : records) {
        auto it = labels.find(r.instance_id);
        if (it == labels.end()) continue;
        // labels apply to incorrect records only
        if (!record_correct(r)) r.error_category = it->second;
    }
}

MetricsReport score_run(const std::filesystem::path& run_dir,
                        const std::optional<std::filesystem::path>& baseline_dir,
                        const std::optional<std::filesystem::path>& labels_path) {
    auto records = load_records(run_dir);
    // correctness is re-derived, never trusted from disk
    for (auto& r : records) r.correct = record_correct(r);
    if (labels_path) apply_error_labels(records, *labels_path);

    MetricsReport report = score_records(records);
    std::optional<MetricsReport> baseline;
    if (baseline_dir) {
        auto base_records = load_records(*baseline_dir);
        for (auto& r : base_records) r.correct = record_correct(r);
        baseline = score_records(base_records);
    }

    write_file_atomic(run_dir / "report.md", render_markdown_report(report, baseline));
    write_file_atomic(run_dir / "report.csv", render_csv_report(report, baseline));
    return report;
}

} // namespace vtp
