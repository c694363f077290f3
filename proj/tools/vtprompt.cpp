// SPDX-License-Identifier: Apache-2.0
//
// vtprompt: offline-friendly VQA evaluation harness with visual-marker
// prompting, cassette record/replay and benchmark scoring.

#include <iostream>

#include <CLI11.hpp>

#include "vtprompt/dataset.hpp"
#include "vtprompt/pipeline.hpp"
#include "vtprompt/pope.hpp"
#include "vtprompt/util.hpp"

namespace {

struct RunArgs {
    std::string config_path;
    int64_t sample_n = -1;
    int64_t sample_seed = 0;
    bool replay = false;
    bool record = false;
    std::string out_dir, cache_dir, cassette_dir, run_id;
};

vtp::RunConfig make_config(const RunArgs& args) {
    vtp::RunConfig cfg = vtp::load_run_config(args.config_path);
    if (args.sample_n >= 0)
        cfg.sample = vtp::SampleSpec{size_t(args.sample_n), uint64_t(args.sample_seed)};
    if (args.replay) cfg.cassette_mode = vtp::CassetteMode::Replay;
    if (args.record) cfg.cassette_mode = vtp::CassetteMode::Record;
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (!args.cache_dir.empty()) cfg.cache_dir = args.cache_dir;
    if (!args.cassette_dir.empty()) cfg.cassette_dir = args.cassette_dir;
    if (!args.run_id.empty()) cfg.run_id = args.run_id;
    return cfg;
}

void add_common_run_options(CLI::App* cmd, RunArgs& args) {
    cmd->add_option("--config", args.config_path, "run config file")->required();
    cmd->add_option("--sample", args.sample_n, "sample this many instances");
    cmd->add_option("--seed", args.sample_seed, "sampling seed");
    auto* replay = cmd->add_flag("--replay", args.replay, "serve every backend from cassettes");
    cmd->add_flag("--record", args.record, "record backend responses to cassettes")
        ->excludes(replay);
    cmd->add_option("--out", args.out_dir, "output directory override");
    cmd->add_option("--cache-dir", args.cache_dir, "cache directory override");
    cmd->add_option("--cassette-dir", args.cassette_dir, "cassette directory override");
    cmd->add_option("--run-id", args.run_id, "run id override");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"VQA evaluation harness with visual and text prompting"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "execute an evaluation run");
    add_common_run_options(run_cmd, run_args);

    RunArgs ablate_args;
    std::vector<std::string> strategies, styles, detectors;
    auto* ablate_cmd = app.add_subcommand("ablate", "run a strategy/style/detector grid");
    add_common_run_options(ablate_cmd, ablate_args);
    ablate_cmd->add_option("--strategies", strategies, "prompt strategies to sweep")
        ->delimiter(',');
    ablate_cmd->add_option("--styles", styles, "visual prompt styles to sweep")->delimiter(',');
    ablate_cmd->add_option("--detectors", detectors, "detector kinds to sweep")->delimiter(',');

    std::string score_run_dir, score_baseline, score_labels;
    auto* score_cmd = app.add_subcommand("score", "score a finished run");
    score_cmd->add_option("--run", score_run_dir, "run directory")->required();
    score_cmd->add_option("--baseline", score_baseline, "baseline run directory for deltas");
    score_cmd->add_option("--labels", score_labels, "error-category labels (jsonl)");

    std::vector<std::string> report_runs;
    std::string report_csv;
    auto* report_cmd = app.add_subcommand("report", "summarize several runs");
    report_cmd->add_option("--runs", report_runs, "run directories")->required();
    report_cmd->add_option("--csv", report_csv, "also write the summary as CSV");

    std::string pope_annotations, pope_setting = "random", pope_out, pope_images_root = "images";
    int64_t pope_k = 3, pope_seed = 0;
    auto* pope_cmd = app.add_subcommand("make-pope", "build POPE polling queries");
    pope_cmd->add_option("--annotations", pope_annotations, "annotation jsonl")->required();
    pope_cmd->add_option("--setting", pope_setting, "random|popular|adversarial");
    pope_cmd->add_option("-k,--per-image", pope_k, "positive/negative pairs per image");
    pope_cmd->add_option("--seed", pope_seed, "sampling seed");
    pope_cmd->add_option("--images-root", pope_images_root, "image directory for manifest paths");
    pope_cmd->add_option("--out", pope_out, "output manifest path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            auto result = vtp::run_eval(make_config(run_args));
            std::cout << "run " << result.manifest.run_id << ": " << result.manifest.records
                      << " records in " << result.run_dir.string() << " ("
                      << result.manifest.network_calls << " network calls, "
                      << result.manifest.wall_ms << " ms)\n";
        } else if (*ablate_cmd) {
            vtp::AblationAxes axes{strategies, styles, detectors};
            auto result = vtp::run_ablation(make_config(ablate_args), axes);
            std::cout << "ablation: " << result.cells.size() << " runs, report at "
                      << result.report_path.string() << "\n";
        } else if (*score_cmd) {
            std::optional<std::filesystem::path> baseline, labels;
            if (!score_baseline.empty()) baseline = score_baseline;
            if (!score_labels.empty()) labels = score_labels;
            auto report = vtp::score_run(score_run_dir, baseline, labels);
            std::cout << vtp::render_markdown_report(
                report, baseline ? std::optional(vtp::score_run(*baseline)) : std::nullopt);
        } else if (*report_cmd) {
            std::string csv = "run,key,value\n";
            std::cout << "| Run | Metric | Value |\n|---|---|---|\n";
            for (const auto& dir : report_runs) {
                auto report = vtp::score_run(dir);
                for (const auto& [key, value] : report.flat()) {
                    std::cout << "| " << dir << " | " << key << " | "
                              << vtp::format_metric(key, value) << " |\n";
                    csv += dir + "," + key + "," + vtp::format_metric(key, value) + "\n";
                }
            }
            if (!report_csv.empty()) vtp::write_file_atomic(report_csv, csv);
        } else if (*pope_cmd) {
            auto annotations = vtp::load_annotations(pope_annotations);
            auto stats = vtp::build_cooccurrence(annotations);
            auto queries = vtp::build_pope_queries(
                annotations, vtp::pope_setting_from_name(pope_setting), stats, size_t(pope_k),
                uint64_t(pope_seed));
            auto instances = vtp::pope_queries_to_instances(queries, pope_images_root);
            std::string out;
            for (const auto& inst : instances) {
                nlohmann::json j{{"id", inst.id},
                                 {"image_path", inst.image_path},
                                 {"question", inst.question},
                                 {"options", nlohmann::json::array()},
                                 {"ground_truth", inst.ground_truth},
                                 {"task",
                                  {{"bench", "pope"},
                                   {"setting", std::string(vtp::pope_setting_name(
                                                   inst.task.setting))}}},
                                 {"image_group_id", inst.image_group_id}};
                out += j.dump() + "\n";
            }
            vtp::write_file_atomic(pope_out, out);
            std::cout << "wrote " << instances.size() << " queries to " << pope_out << "\n";
        }
    } catch (const vtp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
