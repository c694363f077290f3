// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "vtprompt/rng.hpp"
#include "vtprompt/util.hpp"

namespace vtp {

namespace {

using nlohmann::json;

const json& require_field(const json& rec, const char* key, size_t line_no) {
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null())
        fail(Errc::MissingField, std::string("manifest line ") + std::to_string(line_no) +
                                     " missing \"" + key + "\"");
    return *it;
}

std::string require_string(const json& rec, const char* key, size_t line_no) {
    const json& v = require_field(rec, key, line_no);
    if (!v.is_string())
        fail(Errc::MissingField, std::string("manifest line ") + std::to_string(line_no) +
                                     " field \"" + key + "\" is not a string");
    return v.get<std::string>();
}

TaskKind parse_task(const json& rec, size_t line_no) {
    const json& t = require_field(rec, "task", line_no);
    if (!t.is_object())
        fail(Errc::MissingField,
             "manifest line " + std::to_string(line_no) + " field \"task\" is not an object");
    std::string bench = require_string(t, "bench", line_no);
    Bench b = bench_from_name(to_lower(bench));
    switch (b) {
    case Bench::Mme: return TaskKind::mme(require_string(t, "name", line_no));
    case Bench::Mmb: return TaskKind::mmb(require_string(t, "name", line_no));
    case Bench::Pope:
        return TaskKind::pope(pope_setting_from_name(to_lower(require_string(t, "setting", line_no))));
    }
    fail(Errc::ManifestError, "unreachable bench");
}

} // namespace

VQAInstance parse_manifest_line(const std::string& line, size_t line_no,
                                const std::filesystem::path& base_dir,
                                bool check_image_paths) {
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::exception& e) {
        fail(Errc::ManifestError,
             "manifest line " + std::to_string(line_no) + " is not valid JSON: " + e.what());
    }
    if (!rec.is_object())
        fail(Errc::ManifestError, "manifest line " + std::to_string(line_no) + " is not an object");

    VQAInstance inst;
    inst.id = require_string(rec, "id", line_no);
    inst.image_path = require_string(rec, "image_path", line_no);
    inst.question = require_string(rec, "question", line_no);
    inst.ground_truth = require_string(rec, "ground_truth", line_no);
    inst.task = parse_task(rec, line_no);

    if (auto it = rec.find("options"); it != rec.end() && !it->is_null()) {
        if (!it->is_array())
            fail(Errc::MissingField,
                 "manifest line " + std::to_string(line_no) + " \"options\" is not an array");
        for (const auto& opt : *it) {
            if (!opt.is_array() || opt.size() != 2 || !opt[0].is_string() || !opt[1].is_string())
                fail(Errc::MissingField, "manifest line " + std::to_string(line_no) +
                                             " options entries must be [letter, text] pairs");
            inst.options.emplace_back(opt[0].get<std::string>(), opt[1].get<std::string>());
        }
    }

    if (auto it = rec.find("image_group_id"); it != rec.end() && it->is_string())
        inst.image_group_id = it->get<std::string>();
    else if (inst.task.bench == Bench::Mme)
        fail(Errc::MissingField,
             "manifest line " + std::to_string(line_no) + " missing \"image_group_id\"");
    else
        inst.image_group_id = inst.id;

    // per-instance invariants
    if (inst.id.empty())
        fail(Errc::MissingField, "manifest line " + std::to_string(line_no) + " has empty id");
    if (inst.ground_truth.empty())
        fail(Errc::MissingField,
             "manifest line " + std::to_string(line_no) + " has empty ground_truth");
    if (inst.task.is_yes_no()) {
        inst.ground_truth = to_lower(trim(inst.ground_truth));
        if (inst.ground_truth != "yes" && inst.ground_truth != "no")
            fail(Errc::ManifestError, "instance " + inst.id + " ground_truth must be yes/no");
    } else {
        if (inst.options.empty())
            fail(Errc::ManifestError, "instance " + inst.id + " has no options");
        if (!inst.has_option_letter(inst.ground_truth))
            fail(Errc::ManifestError,
                 "instance " + inst.id + " ground_truth '" + inst.ground_truth +
                     "' is not an option letter");
    }

    std::filesystem::path img(inst.image_path);
    if (img.is_relative()) img = base_dir / img;
    inst.image_path = img.string();
    if (check_image_paths && !std::filesystem::exists(img))
        fail(Errc::UnreadableImagePath, "instance " + inst.id + ": " + inst.image_path);

    return inst;
}

Dataset load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::ManifestError, "cannot open manifest " + path.string());
    const auto base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    Dataset dataset;
    std::set<std::string> seen_ids;
    std::map<std::string, size_t> mme_group_sizes;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        VQAInstance inst = parse_manifest_line(line, line_no, base_dir);
        if (!seen_ids.insert(inst.id).second)
            fail(Errc::DuplicateId, "instance id '" + inst.id + "' (line " +
                                        std::to_string(line_no) + ") appears twice");
        if (inst.task.bench == Bench::Mme) ++mme_group_sizes[inst.image_group_id];
        dataset.push_back(std::move(inst));
    }

    for (const auto& [group, count] : mme_group_sizes) {
        if (count != 2)
            fail(Errc::MalformedGroup, "MME image group '" + group + "' has " +
                                           std::to_string(count) + " instances, expected 2");
    }
    return dataset;
}

Dataset sample_instances(const Dataset& dataset, size_t n, uint64_t seed) {
    if (n > dataset.size())
        fail(Errc::NTooLarge, "requested " + std::to_string(n) + " of " +
                                  std::to_string(dataset.size()) + " instances");
    if (n == dataset.size()) return dataset;

    // Sampling units: MME image groups stay whole, everything else is a
    // singleton. Units are keyed by first appearance to stay order-stable.
    std::vector<std::vector<size_t>> units;
    std::map<std::string, size_t> mme_unit_of_group;
    for (size_t i = 0; i < dataset.size(); ++i) {
        const auto& inst = dataset[i];
        if (inst.task.bench == Bench::Mme) {
            auto [it, fresh] = mme_unit_of_group.try_emplace(inst.image_group_id, units.size());
            if (fresh) units.emplace_back();
            units[it->second].push_back(i);
        } else {
            units.push_back({i});
        }
    }

    SplitMix64 rng(seed);
    std::vector<size_t> order(units.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    deterministic_shuffle(order, rng);

    std::vector<size_t> chosen;
    size_t remaining = n;
    for (size_t u : order) {
        if (remaining == 0) break;
        if (units[u].size() <= remaining) {
            chosen.insert(chosen.end(), units[u].begin(), units[u].end());
            remaining -= units[u].size();
        }
    }
    if (remaining != 0)
        fail(Errc::NTooLarge,
             "cannot select exactly " + std::to_string(n) +
                 " instances without splitting an MME image group");

    std::sort(chosen.begin(), chosen.end());
    Dataset out;
    out.reserve(chosen.size());
    for (size_t i : chosen) out.push_back(dataset[i]);
    return out;
}

AnnotationMap load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::ManifestError, "cannot open annotations " + path.string());
    AnnotationMap out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(Errc::ManifestError,
                 "annotations line " + std::to_string(line_no) + " is not valid JSON: " + e.what());
        }
        std::string image_id = require_string(rec, "image_id", line_no);
        const auto& objs = require_field(rec, "objects", line_no);
        if (!objs.is_array())
            fail(Errc::MissingField,
                 "annotations line " + std::to_string(line_no) + " \"objects\" is not an array");
        auto& target = out[image_id];
        for (const auto& o : objs) {
            if (!o.is_string())
                fail(Errc::MissingField, "annotations line " + std::to_string(line_no) +
                                             " object names must be strings");
            std::string name = normalize_token(o.get<std::string>());
            if (!name.empty()) target.insert(name);
        }
    }
    return out;
}

} // namespace vtp
