// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/types.hpp"

#include <algorithm>

#include "vtprompt/util.hpp"

namespace vtp {

std::string_view bench_name(Bench b) {
    switch (b) {
    case Bench::Mme: return "mme";
    case Bench::Mmb: return "mmb";
    case Bench::Pope: return "pope";
    }
    return "mme";
}

Bench bench_from_name(std::string_view name) {
    if (name == "mme") return Bench::Mme;
    if (name == "mmb") return Bench::Mmb;
    if (name == "pope") return Bench::Pope;
    fail(Errc::ManifestError, "unknown bench '" + std::string(name) + "'");
}

std::string_view pope_setting_name(PopeSetting s) {
    switch (s) {
    case PopeSetting::Random: return "random";
    case PopeSetting::Popular: return "popular";
    case PopeSetting::Adversarial: return "adversarial";
    }
    return "random";
}

PopeSetting pope_setting_from_name(std::string_view name) {
    if (name == "random") return PopeSetting::Random;
    if (name == "popular") return PopeSetting::Popular;
    if (name == "adversarial") return PopeSetting::Adversarial;
    fail(Errc::ManifestError, "unknown POPE setting '" + std::string(name) + "'");
}

const std::vector<std::string>& mme_subtask_names() {
    static const std::vector<std::string> names = {
        "existence", "counting", "position", "color", "posters",
        "celebrity", "scene", "landmark", "artwork", "ocr",
        "commonsense_reasoning", "numerical_calculation", "text_translation", "code_reasoning"};
    return names;
}

namespace {

std::string canonical_task_name(std::string_view raw) {
    std::string n = normalize_token(raw);
    std::replace(n.begin(), n.end(), ' ', '_');
    if (n == "count") n = "counting";  // common alias in manifests
    return n;
}

} // namespace

TaskKind TaskKind::mme(std::string subtask) {
    TaskKind t;
    t.bench = Bench::Mme;
    t.name = canonical_task_name(subtask);
    const auto& known = mme_subtask_names();
    if (std::find(known.begin(), known.end(), t.name) == known.end())
        fail(Errc::ManifestError, "unknown MME subtask '" + t.name + "'");
    return t;
}

TaskKind TaskKind::mmb(std::string ability) {
    TaskKind t;
    t.bench = Bench::Mmb;
    t.name = canonical_task_name(ability);
    if (t.name.empty()) fail(Errc::ManifestError, "empty MMB ability name");
    return t;
}

TaskKind TaskKind::pope(PopeSetting setting) {
    TaskKind t;
    t.bench = Bench::Pope;
    t.setting = setting;
    return t;
}

std::string TaskKind::key() const {
    if (bench == Bench::Pope) return std::string(pope_setting_name(setting));
    return name;
}

bool is_object_oriented(const TaskKind& task) {
    if (task.bench == Bench::Mme) {
        return task.name == "counting" || task.name == "existence" ||
               task.name == "color" || task.name == "position";
    }
    if (task.bench == Bench::Mmb) {
        return task.name == "object_localization" || task.name == "spatial_relationship" ||
               task.name == "attribute_comparison";
    }
    return true;  // every POPE query probes object presence
}

} // namespace vtp
