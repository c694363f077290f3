// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vtprompt/error.hpp"

namespace vtp {

enum class Bench { Mme, Mmb, Pope };

enum class PopeSetting { Random, Popular, Adversarial };

std::string_view bench_name(Bench b);
Bench bench_from_name(std::string_view name);
std::string_view pope_setting_name(PopeSetting s);
PopeSetting pope_setting_from_name(std::string_view name);

/// Benchmark slot an instance belongs to: an MME subtask, an MMB ability,
/// or a POPE negative-sampling setting.
struct TaskKind {
    Bench bench = Bench::Mme;
    std::string name;                            // MME subtask or MMB ability
    PopeSetting setting = PopeSetting::Random;   // POPE only

    static TaskKind mme(std::string subtask);
    static TaskKind mmb(std::string ability);
    static TaskKind pope(PopeSetting setting);

    bool is_yes_no() const { return bench != Bench::Mmb; }
    std::string key() const;

    friend bool operator==(const TaskKind&, const TaskKind&) = default;
};

/// The 14 MME subtask names accepted in manifests.
const std::vector<std::string>& mme_subtask_names();

/// counting / existence / color / position for MME; localization,
/// spatial relationship, attribute comparison for MMB.
bool is_object_oriented(const TaskKind& task);

/// One image+question+ground-truth unit.
struct VQAInstance {
    std::string id;
    std::string image_path;
    std::string question;
    std::vector<std::pair<std::string, std::string>> options;  // (letter, text)
    std::string ground_truth;
    TaskKind task;
    std::string image_group_id;

    bool has_option_letter(const std::string& letter) const {
        for (const auto& [l, _] : options)
            if (l == letter) return true;
        return false;
    }
};

using Dataset = std::vector<VQAInstance>;

} // namespace vtp
