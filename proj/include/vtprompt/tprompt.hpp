// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "vtprompt/types.hpp"

namespace vtp {

inline constexpr const char* kAnswerPromptVersion = "pt-v1";

enum class PromptStrategy { Plain, ZeroShotCoT, LeastToMost, TPrompt };

std::string_view prompt_strategy_name(PromptStrategy s);
PromptStrategy prompt_strategy_from_name(std::string_view name);

struct AnswerPrompt {
    std::string text;
    PromptStrategy strategy = PromptStrategy::Plain;
    std::string prompt_version = kAnswerPromptVersion;
};

using Options = std::vector<std::pair<std::string, std::string>>;

/// Build the answer-time prompt for a question. Plain is question plus a
/// format instruction; ZeroShotCoT adds a step-by-step trigger;
/// LeastToMost asks for subquestion decomposition first; TPrompt leads
/// with the three marker-guidance steps (marker awareness, whole-scene
/// perception, fine-grained marker inspection) in fixed order.
AnswerPrompt build_answer_prompt(const std::string& question, const Options& options,
                                 PromptStrategy strategy);

enum class ParsePath { Exact, Pattern, Fallback };

struct YesNoAnswer {
    bool value = false;
    friend bool operator==(const YesNoAnswer&, const YesNoAnswer&) = default;
};
struct OptionAnswer {
    std::string letter;
    friend bool operator==(const OptionAnswer&, const OptionAnswer&) = default;
};
struct FreeAnswer {
    std::string text;
    friend bool operator==(const FreeAnswer&, const FreeAnswer&) = default;
};

struct ParsedAnswer {
    std::variant<YesNoAnswer, OptionAnswer, FreeAnswer> value;
    std::string raw;
    ParsePath parse_path = ParsePath::Exact;

    bool is_yes() const;
    const std::string* option_letter() const;
};

/// Total over all input strings: returns a ParsedAnswer or raises
/// UnparsableAnswer, never anything else. Yes/no tasks take the leading
/// yes/no token, falling back to the first standalone one; option tasks
/// take a leading letter, then a letter pattern anywhere, then a unique
/// option-text substring.
ParsedAnswer parse_answer(const std::string& raw, const TaskKind& task, const Options& options);

std::string_view parse_path_name(ParsePath p);

} // namespace vtp
