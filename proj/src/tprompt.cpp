// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/tprompt.hpp"

#include <algorithm>
#include <cctype>

#include "vtprompt/util.hpp"

namespace vtp {

std::string_view prompt_strategy_name(PromptStrategy s) {
    switch (s) {
    case PromptStrategy::Plain: return "plain";
    case PromptStrategy::ZeroShotCoT: return "zs_cot";
    case PromptStrategy::LeastToMost: return "least_to_most";
    case PromptStrategy::TPrompt: return "tprompt";
    }
    return "plain";
}

PromptStrategy prompt_strategy_from_name(std::string_view name) {
    if (name == "plain") return PromptStrategy::Plain;
    if (name == "zs_cot" || name == "zero_shot_cot") return PromptStrategy::ZeroShotCoT;
    if (name == "least_to_most") return PromptStrategy::LeastToMost;
    if (name == "tprompt") return PromptStrategy::TPrompt;
    fail(Errc::ConfigInvalid, "unknown prompt strategy '" + std::string(name) + "'");
}

namespace {

std::string options_block(const Options& options) {
    std::string out;
    if (options.empty()) return out;
    out += "Options:\n";
    for (const auto& [letter, text] : options) out += letter + ". " + text + "\n";
    return out;
}

std::string format_instruction(const Options& options) {
    if (options.empty()) return "Answer with exactly \"yes\" or \"no\".\n";
    return "Answer with the letter of the correct option.\n";
}

} // namespace

AnswerPrompt build_answer_prompt(const std::string& question, const Options& options,
                                 PromptStrategy strategy) {
    if (question.empty()) fail(Errc::EmptyQuestion, "cannot build an answer prompt");

    std::string text;
    switch (strategy) {
    case PromptStrategy::Plain:
        text += "Question: " + question + "\n";
        text += options_block(options);
        text += format_instruction(options);
        break;
    case PromptStrategy::ZeroShotCoT:
        text += "Question: " + question + "\n";
        text += options_block(options);
        text += "Let's think step by step, then conclude.\n";
        text += format_instruction(options);
        break;
    case PromptStrategy::LeastToMost:
        text += "Break the question below into simpler subquestions, answer each subquestion "
                "from the image, then combine those answers into the final answer.\n";
        text += "Question: " + question + "\n";
        text += options_block(options);
        text += format_instruction(options);
        break;
    case PromptStrategy::TPrompt:
        text += "The image contains visual markers (boxes, masks, or numbers) highlighting "
                "objects relevant to the question.\n";
        text += "Step 1. Note that the markers exist, but do not let their own attributes "
                "(color, thickness, numbering) distract you.\n";
        text += "Step 2. Perceive the overall scene first so no environmental cue is missed.\n";
        text += "Step 3. Inspect the fine-grained content inside each marker and confirm "
                "whether the marked objects are relevant to the question.\n";
        text += "Question: " + question + "\n";
        text += options_block(options);
        text += format_instruction(options);
        break;
    }
    return AnswerPrompt{std::move(text), strategy, kAnswerPromptVersion};
}

bool ParsedAnswer::is_yes() const {
    if (const auto* yn = std::get_if<YesNoAnswer>(&value)) return yn->value;
    return false;
}

const std::string* ParsedAnswer::option_letter() const {
    if (const auto* opt = std::get_if<OptionAnswer>(&value)) return &opt->letter;
    return nullptr;
}

std::string_view parse_path_name(ParsePath p) {
    switch (p) {
    case ParsePath::Exact: return "exact";
    case ParsePath::Pattern: return "pattern";
    case ParsePath::Fallback: return "fallback";
    }
    return "exact";
}

namespace {

std::vector<std::string> alpha_tokens(const std::string& raw) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : raw) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            cur.push_back(char(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

ParsedAnswer parse_yes_no(const std::string& raw) {
    auto tokens = alpha_tokens(raw);
    if (tokens.empty()) fail(Errc::UnparsableAnswer, raw);
    if (tokens.front() == "yes") return {YesNoAnswer{true}, raw, ParsePath::Exact};
    if (tokens.front() == "no") return {YesNoAnswer{false}, raw, ParsePath::Exact};
    for (const auto& t : tokens) {
        if (t == "yes") return {YesNoAnswer{true}, raw, ParsePath::Pattern};
        if (t == "no") return {YesNoAnswer{false}, raw, ParsePath::Pattern};
    }
    fail(Errc::UnparsableAnswer, raw);
}

bool is_option_letter(const Options& options, const std::string& letter) {
    return std::any_of(options.begin(), options.end(),
                       [&](const auto& o) { return o.first == letter; });
}

// Scan for an option letter written as "(B)", "B.", "B)", "B:" or a bare
// letter at end of line. A letter followed by a plain space never counts;
// that keeps the article "A" from reading as an answer. `leading_only`
// restricts the match to the first non-space position.
std::optional<std::string> find_letter(const std::string& raw, const Options& options,
                                       bool leading_only) {
    auto terminator = [](char c) {
        return c == '.' || c == ')' || c == ':' || c == ',' || c == ';' || c == '\n' || c == '\r';
    };
    for (size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (leading_only && std::isspace(static_cast<unsigned char>(c))) continue;

        bool open_paren = c == '(';
        size_t li = open_paren ? i + 1 : i;
        if (li < raw.size() && std::isalpha(static_cast<unsigned char>(raw[li]))) {
            std::string letter(1, char(std::toupper(static_cast<unsigned char>(raw[li]))));
            size_t after = li + 1;
            bool boundary_before =
                open_paren || li == 0 || !std::isalnum(static_cast<unsigned char>(raw[li - 1]));
            bool terminated;
            if (open_paren)
                terminated = after < raw.size() && raw[after] == ')';
            else
                terminated = after >= raw.size() || terminator(raw[after]);
            if (boundary_before && terminated && is_option_letter(options, letter)) return letter;
        }
        if (leading_only) return std::nullopt;
    }
    return std::nullopt;
}

ParsedAnswer parse_option(const std::string& raw, const Options& options) {
    if (auto letter = find_letter(raw, options, /*leading_only=*/true))
        return {OptionAnswer{*letter}, raw, ParsePath::Exact};
    if (auto letter = find_letter(raw, options, /*leading_only=*/false))
        return {OptionAnswer{*letter}, raw, ParsePath::Pattern};

    // unique option-text substring match
    std::string lowered = to_lower(raw);
    std::optional<std::string> match;
    for (const auto& [letter, text] : options) {
        std::string t = to_lower(trim(text));
        if (t.empty()) continue;
        if (lowered.find(t) != std::string::npos) {
            if (match) fail(Errc::UnparsableAnswer, raw);  // ambiguous
            match = letter;
        }
    }
    if (match) return {OptionAnswer{*match}, raw, ParsePath::Fallback};
    fail(Errc::UnparsableAnswer, raw);
}

} // namespace

ParsedAnswer parse_answer(const std::string& raw, const TaskKind& task, const Options& options) {
    if (task.is_yes_no()) return parse_yes_no(raw);
    if (options.empty()) return {FreeAnswer{trim(raw)}, raw, ParsePath::Fallback};
    return parse_option(raw, options);
}

} // namespace vtp
