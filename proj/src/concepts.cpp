// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/concepts.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>
#include <regex>
#include <set>

#include <json.hpp>

#include "vtprompt/error.hpp"
#include "vtprompt/hash.hpp"
#include "vtprompt/util.hpp"

namespace vtp {

namespace {

constexpr size_t kMaxConcepts = 5;

std::vector<std::string> try_bracketed_list(const std::string& raw) {
    size_t open = raw.find('[');
    if (open == std::string::npos) return {};
    size_t close = raw.find(']', open);
    if (close == std::string::npos) return {};
    std::string body = raw.substr(open, close - open + 1);

    // well-formed JSON array of strings first
    try {
        auto j = nlohmann::json::parse(body);
        if (j.is_array()) {
            std::vector<std::string> items;
            for (const auto& v : j)
                if (v.is_string()) items.push_back(v.get<std::string>());
            if (!items.empty()) return items;
        }
    } catch (const nlohmann::json::exception&) {
        // fall through to the loose form
    }

    // loose form: strip brackets, split on commas, drop quotes
    std::string inner = body.substr(1, body.size() - 2);
    std::vector<std::string> items;
    size_t start = 0;
    while (start <= inner.size()) {
        size_t comma = inner.find(',', start);
        std::string piece =
            comma == std::string::npos ? inner.substr(start) : inner.substr(start, comma - start);
        piece = trim(piece);
        while (!piece.empty() && (piece.front() == '"' || piece.front() == '\'')) piece.erase(0, 1);
        while (!piece.empty() && (piece.back() == '"' || piece.back() == '\'')) piece.pop_back();
        if (!trim(piece).empty()) items.push_back(trim(piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

std::vector<std::string> try_numbered_lines(const std::string& raw) {
    static const std::regex line_re(R"(^\s*\d+[.)]\s*(.+?)\s*$)");
    std::vector<std::string> items;
    size_t start = 0;
    while (start < raw.size()) {
        size_t nl = raw.find('\n', start);
        std::string line = nl == std::string::npos ? raw.substr(start) : raw.substr(start, nl - start);
        std::smatch m;
        if (std::regex_match(line, m, line_re)) items.push_back(m[1].str());
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return items;
}

std::vector<std::string> try_comma_line(const std::string& raw) {
    // Accept a short "cat, dog, sofa" style line, optionally after an
    // "objects:" tag. Long prose with incidental commas does not qualify.
    size_t start = 0;
    std::vector<std::string> items;
    while (start < raw.size()) {
        size_t nl = raw.find('\n', start);
        std::string line = nl == std::string::npos ? raw.substr(start) : raw.substr(start, nl - start);
        std::string lowered = to_lower(line);
        if (size_t tag = lowered.find("objects:"); tag != std::string::npos)
            line = line.substr(tag + 8);
        line = trim(line);
        if (!line.empty() && line.find(',') != std::string::npos && line.size() <= 160) {
            size_t piece_start = 0;
            std::vector<std::string> pieces;
            bool plausible = true;
            while (piece_start <= line.size()) {
                size_t comma = line.find(',', piece_start);
                std::string piece = comma == std::string::npos
                                        ? line.substr(piece_start)
                                        : line.substr(piece_start, comma - piece_start);
                piece = trim(piece);
                if (piece.size() > 40) plausible = false;
                if (!piece.empty()) pieces.push_back(piece);
                if (comma == std::string::npos) break;
                piece_start = comma + 1;
            }
            if (plausible && pieces.size() >= 2) {
                items = std::move(pieces);
                break;
            }
        }
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return items;
}

ConceptMode detect_mode(const std::string& raw) {
    static const std::regex mode_re(R"(mode\s*[:=]\s*([a-zA-Z_-]+))", std::regex::icase);
    std::smatch m;
    if (std::regex_search(raw, m, mode_re)) {
        std::string v = to_lower(m[1].str());
        if (v.find("assoc") != std::string::npos || v.find("scene") != std::string::npos)
            return ConceptMode::SceneAssociative;
    }
    return ConceptMode::Direct;
}

} // namespace

ExtractionPrompt build_extraction_prompt(const std::string& question) {
    if (question.empty()) fail(Errc::EmptyQuestion, "cannot build an extraction prompt");
    std::string text;
    text += "You assist a visual question answering system. Identify the key objects that must "
            "be located in the image to answer the question below.\n";
    text += "If the question explicitly names the objects of interest, list those one or two "
            "objects directly and declare mode \"direct\".\n";
    text += "If the question is about the overall scene and names no specific object, suggest "
            "the 3-5 objects most relevant to that scene and declare mode \"associative\".\n";
    text += "Reply with exactly two lines and nothing else:\n";
    text += "objects: [\"object one\", \"object two\", ...]\n";
    text += "mode: direct|associative\n";
    text += "Use lowercase object names.\n";
    text += "Question: " + question + "\n";
    return ExtractionPrompt{std::move(text)};
}

// Object names are plain words headed for a detector; anything outside
// letters, digits, spaces, hyphens and apostrophes is noise from the
// response format and gets dropped.
std::string sanitize_concept(std::string_view item) {
    std::string filtered;
    filtered.reserve(item.size());
    for (char c : item) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == ' ' || c == '-' || c == '\'' || c == '_' || std::isspace(u))
            filtered.push_back(c);
    }
    return normalize_token(filtered);
}

ConceptSet parse_concepts(const std::string& raw) {
    std::vector<std::string> items = try_bracketed_list(raw);
    if (items.empty()) items = try_numbered_lines(raw);
    if (items.empty()) items = try_comma_line(raw);

    ConceptSet set;
    std::set<std::string> seen;
    for (const auto& item : items) {
        std::string norm = sanitize_concept(item);
        if (norm.empty()) continue;
        if (seen.insert(norm).second) set.concepts.push_back(std::move(norm));
    }
    if (set.concepts.empty()) fail(Errc::NoConceptsFound, "no object list in response");
    if (set.concepts.size() > kMaxConcepts) {
        set.concepts.resize(kMaxConcepts);
        set.truncated = true;
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
            std::cerr << "[vtprompt] warning: concept list truncated to " << kMaxConcepts
                      << " entries (reported once)\n";
    }
    set.mode = detect_mode(raw);
    return set;
}

std::string render_concepts(const ConceptSet& set) {
    nlohmann::json arr = set.concepts;
    std::string out = "objects: " + arr.dump() + "\n";
    out += "mode: ";
    out += set.mode == ConceptMode::SceneAssociative ? "associative" : "direct";
    out += "\n";
    return out;
}

std::string concept_cache_key(const std::string& question) {
    return sha256_hex(question + kExtractionPromptVersion);
}

ConceptExtractor::ConceptExtractor(const ChatClient* client, std::string model_id,
                                   std::filesystem::path cache_dir)
    : client_(client), model_id_(std::move(model_id)), cache_dir_(std::move(cache_dir)) {}

ConceptSet ConceptExtractor::extract(const std::string& question) const {
    const auto cache_path = cache_dir_ / "concepts" / (concept_cache_key(question) + ".json");
    if (std::filesystem::exists(cache_path)) {
        try {
            auto j = nlohmann::json::parse(read_file(cache_path));
            if (j.at("prompt_version").get<std::string>() == kExtractionPromptVersion &&
                j.at("question").get<std::string>() == question) {
                ConceptSet set;
                set.concepts = j.at("concepts").get<std::vector<std::string>>();
                set.mode = j.at("mode").get<std::string>() == "associative"
                               ? ConceptMode::SceneAssociative
                               : ConceptMode::Direct;
                cache_hits_.fetch_add(1);
                return set;
            }
        } catch (const std::exception&) {
            // unreadable entry: recompute below
        }
    }
    cache_misses_.fetch_add(1);

    ChatRequest req;
    req.prompt = build_extraction_prompt(question).text;
    req.model_id = model_id_;
    ConceptSet set = parse_concepts(client_->query_text(req));

    nlohmann::json j{{"question", question},
                     {"prompt_version", kExtractionPromptVersion},
                     {"concepts", set.concepts},
                     {"mode", set.mode == ConceptMode::SceneAssociative ? "associative" : "direct"}};
    write_file_atomic(cache_path, j.dump(2));
    return set;
}

} // namespace vtp
