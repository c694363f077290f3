// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vtprompt/chat_client.hpp"

namespace vtp {

/// Version tag for the extraction prompt wording. Participates in cache
/// keys so cached concept sets never outlive a wording change.
inline constexpr const char* kExtractionPromptVersion = "pe-v1";

enum class ConceptMode { Direct, SceneAssociative };

/// Key objects pulled out of a question. Entries are lowercase, trimmed,
/// deduplicated and capped at five.
struct ConceptSet {
    std::vector<std::string> concepts;
    ConceptMode mode = ConceptMode::Direct;
    bool truncated = false;  // set when a response listed more than five

    friend bool operator==(const ConceptSet& a, const ConceptSet& b) {
        return a.concepts == b.concepts && a.mode == b.mode;
    }
};

struct ExtractionPrompt {
    std::string text;
};

ExtractionPrompt build_extraction_prompt(const std::string& question);

/// Pull the object list out of a raw model response. Primary form is the
/// requested bracketed list; numbered and comma-separated lines are
/// accepted as fallbacks. Raises NoConceptsFound when nothing survives
/// normalization.
ConceptSet parse_concepts(const std::string& raw);

/// Canonical two-line rendering; parse_concepts(render_concepts(c)) == c.
std::string render_concepts(const ConceptSet& set);

std::string concept_cache_key(const std::string& question);

/// Extraction pipeline: prompt -> text LLM -> parse, with a disk cache at
/// {cache_dir}/concepts/{sha256(question + prompt_version)}.json.
class ConceptExtractor {
public:
    ConceptExtractor(const ChatClient* client, std::string model_id,
                     std::filesystem::path cache_dir);

    ConceptSet extract(const std::string& question) const;

    uint64_t cache_hits() const { return cache_hits_; }
    uint64_t cache_misses() const { return cache_misses_; }

private:
    const ChatClient* client_;
    std::string model_id_;
    std::filesystem::path cache_dir_;
    mutable std::atomic<uint64_t> cache_hits_{0};
    mutable std::atomic<uint64_t> cache_misses_{0};
};

} // namespace vtp
