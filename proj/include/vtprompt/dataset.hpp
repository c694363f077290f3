// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>

#include "vtprompt/types.hpp"

namespace vtp {

/// Load a JSONL manifest. One record per line:
///   {"id", "image_path", "question", "options": [["A","..."],...],
///    "ground_truth", "task": {"bench", "name"|"setting"}, "image_group_id"}
/// Relative image paths resolve against the manifest's directory. Validation
/// failures abort the load and cite the offending line or id.
Dataset load_manifest(const std::filesystem::path& path);

/// Parse one manifest record; line_no appears in error messages only.
VQAInstance parse_manifest_line(const std::string& line, size_t line_no,
                                const std::filesystem::path& base_dir,
                                bool check_image_paths = true);

/// Deterministic subsample of exactly n instances. MME instances are drawn
/// at image-group granularity so question pairs never split; selected
/// instances keep their manifest order.
Dataset sample_instances(const Dataset& dataset, size_t n, uint64_t seed);

/// image_id -> present object names, from a JSONL annotation file of
/// {"image_id", "objects": ["cat", ...]} records.
using AnnotationMap = std::map<std::string, std::set<std::string>>;

AnnotationMap load_annotations(const std::filesystem::path& path);

} // namespace vtp
