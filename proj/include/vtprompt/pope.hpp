// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vtprompt/dataset.hpp"
#include "vtprompt/types.hpp"

namespace vtp {

/// Pairwise image co-occurrence statistics over an annotation set.
/// lookup(a,b) is symmetric; frequency(x) counts images containing x.
class CoOccurrenceTable {
public:
    void add_pair(const std::string& a, const std::string& b, uint64_t n = 1);
    void add_object(const std::string& name, uint64_t n = 1);

    uint64_t lookup(const std::string& a, const std::string& b) const;
    uint64_t frequency(const std::string& name) const;

    std::vector<std::string> universe() const;
    size_t pair_count() const { return counts_.size(); }

private:
    // key is the ordered (min,max) name pair
    std::map<std::pair<std::string, std::string>, uint64_t> counts_;
    std::map<std::string, uint64_t> frequency_;
};

CoOccurrenceTable build_cooccurrence(const AnnotationMap& annotations);

struct PopeQuery {
    std::string image_id;
    std::string object_name;
    bool label = false;  // object present in the image
    PopeSetting setting = PopeSetting::Random;
};

/// Canonical yes/no question wording for a POPE query.
std::string pope_question(const std::string& object_name);

struct PopeBuildOptions {
    size_t k_per_image = 3;
    // top share of the universe (by frequency) forming the popular pool
    double popular_pool_share = 0.25;
    size_t popular_pool_min = 3;
};

/// Build balanced present/absent polling queries for every annotated image.
/// Exactly k positives and k negatives per image. Negative choice per
/// setting: Random draws uniformly from absent objects, Popular from the
/// high-frequency pool, Adversarial takes the absent objects with the
/// largest summed co-occurrence against the present set. Deterministic for
/// a fixed seed; all ties break lexicographically.
std::vector<PopeQuery> build_pope_queries(const AnnotationMap& annotations,
                                          PopeSetting setting,
                                          const CoOccurrenceTable& stats,
                                          size_t k_per_image, uint64_t seed,
                                          const PopeBuildOptions& opts = {});

/// Materialize queries as dataset instances (image paths under images_root).
Dataset pope_queries_to_instances(const std::vector<PopeQuery>& queries,
                                  const std::string& images_root);

} // namespace vtp
