// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/pope.hpp"

#include <algorithm>
#include <cmath>

#include "vtprompt/hash.hpp"
#include "vtprompt/rng.hpp"
#include "vtprompt/util.hpp"

namespace vtp {

void CoOccurrenceTable::add_pair(const std::string& a, const std::string& b, uint64_t n) {
    if (a == b) return;
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    counts_[key] += n;
}

void CoOccurrenceTable::add_object(const std::string& name, uint64_t n) {
    frequency_[name] += n;
}

uint64_t CoOccurrenceTable::lookup(const std::string& a, const std::string& b) const {
    if (a == b) return 0;
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
}

uint64_t CoOccurrenceTable::frequency(const std::string& name) const {
    auto it = frequency_.find(name);
    return it == frequency_.end() ? 0 : it->second;
}

std::vector<std::string> CoOccurrenceTable::universe() const {
    std::vector<std::string> names;
    names.reserve(frequency_.size());
    for (const auto& [name, _] : frequency_) names.push_back(name);
    return names;  // already sorted: map key order
}

CoOccurrenceTable build_cooccurrence(const AnnotationMap& annotations) {
    CoOccurrenceTable table;
    for (const auto& [image_id, objects] : annotations) {
        for (auto it = objects.begin(); it != objects.end(); ++it) {
            table.add_object(*it);
            for (auto jt = std::next(it); jt != objects.end(); ++jt) table.add_pair(*it, *jt);
        }
    }
    return table;
}

std::string pope_question(const std::string& object_name) {
    return "Is there a " + object_name + " in the image?";
}

namespace {

// Absent objects ranked by summed co-occurrence with the present set,
// descending, names ascending on ties.
std::vector<std::string> adversarial_ranking(const std::vector<std::string>& absent,
                                             const std::set<std::string>& present,
                                             const CoOccurrenceTable& stats) {
    std::vector<std::pair<uint64_t, std::string>> scored;
    scored.reserve(absent.size());
    for (const auto& cand : absent) {
        uint64_t sum = 0;
        for (const auto& p : present) sum += stats.lookup(cand, p);
        scored.emplace_back(sum, cand);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> out;
    out.reserve(scored.size());
    for (auto& [_, name] : scored) out.push_back(std::move(name));
    return out;
}

std::vector<std::string> pick_random(const std::vector<std::string>& pool, size_t k,
                                     SplitMix64& rng) {
    auto idx = sample_indices(pool.size(), k, rng);
    std::vector<std::string> out;
    out.reserve(k);
    for (size_t i : idx) out.push_back(pool[i]);
    return out;
}

} // namespace

std::vector<PopeQuery> build_pope_queries(const AnnotationMap& annotations, PopeSetting setting,
                                          const CoOccurrenceTable& stats, size_t k_per_image,
                                          uint64_t seed, const PopeBuildOptions& opts) {
    if (k_per_image == 0) fail(Errc::Precondition, "k_per_image must be positive");

    const std::vector<std::string> universe = stats.universe();
    for (const auto& [image_id, present] : annotations) {
        for (const auto& name : present)
            if (stats.frequency(name) == 0)
                fail(Errc::Precondition,
                     "object '" + name + "' of image " + image_id + " missing from statistics");
        if (present.size() < k_per_image)
            fail(Errc::Precondition, "image " + image_id + " has fewer than " +
                                         std::to_string(k_per_image) + " present objects");
    }

    // High-frequency pool for the popular setting, over the whole universe.
    std::set<std::string> popular_pool;
    if (setting == PopeSetting::Popular) {
        size_t pool_size = std::max(opts.popular_pool_min,
                                    size_t(std::ceil(opts.popular_pool_share * universe.size())));
        pool_size = std::min(pool_size, universe.size());
        std::vector<std::string> ranked = universe;
        std::sort(ranked.begin(), ranked.end(), [&](const std::string& a, const std::string& b) {
            uint64_t fa = stats.frequency(a), fb = stats.frequency(b);
            if (fa != fb) return fa > fb;
            return a < b;
        });
        popular_pool.insert(ranked.begin(), ranked.begin() + std::ptrdiff_t(pool_size));
    }

    std::vector<PopeQuery> queries;
    queries.reserve(annotations.size() * k_per_image * 2);

    for (const auto& [image_id, present] : annotations) {
        // per-image stream keeps results independent of image iteration order
        SplitMix64 rng(seed ^ fnv1a64(image_id));

        std::vector<std::string> absent;
        for (const auto& name : universe)
            if (!present.contains(name)) absent.push_back(name);
        if (absent.size() < k_per_image)
            fail(Errc::InsufficientAbsentObjects,
                 "image " + image_id + " has only " + std::to_string(absent.size()) +
                     " absent objects, need " + std::to_string(k_per_image));

        std::vector<std::string> present_sorted(present.begin(), present.end());
        std::vector<std::string> positives = pick_random(present_sorted, k_per_image, rng);

        std::vector<std::string> negatives;
        switch (setting) {
        case PopeSetting::Random:
            negatives = pick_random(absent, k_per_image, rng);
            break;
        case PopeSetting::Popular: {
            std::vector<std::string> in_pool, rest;
            for (const auto& name : absent)
                (popular_pool.contains(name) ? in_pool : rest).push_back(name);
            if (in_pool.size() >= k_per_image) {
                negatives = pick_random(in_pool, k_per_image, rng);
            } else {
                negatives = in_pool;
                // fall back to the most frequent remaining absents
                std::sort(rest.begin(), rest.end(), [&](const std::string& a, const std::string& b) {
                    uint64_t fa = stats.frequency(a), fb = stats.frequency(b);
                    if (fa != fb) return fa > fb;
                    return a < b;
                });
                negatives.insert(negatives.end(), rest.begin(),
                                 rest.begin() + std::ptrdiff_t(k_per_image - negatives.size()));
            }
            break;
        }
        case PopeSetting::Adversarial: {
            auto ranked = adversarial_ranking(absent, present, stats);
            negatives.assign(ranked.begin(), ranked.begin() + std::ptrdiff_t(k_per_image));
            break;
        }
        }

        for (const auto& name : positives)
            queries.push_back({image_id, name, true, setting});
        for (const auto& name : negatives)
            queries.push_back({image_id, name, false, setting});
    }
    return queries;
}

Dataset pope_queries_to_instances(const std::vector<PopeQuery>& queries,
                                  const std::string& images_root) {
    Dataset out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        VQAInstance inst;
        inst.id = q.image_id + ":" + std::string(pope_setting_name(q.setting)) + ":" +
                  (q.label ? "pos" : "neg") + ":" + q.object_name;
        std::filesystem::path root(images_root);
        inst.image_path = (root / q.image_id).string();
        inst.question = pope_question(q.object_name);
        inst.ground_truth = q.label ? "yes" : "no";
        inst.task = TaskKind::pope(q.setting);
        inst.image_group_id = q.image_id;
        out.push_back(std::move(inst));
    }
    return out;
}

} // namespace vtp
