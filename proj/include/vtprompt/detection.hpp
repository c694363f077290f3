// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vtp {

struct Box {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    friend bool operator==(const Box&, const Box&) = default;
};

/// Binary mask, run-length encoded row-major with alternating runs of
/// zeros and ones, starting with zeros (the first count may be 0).
struct RleMask {
    int width = 0;
    int height = 0;
    std::vector<uint32_t> counts;

    uint64_t total() const;
    bool valid() const { return width > 0 && height > 0 && total() == uint64_t(width) * height; }
    std::vector<uint8_t> to_bitmap() const;                      // width*height bytes of 0/1
    static RleMask from_bitmap(int w, int h, const std::vector<uint8_t>& bits);
    std::optional<Box> tight_box() const;                        // nullopt for all-zero masks

    friend bool operator==(const RleMask&, const RleMask&) = default;
};

struct Detection {
    std::string label;     // concept name, or "region" for unconditioned masks
    Box box;
    std::optional<RleMask> mask;
    double score = 0.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

enum class DetectorBackend { GroundingBox, SegmentEverything, ConditionalSegment };

std::string_view detector_backend_name(DetectorBackend b);
DetectorBackend detector_backend_from_name(std::string_view name);

/// Detections for one image, ordered by descending score then (label,
/// x_min). The order is what marker numbering keys off.
struct DetectionSet {
    std::string image_id;
    std::vector<Detection> detections;
    DetectorBackend backend = DetectorBackend::GroundingBox;

    void sort_canonical();
    std::string content_hash() const;

    nlohmann::json to_json() const;
    static DetectionSet from_json(const nlohmann::json& j);

    friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

/// Parse one backend wire detection ({"label","box","score","mask_rle"?})
/// against image bounds. Boxes are clamped, scores clipped to [0,1], and a
/// mask escaping its box by more than 2 px widens the box; a detection the
/// image rectangle rejects entirely returns nullopt.
std::optional<Detection> sanitize_wire_detection(const nlohmann::json& j, int img_w, int img_h);

} // namespace vtp
