// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/detection.hpp"

#include <algorithm>
#include <cmath>

#include "vtprompt/error.hpp"
#include "vtprompt/hash.hpp"

namespace vtp {

uint64_t RleMask::total() const {
    uint64_t sum = 0;
    for (uint32_t c : counts) sum += c;
    return sum;
}

std::vector<uint8_t> RleMask::to_bitmap() const {
    std::vector<uint8_t> bits(size_t(width) * height, 0);
    size_t pos = 0;
    uint8_t value = 0;
    for (uint32_t run : counts) {
        if (value) std::fill_n(bits.begin() + std::ptrdiff_t(pos), run, uint8_t(1));
        pos += run;
        value ^= 1;
    }
    return bits;
}

RleMask RleMask::from_bitmap(int w, int h, const std::vector<uint8_t>& bits) {
    RleMask m;
    m.width = w;
    m.height = h;
    uint8_t value = 0;
    uint32_t run = 0;
    for (uint8_t b : bits) {
        uint8_t cur = b ? 1 : 0;
        if (cur == value) {
            ++run;
        } else {
            m.counts.push_back(run);
            value = cur;
            run = 1;
        }
    }
    m.counts.push_back(run);
    return m;
}

std::optional<Box> RleMask::tight_box() const {
    int min_x = width, min_y = height, max_x = -1, max_y = -1;
    uint64_t pos = 0;
    uint8_t value = 0;
    for (uint32_t run : counts) {
        if (value && run > 0) {
            uint64_t first = pos, last = pos + run - 1;
            int y0 = int(first / width), y1 = int(last / width);
            min_y = std::min(min_y, y0);
            max_y = std::max(max_y, y1);
            if (y0 == y1) {
                min_x = std::min(min_x, int(first % width));
                max_x = std::max(max_x, int(last % width));
            } else {
                // run wraps at least one row boundary, so it spans full width
                min_x = 0;
                max_x = width - 1;
            }
        }
        pos += run;
        value ^= 1;
    }
    if (max_x < 0) return std::nullopt;
    return Box{double(min_x), double(min_y), double(max_x + 1), double(max_y + 1)};
}

std::string_view detector_backend_name(DetectorBackend b) {
    switch (b) {
    case DetectorBackend::GroundingBox: return "grounding_box";
    case DetectorBackend::SegmentEverything: return "segment_everything";
    case DetectorBackend::ConditionalSegment: return "conditional_segment";
    }
    return "grounding_box";
}

DetectorBackend detector_backend_from_name(std::string_view name) {
    if (name == "grounding_box") return DetectorBackend::GroundingBox;
    if (name == "segment_everything") return DetectorBackend::SegmentEverything;
    if (name == "conditional_segment") return DetectorBackend::ConditionalSegment;
    fail(Errc::ConfigInvalid, "unknown detector backend '" + std::string(name) + "'");
}

void DetectionSet::sort_canonical() {
    std::stable_sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.label != b.label) return a.label < b.label;
        return a.box.x_min < b.box.x_min;
    });
}

nlohmann::json DetectionSet::to_json() const {
    nlohmann::json dets = nlohmann::json::array();
    for (const auto& d : detections) {
        nlohmann::json jd{{"label", d.label},
                          {"box", {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max}},
                          {"score", d.score}};
        if (d.mask) {
            jd["mask_rle"] = {{"width", d.mask->width},
                              {"height", d.mask->height},
                              {"counts", d.mask->counts}};
        }
        dets.push_back(std::move(jd));
    }
    return nlohmann::json{{"image_id", image_id},
                          {"backend", detector_backend_name(backend)},
                          {"detections", std::move(dets)}};
}

DetectionSet DetectionSet::from_json(const nlohmann::json& j) {
    DetectionSet out;
    try {
        out.image_id = j.at("image_id").get<std::string>();
        out.backend = detector_backend_from_name(j.at("backend").get<std::string>());
        for (const auto& jd : j.at("detections")) {
            Detection d;
            d.label = jd.at("label").get<std::string>();
            const auto& b = jd.at("box");
            d.box = Box{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                        b.at(3).get<double>()};
            d.score = jd.at("score").get<double>();
            if (auto it = jd.find("mask_rle"); it != jd.end() && !it->is_null()) {
                RleMask m;
                m.width = it->at("width").get<int>();
                m.height = it->at("height").get<int>();
                m.counts = it->at("counts").get<std::vector<uint32_t>>();
                if (!m.valid()) fail(Errc::MalformedResponse, "mask");
                d.mask = std::move(m);
            }
            out.detections.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::MalformedResponse, std::string("detection set: ") + e.what());
    }
    return out;
}

std::string DetectionSet::content_hash() const {
    return sha256_hex(to_json().dump());
}

std::optional<Detection> sanitize_wire_detection(const nlohmann::json& j, int img_w, int img_h) {
    Detection d;
    try {
        d.label = j.at("label").get<std::string>();
        const auto& b = j.at("box");
        if (!b.is_array() || b.size() != 4) fail(Errc::MalformedResponse, "box");
        d.box = Box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
        d.score = j.at("score").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::MalformedResponse, std::string("detection: ") + e.what());
    }
    if (!std::isfinite(d.box.x_min) || !std::isfinite(d.box.y_min) || !std::isfinite(d.box.x_max) ||
        !std::isfinite(d.box.y_max) || !std::isfinite(d.score))
        fail(Errc::MalformedResponse, "box");
    d.score = std::clamp(d.score, 0.0, 1.0);

    if (auto it = j.find("mask_rle"); it != j.end() && !it->is_null()) {
        RleMask m;
        try {
            m.width = it->at("width").get<int>();
            m.height = it->at("height").get<int>();
            m.counts = it->at("counts").get<std::vector<uint32_t>>();
        } catch (const nlohmann::json::exception&) {
            fail(Errc::MalformedResponse, "mask");
        }
        if (m.width != img_w || m.height != img_h || !m.valid())
            fail(Errc::MalformedResponse, "mask");
        d.mask = std::move(m);
    }

    // a mask escaping its box widens the box to cover it
    if (d.mask) {
        if (auto tight = d.mask->tight_box()) {
            d.box.x_min = std::min(d.box.x_min, tight->x_min);
            d.box.y_min = std::min(d.box.y_min, tight->y_min);
            d.box.x_max = std::max(d.box.x_max, tight->x_max);
            d.box.y_max = std::max(d.box.y_max, tight->y_max);
        }
    }

    d.box.x_min = std::clamp(d.box.x_min, 0.0, double(img_w));
    d.box.x_max = std::clamp(d.box.x_max, 0.0, double(img_w));
    d.box.y_min = std::clamp(d.box.y_min, 0.0, double(img_h));
    d.box.y_max = std::clamp(d.box.y_max, 0.0, double(img_h));
    if (d.box.x_min >= d.box.x_max || d.box.y_min >= d.box.y_max) return std::nullopt;
    return d;
}

} // namespace vtp
