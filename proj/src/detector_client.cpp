// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/detector_client.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <map>
#include <thread>

#include <httplib.h>

#include "vtprompt/base64.hpp"
#include "vtprompt/error.hpp"
#include "vtprompt/hash.hpp"

namespace vtp {

DetectorClient::DetectorClient(std::string backend_id, std::string backend_version,
                               CassetteMode mode, CassetteStore store,
                               std::optional<DetectorEndpoint> endpoint, RetryPolicy retry,
                               DetectorLimits limits, std::shared_ptr<ConcurrencyLimiter> limiter)
    : backend_id_(std::move(backend_id)),
      backend_version_(std::move(backend_version)),
      mode_(mode),
      store_(std::move(store)),
      endpoint_(std::move(endpoint)),
      retry_(retry),
      limits_(limits),
      limiter_(std::move(limiter)) {}

DetectorWireRequest DetectorWireRequest::boxes_for(const Image& image,
                                                   std::vector<std::string> labels) {
    DetectorWireRequest req;
    req.image_b64 = base64_encode(encode_png(image));
    req.image_hash = image.content_hash();
    req.labels = std::move(labels);
    req.mode = "box";
    return req;
}

DetectorWireRequest DetectorWireRequest::segments_for(const Image& image) {
    DetectorWireRequest req;
    req.image_b64 = base64_encode(encode_png(image));
    req.image_hash = image.content_hash();
    req.mode = "segment";
    return req;
}

DetectorWireRequest DetectorWireRequest::conditional_for(const Image& image,
                                                         std::vector<std::string> labels,
                                                         std::vector<Box> boxes) {
    DetectorWireRequest req;
    req.image_b64 = base64_encode(encode_png(image));
    req.image_hash = image.content_hash();
    req.labels = std::move(labels);
    req.mode = "conditional";
    req.boxes = std::move(boxes);
    return req;
}

std::string DetectorWireRequest::fingerprint(const std::string& backend_id,
                                             const std::string& backend_version) const {
    nlohmann::json canon{{"backend", backend_id},
                         {"backend_version", backend_version},
                         {"image", image_hash},
                         {"mode", mode}};
    if (labels) canon["labels"] = *labels;
    if (!boxes.empty()) {
        nlohmann::json jb = nlohmann::json::array();
        for (const auto& b : boxes) jb.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
        canon["boxes"] = std::move(jb);
    }
    return sha256_hex(canon.dump());
}

std::string DetectorWireRequest::body() const {
    nlohmann::json j{{"image_b64", image_b64}, {"mode", mode}};
    j["labels"] = labels ? nlohmann::json(*labels) : nlohmann::json(nullptr);
    if (!boxes.empty()) {
        nlohmann::json jb = nlohmann::json::array();
        for (const auto& b : boxes) jb.push_back({b.x_min, b.y_min, b.x_max, b.y_max});
        j["boxes"] = std::move(jb);
    }
    return j.dump();
}

nlohmann::json DetectorClient::round_trip(const DetectorWireRequest& req) const {
    const std::string fp = req.fingerprint(backend_id_, backend_version_);

    std::optional<CassetteEntry> entry;
    if (mode_ != CassetteMode::Passthrough) {
        entry = store_.find(fp);
        if (entry) cassette_hits_.fetch_add(1);
        if (!entry && mode_ == CassetteMode::Replay)
            fail(Errc::CassetteMiss, "backend " + backend_id_ + " fingerprint " + fp);
    }

    if (!entry) {
        const std::string body = req.body();
        int attempt = 0;
        while (true) {
            ++attempt;
            try {
                CassetteEntry got = http_post(body);
                if (got.status == 200) {
                    entry = got;
                    break;
                }
                bool transient = got.status == 429 || got.status >= 500;
                if (!transient || attempt >= retry_.max_attempts)
                    fail(Errc::BackendError, "backend " + backend_id_ + " returned status " +
                                                 std::to_string(got.status) + " after " +
                                                 std::to_string(attempt) + " attempts");
            } catch (const Error& e) {
                if (e.code() != Errc::Timeout || attempt >= retry_.max_attempts) throw;
            }
            size_t slot = size_t(attempt - 1);
            int wait_ms = slot < retry_.backoff_ms.size() ? retry_.backoff_ms[slot]
                          : retry_.backoff_ms.empty()     ? 0
                                                          : retry_.backoff_ms.back();
            std::this_thread::sleep_for(std::chrono::milliseconds(wait_ms));
        }
        if (mode_ == CassetteMode::Record) store_.put(fp, *entry);
    }

    try {
        return nlohmann::json::parse(entry->body);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::MalformedResponse, std::string("detector response: ") + e.what());
    }
}

CassetteEntry DetectorClient::http_post(const std::string& body) const {
    if (!endpoint_) fail(Errc::BackendUnavailable, "backend " + backend_id_ + " has no endpoint");
    struct Slot {
        ConcurrencyLimiter* l;
        explicit Slot(ConcurrencyLimiter* l) : l(l) {
            if (l) l->acquire();
        }
        ~Slot() {
            if (l) l->release();
        }
    } slot(limiter_.get());

    network_calls_.fetch_add(1);
    httplib::Client cli(endpoint_->host, endpoint_->port);
    cli.set_connection_timeout(endpoint_->timeout_ms / 1000, (endpoint_->timeout_ms % 1000) * 1000);
    cli.set_read_timeout(endpoint_->timeout_ms / 1000, (endpoint_->timeout_ms % 1000) * 1000);
    auto res = cli.Post(endpoint_->path, body, "application/json");
    if (!res) {
        auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write)
            fail(Errc::Timeout, "backend " + backend_id_ + ": " + httplib::to_string(err));
        fail(Errc::BackendUnavailable, "backend " + backend_id_ + ": " + httplib::to_string(err));
    }
    return CassetteEntry{res->status, res->body};
}

DetectionSet DetectorClient::sanitize(const nlohmann::json& response, const std::string& image_id,
                                      const Image& image,
                                      const std::optional<std::vector<std::string>>& labels,
                                      DetectorBackend backend, bool require_masks) const {
    auto it = response.find("detections");
    if (it == response.end() || !it->is_array()) fail(Errc::MalformedResponse, "detections");

    DetectionSet out;
    out.image_id = image_id;
    out.backend = backend;

    for (const auto& jd : *it) {
        auto det = sanitize_wire_detection(jd, image.width, image.height);
        if (!det) continue;
        if (labels && std::find(labels->begin(), labels->end(), det->label) == labels->end())
            continue;  // never emit a label outside the requested set
        if (det->score < limits_.min_score) continue;
        if (require_masks && !det->mask) fail(Errc::MalformedResponse, "mask");
        out.detections.push_back(std::move(*det));
    }
    out.sort_canonical();

    // per-label cap keeps the top-scoring entries; order is settled above
    std::map<std::string, size_t> per_label;
    std::vector<Detection> capped;
    capped.reserve(out.detections.size());
    for (auto& d : out.detections) {
        if (per_label[d.label]++ >= limits_.max_per_label) continue;
        capped.push_back(std::move(d));
    }
    out.detections = std::move(capped);
    return out;
}

DetectionSet DetectorClient::detect_grounded(const Image& image, const std::string& image_id,
                                             const ConceptSet& concepts) const {
    if (concepts.concepts.empty()) fail(Errc::Precondition, "empty concept set");
    auto req = DetectorWireRequest::boxes_for(image, concepts.concepts);
    auto response = round_trip(req);
    return sanitize(response, image_id, image, req.labels, DetectorBackend::GroundingBox,
                    /*require_masks=*/false);
}

DetectionSet DetectorClient::segment_everything(const Image& image,
                                                const std::string& image_id) const {
    auto req = DetectorWireRequest::segments_for(image);
    auto response = round_trip(req);
    DetectionSet out = sanitize(response, image_id, image, std::nullopt,
                                DetectorBackend::SegmentEverything, /*require_masks=*/true);
    for (auto& d : out.detections) d.label = "region";
    out.sort_canonical();
    return out;
}

DetectionSet DetectorClient::segment_conditional(const Image& image, const std::string& image_id,
                                                 const ConceptSet& concepts) const {
    DetectionSet grounded = detect_grounded(image, image_id, concepts);
    grounded.backend = DetectorBackend::ConditionalSegment;
    if (grounded.detections.empty()) return grounded;  // nothing to mask

    std::vector<std::string> labels;
    std::vector<Box> boxes;
    for (const auto& d : grounded.detections) {
        labels.push_back(d.label);
        boxes.push_back(d.box);
    }
    auto mask_req = DetectorWireRequest::conditional_for(image, std::move(labels), std::move(boxes));

    try {
        auto response = round_trip(mask_req);
        DetectionSet masked = sanitize(response, image_id, image, mask_req.labels,
                                       DetectorBackend::ConditionalSegment, /*require_masks=*/true);
        if (!masked.detections.empty()) return masked;
    } catch (const Error& e) {
        std::cerr << "[vtprompt] warning: mask stage failed for " << image_id << " ("
                  << e.what() << "), returning boxes only\n";
    }
    return grounded;
}

} // namespace vtp
