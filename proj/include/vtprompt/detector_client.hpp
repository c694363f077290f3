// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vtprompt/cassette.hpp"
#include "vtprompt/chat_client.hpp"
#include "vtprompt/concepts.hpp"
#include "vtprompt/detection.hpp"
#include "vtprompt/image.hpp"

namespace vtp {

struct DetectorEndpoint {
    std::string host;
    int port = 80;
    std::string path = "/detect";
    int timeout_ms = 60000;
};

struct DetectorLimits {
    double min_score = 0.3;
    size_t max_per_label = 10;
};

/// One request on the detector wire: {"image_b64","labels","mode"} plus
/// "boxes" when masks are conditioned on an earlier grounding pass.
/// Public so cassettes can be seeded out-of-band.
struct DetectorWireRequest {
    std::string image_b64;
    std::string image_hash;
    std::optional<std::vector<std::string>> labels;
    std::string mode;  // "box" | "segment" | "conditional"
    std::vector<Box> boxes;

    static DetectorWireRequest boxes_for(const Image& image, std::vector<std::string> labels);
    static DetectorWireRequest segments_for(const Image& image);
    static DetectorWireRequest conditional_for(const Image& image, std::vector<std::string> labels,
                                               std::vector<Box> boxes);

    std::string fingerprint(const std::string& backend_id, const std::string& backend_version) const;
    std::string body() const;
};

/// Uniform client over the three detection backends. Whatever the wire
/// returns, the results handed back satisfy every DetectionSet invariant;
/// this client is the sanitizer.
class DetectorClient {
public:
    DetectorClient(std::string backend_id, std::string backend_version, CassetteMode mode,
                   CassetteStore store, std::optional<DetectorEndpoint> endpoint = std::nullopt,
                   RetryPolicy retry = {}, DetectorLimits limits = {},
                   std::shared_ptr<ConcurrencyLimiter> limiter = nullptr);

    /// Zero-shot grounded boxes for the given concepts. Labels outside the
    /// concept set are dropped; concepts with no hits are simply absent.
    DetectionSet detect_grounded(const Image& image, const std::string& image_id,
                                 const ConceptSet& concepts) const;

    /// Unconditioned masks over the whole image, all labeled "region".
    DetectionSet segment_everything(const Image& image, const std::string& image_id) const;

    /// Grounded boxes first, then masks conditioned on those boxes. If the
    /// mask call fails the boxes are returned as-is with a warning.
    DetectionSet segment_conditional(const Image& image, const std::string& image_id,
                                     const ConceptSet& concepts) const;

    uint64_t network_calls() const { return network_calls_.load(); }
    uint64_t cassette_hits() const { return cassette_hits_.load(); }

private:
    nlohmann::json round_trip(const DetectorWireRequest& req) const;
    CassetteEntry http_post(const std::string& body) const;
    DetectionSet sanitize(const nlohmann::json& response, const std::string& image_id,
                          const Image& image, const std::optional<std::vector<std::string>>& labels,
                          DetectorBackend backend, bool require_masks) const;

    std::string backend_id_;
    std::string backend_version_;
    CassetteMode mode_;
    CassetteStore store_;
    std::optional<DetectorEndpoint> endpoint_;
    RetryPolicy retry_;
    DetectorLimits limits_;
    std::shared_ptr<ConcurrencyLimiter> limiter_;
    mutable std::atomic<uint64_t> network_calls_{0};
    mutable std::atomic<uint64_t> cassette_hits_{0};
};

} // namespace vtp
