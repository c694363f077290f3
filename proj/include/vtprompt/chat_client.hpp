// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vtprompt/cassette.hpp"

namespace vtp {

struct ImagePayload {
    std::vector<uint8_t> bytes;   // encoded image (PNG)
    std::string media_type = "image/png";
};

/// One chat-completion request. Temperature 0 and max_tokens 2048 are the
/// pinned defaults; overriding either changes the request fingerprint.
struct ChatRequest {
    std::optional<ImagePayload> image;
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 2048;
    std::string model_id;

    std::string fingerprint() const;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::vector<int> backoff_ms = {1000, 4000, 16000};
};

struct ChatEndpoint {
    std::string host;           // e.g. "api.example.com" or "127.0.0.1"
    int port = 443;
    std::string path = "/v1/chat/completions";
    std::string api_key;        // sent as Bearer token when non-empty
    int timeout_ms = 60000;
};

/// Bounds total in-flight remote calls across every client sharing it.
class ConcurrencyLimiter {
public:
    explicit ConcurrencyLimiter(int max_in_flight);
    void acquire();
    void release();

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

/// Chat-completion client with cassette record/replay. Replay mode never
/// opens a connection; Record mode stores each response before returning
/// it and serves repeated fingerprints from the store.
class ChatClient {
public:
    ChatClient(std::string backend_id, CassetteMode mode, CassetteStore store,
               std::optional<ChatEndpoint> endpoint = std::nullopt,
               RetryPolicy retry = {},
               std::shared_ptr<ConcurrencyLimiter> limiter = nullptr);

    /// Vision-language query; the request must carry an image.
    std::string query_vision(const ChatRequest& request) const;

    /// Text-only query; the request must not carry an image.
    std::string query_text(const ChatRequest& request) const;

    uint64_t network_calls() const { return network_calls_.load(); }
    uint64_t cassette_hits() const { return cassette_hits_.load(); }
    CassetteMode mode() const { return mode_; }
    const std::string& backend_id() const { return backend_id_; }

private:
    std::string query(const ChatRequest& request) const;
    CassetteEntry dispatch(const ChatRequest& request) const;
    CassetteEntry http_post(const std::string& body) const;

    std::string backend_id_;
    CassetteMode mode_;
    CassetteStore store_;
    std::optional<ChatEndpoint> endpoint_;
    RetryPolicy retry_;
    std::shared_ptr<ConcurrencyLimiter> limiter_;
    mutable std::atomic<uint64_t> network_calls_{0};
    mutable std::atomic<uint64_t> cassette_hits_{0};
};

/// Wire-format helpers, exposed for tests and the fixture generator.
std::string chat_request_wire_json(const ChatRequest& request);
std::string parse_chat_response_body(const std::string& body);
std::string make_chat_response_body(const std::string& content);

} // namespace vtp
