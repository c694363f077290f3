// SPDX-License-Identifier: Apache-2.0
#include "vtprompt/chat_client.hpp"

#include <chrono>
#include <cstdio>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vtprompt/base64.hpp"
#include "vtprompt/error.hpp"
#include "vtprompt/hash.hpp"

namespace vtp {

namespace {

std::string format_temperature(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", t);
    return buf;
}

bool transient_status(int status) { return status == 429 || (status >= 500 && status < 600); }

} // namespace

std::string ChatRequest::fingerprint() const {
    Sha256 h;
    h.update(model_id);
    h.update("\n");
    h.update(prompt);
    h.update("\n");
    if (image) {
        h.update(sha256_hex(std::string_view(reinterpret_cast<const char*>(image->bytes.data()),
                                             image->bytes.size())));
    }
    h.update("\n");
    h.update(format_temperature(temperature));
    h.update("\n");
    h.update(std::to_string(max_tokens));
    auto d = h.finish();
    return to_hex(d.data(), d.size());
}

std::string chat_request_wire_json(const ChatRequest& request) {
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", request.prompt}});
    if (request.image) {
        content.push_back({{"type", "image"},
                           {"image_b64", base64_encode(request.image->bytes)},
                           {"media_type", request.image->media_type}});
    }
    nlohmann::json body{{"model", request.model_id},
                        {"messages", {{{"role", "user"}, {"content", std::move(content)}}}},
                        {"temperature", request.temperature},
                        {"max_tokens", request.max_tokens}};
    return body.dump();
}

std::string parse_chat_response_body(const std::string& body) {
    try {
        auto j = nlohmann::json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::MalformedResponse, std::string("chat response: ") + e.what());
    }
}

std::string make_chat_response_body(const std::string& content) {
    return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}
        .dump();
}

ConcurrencyLimiter::ConcurrencyLimiter(int max_in_flight)
    : available_(max_in_flight > 0 ? max_in_flight : 1) {}

void ConcurrencyLimiter::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return available_ > 0; });
    --available_;
}

void ConcurrencyLimiter::release() {
    {
        std::lock_guard lock(mu_);
        ++available_;
    }
    cv_.notify_one();
}

ChatClient::ChatClient(std::string backend_id, CassetteMode mode, CassetteStore store,
                       std::optional<ChatEndpoint> endpoint, RetryPolicy retry,
                       std::shared_ptr<ConcurrencyLimiter> limiter)
    : backend_id_(std::move(backend_id)),
      mode_(mode),
      store_(std::move(store)),
      endpoint_(std::move(endpoint)),
      retry_(retry),
      limiter_(std::move(limiter)) {}

std::string ChatClient::query_vision(const ChatRequest& request) const {
    if (!request.image) fail(Errc::Precondition, "query_vision requires an image payload");
    return query(request);
}

std::string ChatClient::query_text(const ChatRequest& request) const {
    if (request.image) fail(Errc::Precondition, "query_text must not carry an image payload");
    return query(request);
}

std::string ChatClient::query(const ChatRequest& request) const {
    const std::string fp = request.fingerprint();

    if (mode_ != CassetteMode::Passthrough) {
        if (auto hit = store_.find(fp)) {
            cassette_hits_.fetch_add(1);
            return parse_chat_response_body(hit->body);
        }
        if (mode_ == CassetteMode::Replay)
            fail(Errc::CassetteMiss, "backend " + backend_id_ + " fingerprint " + fp);
    }

    CassetteEntry entry = dispatch(request);
    if (mode_ == CassetteMode::Record) store_.put(fp, entry);
    return parse_chat_response_body(entry.body);
}

CassetteEntry ChatClient::dispatch(const ChatRequest& request) const {
    if (!endpoint_) fail(Errc::BackendUnavailable, "backend " + backend_id_ + " has no endpoint");

    const std::string body = chat_request_wire_json(request);
    int attempt = 0;
    while (true) {
        ++attempt;
        try {
            CassetteEntry entry = http_post(body);
            if (entry.status == 200) return entry;
            if (!transient_status(entry.status) || attempt >= retry_.max_attempts) {
                if (entry.status == 429)
                    fail(Errc::RateLimited, "backend " + backend_id_ + " rate limited after " +
                                                std::to_string(attempt) + " attempts");
                fail(Errc::BackendError, "backend " + backend_id_ + " returned status " +
                                             std::to_string(entry.status) + " after " +
                                             std::to_string(attempt) + " attempts");
            }
        } catch (const Error& e) {
            if (e.code() != Errc::Timeout || attempt >= retry_.max_attempts) throw;
        }
        size_t slot = size_t(attempt - 1);
        int wait_ms = slot < retry_.backoff_ms.size() ? retry_.backoff_ms[slot]
                      : retry_.backoff_ms.empty()     ? 0
                                                      : retry_.backoff_ms.back();
        std::this_thread::sleep_for(std::chrono::milliseconds(wait_ms));
    }
}

CassetteEntry ChatClient::http_post(const std::string& body) const {
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
    httplib::Headers headers;
    if (!endpoint_->api_key.empty())
        headers.emplace("Authorization", "Bearer " + endpoint_->api_key);

    auto res = cli.Post(endpoint_->path, headers, body, "application/json");
    if (!res) {
        auto err = res.error();
        if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
            err == httplib::Error::Write)
            fail(Errc::Timeout, "backend " + backend_id_ + ": " + httplib::to_string(err));
        fail(Errc::BackendUnavailable, "backend " + backend_id_ + ": " + httplib::to_string(err));
    }
    return CassetteEntry{res->status, res->body};
}

} // namespace vtp
