// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "test_support.hpp"
#include "vtprompt/chat_client.hpp"
#include "vtprompt/error.hpp"

using namespace vtp;

namespace {

/// Local chat-completion stand-in running on a loopback port.
struct FakeBackend {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> calls{0};
    std::atomic<int> fail_first{0};  // respond 500 to this many requests
    int fail_status = 500;

    FakeBackend() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                   httplib::Response& res) {
            calls.fetch_add(1);
            if (fail_first.fetch_sub(1) > 0) {
                res.status = fail_status;
                res.set_content("{}", "application/json");
                return;
            }
            auto body = nlohmann::json::parse(req.body);
            std::string prompt =
                body.at("messages").at(0).at("content").at(0).at("text").get<std::string>();
            res.set_content(make_chat_response_body("echo: " + prompt), "application/json");
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeBackend() {
        server.stop();
        thread.join();
    }
};

RetryPolicy fast_retry() {
    RetryPolicy p;
    p.max_attempts = 3;
    p.backoff_ms = {1, 2, 4};
    return p;
}

ChatRequest text_request(const std::string& prompt) {
    ChatRequest r;
    r.prompt = prompt;
    r.model_id = "m1";
    return r;
}

} // namespace

TEST_CASE("fingerprints cover model, prompt, image, temperature and max_tokens") {
    auto base = text_request("hello");
    auto same = text_request("hello");
    CHECK(base.fingerprint() == same.fingerprint());

    auto other_prompt = text_request("goodbye");
    CHECK(base.fingerprint() != other_prompt.fingerprint());

    auto other_model = text_request("hello");
    other_model.model_id = "m2";
    CHECK(base.fingerprint() != other_model.fingerprint());

    auto warm = text_request("hello");
    warm.temperature = 0.7;
    CHECK(base.fingerprint() != warm.fingerprint());

    auto shorter = text_request("hello");
    shorter.max_tokens = 64;
    CHECK(base.fingerprint() != shorter.fingerprint());

    auto with_image = text_request("hello");
    with_image.image = ImagePayload{{1, 2, 3}, "image/png"};
    CHECK(base.fingerprint() != with_image.fingerprint());
}

TEST_CASE("defaults pin temperature 0 and max_tokens 2048") {
    ChatRequest r;
    CHECK(r.temperature == 0.0);
    CHECK(r.max_tokens == 2048);
    auto wire = nlohmann::json::parse(chat_request_wire_json(text_request("q")));
    CHECK(wire.at("temperature").get<double>() == 0.0);
    CHECK(wire.at("max_tokens").get<int>() == 2048);
}

TEST_CASE("replay hits return the recorded string with zero network touches") {
    vtt::TempDir tmp;
    CassetteStore store(tmp.path, "b");
    auto req = text_request("what objects?");
    store.put(req.fingerprint(), {200, make_chat_response_body("recorded answer")});

    ChatClient client("b", CassetteMode::Replay, store);
    CHECK(client.query_text(req) == "recorded answer");
    CHECK(client.network_calls() == 0);
}

TEST_CASE("replay misses raise CassetteMiss naming the fingerprint") {
    vtt::TempDir tmp;
    ChatClient client("b", CassetteMode::Replay, CassetteStore(tmp.path, "b"));
    auto req = text_request("nothing stored");
    try {
        client.query_text(req);
        FAIL("expected CassetteMiss");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::CassetteMiss);
        CHECK(std::string(e.what()).find(req.fingerprint()) != std::string::npos);
    }
}

TEST_CASE("record mode dedups identical requests through the cassette") {
    FakeBackend backend;
    vtt::TempDir tmp;
    ChatEndpoint ep{"127.0.0.1", backend.port, "/v1/chat/completions", "", 2000};
    ChatClient client("b", CassetteMode::Record, CassetteStore(tmp.path, "b"), ep, fast_retry());

    auto req = text_request("count the cats");
    CHECK(client.query_text(req) == "echo: count the cats");
    CHECK(client.query_text(req) == "echo: count the cats");
    CHECK(backend.calls.load() == 1);  // second answer came from the cassette
    CHECK(client.network_calls() == 1);

    // a replay-only client can now serve it
    ChatClient replayer("b", CassetteMode::Replay, CassetteStore(tmp.path, "b"));
    CHECK(replayer.query_text(req) == "echo: count the cats");
}

TEST_CASE("passthrough mode always dials and never writes cassettes") {
    FakeBackend backend;
    vtt::TempDir tmp;
    ChatEndpoint ep{"127.0.0.1", backend.port, "/v1/chat/completions", "", 2000};
    ChatClient client("b", CassetteMode::Passthrough, CassetteStore(tmp.path, "b"), ep,
                      fast_retry());
    auto req = text_request("q");
    client.query_text(req);
    client.query_text(req);
    CHECK(backend.calls.load() == 2);
    CHECK_FALSE(std::filesystem::exists(tmp.path / "b" / (req.fingerprint() + ".json")));
}

TEST_CASE("transient 5xx retries then succeeds") {
    FakeBackend backend;
    backend.fail_first = 2;
    vtt::TempDir tmp;
    ChatEndpoint ep{"127.0.0.1", backend.port, "/v1/chat/completions", "", 2000};
    ChatClient client("b", CassetteMode::Record, CassetteStore(tmp.path, "b"), ep, fast_retry());
    CHECK(client.query_text(text_request("retry me")) == "echo: retry me");
    CHECK(backend.calls.load() == 3);
}

TEST_CASE("5xx after max retries surfaces BackendError with the attempt count") {
    FakeBackend backend;
    backend.fail_first = 100;
    vtt::TempDir tmp;
    ChatEndpoint ep{"127.0.0.1", backend.port, "/v1/chat/completions", "", 2000};
    ChatClient client("b", CassetteMode::Record, CassetteStore(tmp.path, "b"), ep, fast_retry());
    try {
        client.query_text(text_request("doomed"));
        FAIL("expected BackendError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::BackendError);
        CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
    }
    CHECK(backend.calls.load() == 3);
}

TEST_CASE("429 maps to RateLimited") {
    FakeBackend backend;
    backend.fail_first = 100;
    backend.fail_status = 429;
    vtt::TempDir tmp;
    ChatEndpoint ep{"127.0.0.1", backend.port, "/v1/chat/completions", "", 2000};
    ChatClient client("b", CassetteMode::Record, CassetteStore(tmp.path, "b"), ep, fast_retry());
    try {
        client.query_text(text_request("slow down"));
        FAIL("expected RateLimited");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::RateLimited);
    }
}

TEST_CASE("unreachable backends surface as unavailable, not as hangs") {
    vtt::TempDir tmp;
    // nothing listens here; connection is refused immediately
    ChatEndpoint ep{"127.0.0.1", 1, "/v1/chat/completions", "", 500};
    RetryPolicy p;
    p.max_attempts = 1;
    ChatClient client("b", CassetteMode::Record, CassetteStore(tmp.path, "b"), ep, p);
    CHECK_THROWS_AS(client.query_text(text_request("anyone there?")), Error);
}

TEST_CASE("query_vision requires an image and query_text rejects one") {
    vtt::TempDir tmp;
    ChatClient client("b", CassetteMode::Replay, CassetteStore(tmp.path, "b"));
    CHECK_THROWS_AS(client.query_vision(text_request("no image")), Error);
    auto with_image = text_request("has image");
    with_image.image = ImagePayload{{1, 2, 3}, "image/png"};
    CHECK_THROWS_AS(client.query_text(with_image), Error);
}

TEST_CASE("cassette entries are append-only") {
    vtt::TempDir tmp;
    CassetteStore store(tmp.path, "b");
    store.put("fp1", {200, "first"});
    store.put("fp1", {200, "second"});  // ignored
    auto entry = store.find("fp1");
    REQUIRE(entry.has_value());
    CHECK(entry->body == "first");
}

TEST_CASE("temperature overrides record under distinct fingerprints") {
    FakeBackend backend;
    vtt::TempDir tmp;
    ChatEndpoint ep{"127.0.0.1", backend.port, "/v1/chat/completions", "", 2000};
    ChatClient client("b", CassetteMode::Record, CassetteStore(tmp.path, "b"), ep, fast_retry());

    auto cold = text_request("same prompt");
    auto warm = text_request("same prompt");
    warm.temperature = 0.7;
    client.query_text(cold);
    client.query_text(warm);
    CHECK(backend.calls.load() == 2);  // no dedup across temperatures
}
