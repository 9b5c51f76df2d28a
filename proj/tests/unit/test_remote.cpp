#include "fakes.hpp"

#include "charforge/png.hpp"
#include "charforge/remote_provider.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <fstream>
#include <thread>

using namespace charforge;
using nlohmann::json;

namespace {

// A local stand-in for a chat-completion / image-generation service.
struct FakeService {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> chat_hits{0};
    std::atomic<int> image_hits{0};
    std::function<void(const httplib::Request&, httplib::Response&, int)> chat;
    std::function<void(const httplib::Request&, httplib::Response&, int)> images;
    json last_chat_body;
    std::string last_auth;

    FakeService() {
        server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            last_chat_body = json::parse(req.body);
            last_auth = req.get_header_value("Authorization");
            chat(req, res, ++chat_hits);
        });
        server.Post("/v1/images/generations", [this](const httplib::Request& req, httplib::Response& res) {
            images(req, res, ++image_hits);
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~FakeService() {
        server.stop();
        thread.join();
    }

    RemoteProvider provider(int max_retries = 2, double timeout = 5.0, ApiMapping mapping = {}) {
        ProviderConfig c;
        c.kind = ProviderKind::Remote;
        c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        c.max_retries = max_retries;
        c.timeout_seconds = timeout;
        c.text_model = "text-model-x";
        return RemoteProvider(c, "sk-test", std::move(mapping), [](std::chrono::duration<double>) {});
    }
};

void reply_text(httplib::Response& res, const std::string& content) {
    res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}},
                         {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 7}}}}
                        .dump(),
                    "application/json");
}

void reply_images(httplib::Response& res, int n) {
    json data = json::array();
    for (int i = 0; i < n; ++i) {
        data.push_back({{"b64_json", base64_encode(png::encode_solid(4, 4, {std::uint8_t(i * 40), 3, 4}))}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
}

ChatRequest ping() {
    ChatRequest r;
    r.messages = {{Role::System, "be brief"}, {Role::User, "ping"}};
    return r;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::BadRequest;
}

}  // namespace

TEST_CASE("remote text completion uses the chat-completion wire shape") {
    FakeService svc;
    svc.chat = [](const httplib::Request&, httplib::Response& res, int) { reply_text(res, "pong"); };
    auto p = svc.provider();
    const auto result = p.complete_text(ping());
    CHECK(result.content == "pong");
    CHECK(result.usage.prompt_tokens == 11);
    CHECK(result.usage.completion_tokens == 7);
    CHECK(svc.last_auth == "Bearer sk-test");
    CHECK(svc.last_chat_body["model"] == "text-model-x");
    REQUIRE(svc.last_chat_body["messages"].size() == 2);
    CHECK(svc.last_chat_body["messages"][0]["role"] == "system");
    CHECK(svc.last_chat_body["messages"][1]["content"] == "ping");
}

TEST_CASE("remote images decode base64 payloads into reference images") {
    FakeService svc;
    svc.images = [](const httplib::Request& req, httplib::Response& res, int) {
        const auto body = json::parse(req.body);
        reply_images(res, body.at("n").get<int>());
    };
    auto p = svc.provider();
    const auto images = p.generate_images({"a cool boy", 5, {256, 256}});
    REQUIRE(images.size() == 5);
    for (const auto& img : images) CHECK(validate_image(img).ok());
}

TEST_CASE("transient failures are retried up to max_retries") {
    FakeService svc;
    svc.chat = [](const httplib::Request&, httplib::Response& res, int) {
        res.status = 429;
        res.set_content("{}", "application/json");
    };
    auto p = svc.provider(2);
    CHECK(code_of([&] { p.complete_text(ping()); }) == ErrorCode::RateLimited);
    CHECK(svc.chat_hits == 3);
}

TEST_CASE("a 503 followed by success recovers") {
    FakeService svc;
    svc.chat = [](const httplib::Request&, httplib::Response& res, int hit) {
        if (hit == 1) {
            res.status = 503;
            return;
        }
        reply_text(res, "back");
    };
    auto p = svc.provider(3);
    CHECK(p.complete_text(ping()).content == "back");
    CHECK(svc.chat_hits == 2);
}

TEST_CASE("content policy rejections are not retried") {
    FakeService svc;
    svc.images = [](const httplib::Request&, httplib::Response& res, int) {
        res.status = 400;
        res.set_content(R"({"error":{"code":"content_policy_violation","message":"rejected"}})", "application/json");
    };
    auto p = svc.provider(3);
    CHECK(code_of([&] { p.generate_images({"x", 1, {8, 8}}); }) == ErrorCode::ContentRefused);
    CHECK(svc.image_hits == 1);
}

TEST_CASE("unparseable and mis-shaped bodies are malformed responses") {
    FakeService svc;
    svc.chat = [](const httplib::Request&, httplib::Response& res, int hit) {
        if (hit == 1) {
            res.set_content("<html>oops</html>", "text/html");
        } else {
            res.set_content(R"({"choices":[]})", "application/json");
        }
    };
    auto p = svc.provider(0);
    CHECK(code_of([&] { p.complete_text(ping()); }) == ErrorCode::MalformedResponse);
    CHECK(code_of([&] { p.complete_text(ping()); }) == ErrorCode::MalformedResponse);
}

TEST_CASE("slow backends time out") {
    FakeService svc;
    svc.chat = [](const httplib::Request&, httplib::Response& res, int) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1500));
        reply_text(res, "late");
    };
    auto p = svc.provider(1, 0.3);
    CHECK(code_of([&] { p.complete_text(ping()); }) == ErrorCode::Timeout);
    CHECK(svc.chat_hits == 2);
}

TEST_CASE("unreachable backends are unavailable") {
    ProviderConfig c;
    c.kind = ProviderKind::Remote;
    c.base_url = "http://127.0.0.1:1";
    c.max_retries = 1;
    c.timeout_seconds = 1;
    RemoteProvider p(c, "k", {}, [](std::chrono::duration<double>) {});
    CHECK(code_of([&] { p.complete_text(ping()); }) == ErrorCode::ProviderUnavailable);
}

TEST_CASE("field names come from the mapping file") {
    fakes::TempDir dir;
    std::ofstream(dir / "mapping.json") << R"({"content_pointer": "/output/text", "model_field": "engine"})";
    const auto mapping = ApiMapping::load(dir / "mapping.json");
    CHECK(mapping.content_pointer == "/output/text");
    CHECK(mapping.chat_path == "/chat/completions");

    FakeService svc;
    svc.chat = [](const httplib::Request&, httplib::Response& res, int) {
        res.set_content(R"({"output":{"text":"mapped"}})", "application/json");
    };
    auto p = svc.provider(0, 5.0, mapping);
    CHECK(p.complete_text(ping()).content == "mapped");
    CHECK(svc.last_chat_body.contains("engine"));

    std::ofstream(dir / "bad.json") << R"({"no_such_field": "x"})";
    CHECK(code_of([&] { ApiMapping::load(dir / "bad.json"); }) == ErrorCode::ConfigError);
}
