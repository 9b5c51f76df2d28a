#include "charforge/provider.hpp"

#include "charforge/mock_provider.hpp"
#include "charforge/remote_provider.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

namespace charforge {

std::string_view provider_kind_name(ProviderKind kind) noexcept {
    return kind == ProviderKind::Mock ? "mock" : "remote";
}

std::string_view role_name(Role role) noexcept {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

void ProviderConfig::validate() const {
    if (!(timeout_seconds > 0.0)) {
        fail(ErrorCode::ConfigError, "timeout must be positive");
    }
    if (max_retries < 0 || max_retries > 5) {
        fail(ErrorCode::ConfigError, "max_retries must be within [0, 5]");
    }
    if (max_in_flight < 1 || max_in_flight > 256) {
        fail(ErrorCode::ConfigError, "max_in_flight must be within [1, 256]");
    }
    if (kind == ProviderKind::Remote) {
        if (base_url.empty()) fail(ErrorCode::ConfigError, "remote provider requires base_url");
        if (api_key_ref.empty()) fail(ErrorCode::ConfigError, "remote provider requires api_key_ref");
    }
}

ProviderConfig ProviderConfig::from_env() {
    ProviderConfig config;
    const char* base = std::getenv(kEnvApiBase);
    const char* key = std::getenv(kEnvApiKey);
    if (base && *base && key && *key) {
        config.kind = ProviderKind::Remote;
        config.base_url = base;
        config.api_key_ref = kEnvApiKey;
    }
    if (const char* m = std::getenv(kEnvTextModel); m && *m) config.text_model = m;
    if (const char* m = std::getenv(kEnvImageModel); m && *m) config.image_model = m;
    return config;
}

void ChatRequest::validate() const {
    require(!messages.empty(), "chat request has no messages");
    require(max_tokens > 0, "max_tokens must be positive");
    require(temperature >= 0.0 && temperature <= 2.0, "temperature must be within [0, 2]");
    std::optional<Role> previous;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const auto& m = messages[i];
        require(!m.content.empty(), "message " + std::to_string(i) + " is empty");
        if (m.role == Role::System) {
            require(i == 0, "system message allowed only first");
            continue;
        }
        require(!previous || *previous != m.role,
                "message " + std::to_string(i) + " repeats role " + std::string(role_name(m.role)));
        previous = m.role;
    }
    require(previous.has_value(), "chat request has no user message");
}

void ImageRequest::validate() const {
    require(!trim(prompt).empty(), "image prompt is empty");
    require(count >= 1 && count <= 10, "image count must be within [1, 10]");
    require(size.width > 0 && size.height > 0 && size.width <= 4096 && size.height <= 4096,
            "image size must be within 1..4096 pixels per side");
}

Provider::Provider(int max_in_flight) : slots_(std::clamp(max_in_flight, 1, 256)) {}

namespace {

class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<256>& s) : s_(s) { s_.acquire(); }
    ~SlotGuard() { s_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<256>& s_;
};

}  // namespace

TextResult Provider::complete_text(const ChatRequest& request) {
    request.validate();
    SlotGuard slot(slots_);
    auto result = do_complete_text(request);
    if (trim(result.content).empty()) {
        fail(ErrorCode::MalformedResponse, "provider returned empty text");
    }
    return result;
}

std::vector<ReferenceImage> Provider::generate_images(const ImageRequest& request) {
    request.validate();
    SlotGuard slot(slots_);
    auto images = do_generate_images(request);
    if (images.size() != static_cast<std::size_t>(request.count)) {
        fail(ErrorCode::MalformedResponse, "provider returned " + std::to_string(images.size()) +
                                               " images, expected " + std::to_string(request.count));
    }
    for (const auto& image : images) {
        if (auto report = validate_image(image); !report.ok()) {
            fail(ErrorCode::MalformedResponse, "provider returned a bad image: " + report.summary());
        }
    }
    return images;
}

ProviderHandle make_provider(const ProviderConfig& config) {
    config.validate();
    if (config.kind == ProviderKind::Mock) {
        return std::make_shared<MockProvider>(config.mock_seed, config.max_in_flight);
    }
    const char* key = std::getenv(config.api_key_ref.c_str());
    if (!key || !*key) {
        fail(ErrorCode::ConfigError, "environment variable " + config.api_key_ref + " is not set");
    }
    ApiMapping mapping = config.mapping_file ? ApiMapping::load(*config.mapping_file) : ApiMapping{};
    return std::make_shared<RemoteProvider>(config, key, std::move(mapping));
}

Sleeper thread_sleeper() {
    return [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
}

double RetryPolicy::delay_cap(int retry) const {
    return std::min(max_delay_seconds, base_delay_seconds * std::ldexp(1.0, std::min(retry, 30)));
}

}  // namespace charforge
