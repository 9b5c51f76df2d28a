#pragma once

#include "charforge/model.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <vector>

namespace charforge {

enum class ProviderKind { Remote, Mock };

std::string_view provider_kind_name(ProviderKind kind) noexcept;

/// Environment variables consulted by ProviderConfig::from_env.
inline constexpr const char* kEnvApiBase = "CHARFORGE_API_BASE";
inline constexpr const char* kEnvApiKey = "CHARFORGE_API_KEY";
inline constexpr const char* kEnvTextModel = "CHARFORGE_TEXT_MODEL";
inline constexpr const char* kEnvImageModel = "CHARFORGE_IMAGE_MODEL";

struct ProviderConfig {
    ProviderKind kind = ProviderKind::Mock;
    std::string base_url;
    /// Name of the environment variable holding the API key, never the key itself.
    std::string api_key_ref = kEnvApiKey;
    std::string text_model = "gpt-3.5-turbo";
    std::string image_model = "dall-e-2";
    double timeout_seconds = 60.0;
    int max_retries = 3;
    std::uint64_t mock_seed = 0;
    int max_in_flight = 4;
    /// Optional JSON file overriding request/response field names (remote only).
    std::optional<std::filesystem::path> mapping_file;

    /// Throws Error{ConfigError} when an invariant does not hold.
    void validate() const;

    /// Remote when CHARFORGE_API_BASE and CHARFORGE_API_KEY are set, mock otherwise.
    static ProviderConfig from_env();
};

enum class Role { System, User, Assistant };

std::string_view role_name(Role role) noexcept;

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    int max_tokens = 700;
    double temperature = 0.7;

    /// Throws Error{PreconditionViolation} describing the first broken rule.
    void validate() const;
};

struct TokenUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct TextResult {
    std::string content;
    TokenUsage usage;
};

struct ImageSize {
    std::uint32_t width = 512;
    std::uint32_t height = 512;

    bool operator==(const ImageSize&) const = default;
};

struct ImageRequest {
    std::string prompt;
    int count = kReferenceImageCount;
    ImageSize size;

    void validate() const;
};

/// A text and image generation backend. Public calls validate the request,
/// hold one of the handle's in-flight slots, then check the response contract
/// before returning. Implementations override the do_* hooks.
class Provider {
public:
    virtual ~Provider() = default;
    Provider(const Provider&) = delete;
    Provider& operator=(const Provider&) = delete;

    TextResult complete_text(const ChatRequest& request);
    std::vector<ReferenceImage> generate_images(const ImageRequest& request);

    virtual ProviderKind kind() const noexcept = 0;

protected:
    explicit Provider(int max_in_flight = 4);

    virtual TextResult do_complete_text(const ChatRequest& request) = 0;
    virtual std::vector<ReferenceImage> do_generate_images(const ImageRequest& request) = 0;

private:
    std::counting_semaphore<256> slots_;
};

using ProviderHandle = std::shared_ptr<Provider>;

/// Throws Error{ConfigError} for invalid configs or a missing API key variable.
ProviderHandle make_provider(const ProviderConfig& config);

// Retries

using Sleeper = std::function<void(std::chrono::duration<double>)>;

Sleeper thread_sleeper();

struct RetryPolicy {
    int max_retries = 3;
    double base_delay_seconds = 0.5;
    double max_delay_seconds = 8.0;

    /// Upper bound of the jitter window before retry number `retry` (0-based):
    /// 0.5, 1, 2, 4, 8, 8, ... seconds.
    double delay_cap(int retry) const;
};

/// Calls fn until it succeeds, a non-transient error escapes, or max_retries
/// retries have been spent. Each wait is uniform in [0, delay_cap(retry)].
template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn, const Sleeper& sleep, std::mt19937_64& rng)
    -> decltype(fn()) {
    for (int retry = 0;; ++retry) {
        try {
            return fn();
        } catch (const Error& e) {
            if (!is_transient(e.code()) || retry >= policy.max_retries) {
                throw;
            }
        }
        std::uniform_real_distribution<double> jitter(0.0, policy.delay_cap(retry));
        sleep(std::chrono::duration<double>(jitter(rng)));
    }
}

}  // namespace charforge
