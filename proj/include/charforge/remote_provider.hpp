#pragma once

#include "charforge/provider.hpp"

#include <mutex>

namespace charforge {

/// Where request fields go and where response fields are read from. Defaults
/// follow the common chat-completion and image-generation REST shapes; any
/// subset can be overridden from a JSON file with the same keys.
struct ApiMapping {
    std::string chat_path = "/chat/completions";
    std::string images_path = "/images/generations";
    std::string model_field = "model";
    std::string messages_field = "messages";
    std::string max_tokens_field = "max_tokens";
    std::string temperature_field = "temperature";
    std::string content_pointer = "/choices/0/message/content";
    std::string prompt_tokens_pointer = "/usage/prompt_tokens";
    std::string completion_tokens_pointer = "/usage/completion_tokens";
    std::string prompt_field = "prompt";
    std::string count_field = "n";
    std::string size_field = "size";
    std::string response_format_field = "response_format";
    std::string response_format_value = "b64_json";
    std::string images_pointer = "/data";
    std::string image_b64_field = "b64_json";

    static ApiMapping load(const std::filesystem::path& file);
};

void to_json(nlohmann::json& j, const ApiMapping& m);
void from_json(const nlohmann::json& j, ApiMapping& m);

/// HTTP backend. Transient failures (timeouts, 429, 5xx, connection errors)
/// are retried per RetryPolicy; a 400 mentioning a content policy becomes
/// ContentRefused; unparseable bodies become MalformedResponse.
class RemoteProvider final : public Provider {
public:
    RemoteProvider(ProviderConfig config, std::string api_key, ApiMapping mapping = {},
                   Sleeper sleeper = thread_sleeper());

    ProviderKind kind() const noexcept override { return ProviderKind::Remote; }

protected:
    TextResult do_complete_text(const ChatRequest& request) override;
    std::vector<ReferenceImage> do_generate_images(const ImageRequest& request) override;

private:
    nlohmann::json post_json(const std::string& path, const nlohmann::json& body);
    nlohmann::json post_with_retries(const std::string& path, const nlohmann::json& body);

    ProviderConfig config_;
    std::string api_key_;
    ApiMapping mapping_;
    Sleeper sleeper_;
    std::string origin_;
    std::string path_prefix_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

}  // namespace charforge
