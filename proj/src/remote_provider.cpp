#include "charforge/remote_provider.hpp"

#include <httplib.h>

#include <fstream>
#include <sstream>

namespace charforge {

using nlohmann::json;

void to_json(json& j, const ApiMapping& m) {
    j = json{{"chat_path", m.chat_path},
             {"images_path", m.images_path},
             {"model_field", m.model_field},
             {"messages_field", m.messages_field},
             {"max_tokens_field", m.max_tokens_field},
             {"temperature_field", m.temperature_field},
             {"content_pointer", m.content_pointer},
             {"prompt_tokens_pointer", m.prompt_tokens_pointer},
             {"completion_tokens_pointer", m.completion_tokens_pointer},
             {"prompt_field", m.prompt_field},
             {"count_field", m.count_field},
             {"size_field", m.size_field},
             {"response_format_field", m.response_format_field},
             {"response_format_value", m.response_format_value},
             {"images_pointer", m.images_pointer},
             {"image_b64_field", m.image_b64_field}};
}

void from_json(const json& j, ApiMapping& m) {
    // Every key is optional; absent keys keep their defaults.
    json current = m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!current.contains(it.key())) {
            throw Error(ErrorCode::ConfigError, "unknown mapping key '" + it.key() + "'");
        }
        current[it.key()] = it.value().get<std::string>();
    }
    m.chat_path = current["chat_path"];
    m.images_path = current["images_path"];
    m.model_field = current["model_field"];
    m.messages_field = current["messages_field"];
    m.max_tokens_field = current["max_tokens_field"];
    m.temperature_field = current["temperature_field"];
    m.content_pointer = current["content_pointer"];
    m.prompt_tokens_pointer = current["prompt_tokens_pointer"];
    m.completion_tokens_pointer = current["completion_tokens_pointer"];
    m.prompt_field = current["prompt_field"];
    m.count_field = current["count_field"];
    m.size_field = current["size_field"];
    m.response_format_field = current["response_format_field"];
    m.response_format_value = current["response_format_value"];
    m.images_pointer = current["images_pointer"];
    m.image_b64_field = current["image_b64_field"];
}

ApiMapping ApiMapping::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        fail(ErrorCode::ConfigError, "cannot read mapping file " + file.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str()).get<ApiMapping>();
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, "bad mapping file " + file.string() + ": " + e.what());
    }
}

namespace {

void split_base_url(const std::string& base, std::string& origin, std::string& prefix) {
    const auto scheme_end = base.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto slash = base.find('/', host_start);
    if (slash == std::string::npos) {
        origin = base;
        prefix.clear();
    } else {
        origin = base.substr(0, slash);
        prefix = base.substr(slash);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }
}

const json& at_pointer(const json& doc, const std::string& pointer) {
    try {
        return doc.at(json::json_pointer(pointer));
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedResponse, "response lacks " + pointer + ": " + e.what());
    }
}

}  // namespace

RemoteProvider::RemoteProvider(ProviderConfig config, std::string api_key, ApiMapping mapping, Sleeper sleeper)
    : Provider(config.max_in_flight),
      config_(std::move(config)),
      api_key_(std::move(api_key)),
      mapping_(std::move(mapping)),
      sleeper_(std::move(sleeper)),
      rng_(std::random_device{}()) {
    config_.validate();
    split_base_url(config_.base_url, origin_, path_prefix_);
}

json RemoteProvider::post_json(const std::string& path, const json& body) {
    httplib::Client client(origin_);
    const auto secs = static_cast<time_t>(config_.timeout_seconds);
    const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    client.set_bearer_token_auth(api_key_);

    auto res = client.Post(path_prefix_ + path, body.dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::Write ||
            err == httplib::Error::ConnectionTimeout) {
            fail(ErrorCode::Timeout, "provider request timed out (" + httplib::to_string(err) + ")");
        }
        fail(ErrorCode::ProviderUnavailable, "provider unreachable (" + httplib::to_string(err) + ")");
    }
    if (res->status == 429) {
        fail(ErrorCode::RateLimited, "provider rate limit hit");
    }
    if (res->status == 408 || res->status == 504) {
        fail(ErrorCode::Timeout, "provider timed out (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status >= 500) {
        fail(ErrorCode::ProviderUnavailable, "provider error HTTP " + std::to_string(res->status));
    }
    if (res->status >= 400) {
        const auto lowered = to_lower(res->body);
        if (contains(lowered, "content_policy") || contains(lowered, "safety") || contains(lowered, "refus")) {
            fail(ErrorCode::ContentRefused, "provider refused the prompt: " + res->body.substr(0, 300));
        }
        fail(ErrorCode::MalformedResponse,
             "provider rejected the request with HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
    }
    try {
        return json::parse(res->body);
    } catch (const json::exception&) {
        fail(ErrorCode::MalformedResponse, "provider returned a non-JSON body");
    }
}

json RemoteProvider::post_with_retries(const std::string& path, const json& body) {
    RetryPolicy policy;
    policy.max_retries = config_.max_retries;
    std::mt19937_64 rng;
    {
        std::lock_guard lock(rng_mutex_);
        rng.seed(rng_());
    }
    return with_retries(policy, [&] { return post_json(path, body); }, sleeper_, rng);
}

TextResult RemoteProvider::do_complete_text(const ChatRequest& request) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    }
    json body{{mapping_.model_field, config_.text_model},
              {mapping_.messages_field, std::move(messages)},
              {mapping_.max_tokens_field, request.max_tokens},
              {mapping_.temperature_field, request.temperature}};
    const json response = post_with_retries(mapping_.chat_path, body);

    TextResult result;
    const auto& content = at_pointer(response, mapping_.content_pointer);
    if (!content.is_string()) {
        fail(ErrorCode::MalformedResponse, "response content is not text");
    }
    result.content = content.get<std::string>();
    const auto prompt_ptr = json::json_pointer(mapping_.prompt_tokens_pointer);
    const auto completion_ptr = json::json_pointer(mapping_.completion_tokens_pointer);
    if (response.contains(prompt_ptr) && response.at(prompt_ptr).is_number_integer()) {
        result.usage.prompt_tokens = response.at(prompt_ptr).get<int>();
    }
    if (response.contains(completion_ptr) && response.at(completion_ptr).is_number_integer()) {
        result.usage.completion_tokens = response.at(completion_ptr).get<int>();
    }
    return result;
}

std::vector<ReferenceImage> RemoteProvider::do_generate_images(const ImageRequest& request) {
    json body{{mapping_.model_field, config_.image_model},
              {mapping_.prompt_field, request.prompt},
              {mapping_.count_field, request.count},
              {mapping_.size_field, std::to_string(request.size.width) + "x" + std::to_string(request.size.height)},
              {mapping_.response_format_field, mapping_.response_format_value}};
    const json response = post_with_retries(mapping_.images_path, body);
    const auto& data = at_pointer(response, mapping_.images_pointer);
    if (!data.is_array()) {
        fail(ErrorCode::MalformedResponse, "image response data is not an array");
    }
    std::vector<ReferenceImage> images;
    for (const auto& item : data) {
        if (!item.is_object() || !item.contains(mapping_.image_b64_field) ||
            !item.at(mapping_.image_b64_field).is_string()) {
            fail(ErrorCode::MalformedResponse, "image entry lacks " + mapping_.image_b64_field);
        }
        Bytes media;
        try {
            media = base64_decode(item.at(mapping_.image_b64_field).get<std::string>());
        } catch (const Error& e) {
            fail(ErrorCode::MalformedResponse, std::string("image payload: ") + e.what());
        }
        images.push_back(make_reference_image(std::move(media), request.prompt, system_clock()()));
    }
    return images;
}

}  // namespace charforge
