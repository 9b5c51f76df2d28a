#include "charforge/util.hpp"

#include "charforge/error.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <memory>
#include <random>

namespace charforge {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::PreconditionViolation: return "PreconditionViolation";
        case ErrorCode::BadRequest: return "BadRequest";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::TemplateError: return "TemplateError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::ContentRefused: return "ContentRefused";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::ParseFailed: return "ParseFailed";
        case ErrorCode::UnknownPath: return "UnknownPath";
        case ErrorCode::TypeMismatch: return "TypeMismatch";
        case ErrorCode::UpstreamStale: return "UpstreamStale";
        case ErrorCode::UnknownImage: return "UnknownImage";
        case ErrorCode::StaleImages: return "StaleImages";
        case ErrorCode::ConflictError: return "ConflictError";
        case ErrorCode::SelfLoop: return "SelfLoop";
        case ErrorCode::UnknownNode: return "UnknownNode";
        case ErrorCode::UnknownEdge: return "UnknownEdge";
        case ErrorCode::BadLabel: return "BadLabel";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::CorruptEntity: return "CorruptEntity";
        case ErrorCode::Incomplete: return "Incomplete";
        case ErrorCode::MissingBlob: return "MissingBlob";
        case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    }
    return "Unknown";
}

bool is_transient(ErrorCode code) noexcept {
    return code == ErrorCode::Timeout || code == ErrorCode::RateLimited ||
           code == ErrorCode::ProviderUnavailable;
}

std::array<std::uint8_t, 32> sha256_raw(std::string_view data) {
    std::array<std::uint8_t, 32> out{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out.data());
    return out;
}

namespace {

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> data) {
    std::array<std::uint8_t, 32> out{};
    SHA256(data.data(), data.size(), out.data());
    return to_hex(out);
}

std::string sha256_hex(std::string_view data) {
    return to_hex(sha256_raw(data));
}

std::string base64_encode(std::span<const std::uint8_t> data) {
    if (data.empty()) {
        return {};
    }
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                        static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(written));
    return out;
}

Bytes base64_decode(std::string_view text) {
    std::string clean;
    clean.reserve(text.size());
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            clean.push_back(c);
        }
    }
    if (clean.empty()) {
        return {};
    }
    if (clean.size() % 4 != 0) {
        fail(ErrorCode::BadRequest, "base64 input length is not a multiple of 4");
    }
    Bytes out(3 * clean.size() / 4);
    const int written = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                        static_cast<int>(clean.size()));
    if (written < 0) {
        fail(ErrorCode::BadRequest, "malformed base64 input");
    }
    // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
    std::size_t padding = 0;
    if (clean.back() == '=') ++padding;
    if (clean.size() >= 2 && clean[clean.size() - 2] == '=') ++padding;
    out.resize(static_cast<std::size_t>(written) - padding);
    return out;
}

std::string format_timestamp(Timestamp t) {
    const std::int64_t ms = ((t.unix_ms % 1000) + 1000) % 1000;
    const std::time_t secs = static_cast<std::time_t>((t.unix_ms - ms) / 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    int year = 0, mon = 0, day = 0, hour = 0, min = 0, sec = 0, ms = 0;
    char tail = 0;
    const std::string copy(text);
    if (copy.size() != 24 ||
        std::sscanf(copy.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3d%c", &year, &mon, &day, &hour, &min,
                    &sec, &ms, &tail) != 8 ||
        tail != 'Z') {
        fail(ErrorCode::BadRequest, "malformed timestamp '" + copy + "'");
    }
    std::tm tm{};
    tm.tm_year = year - 1900;
    tm.tm_mon = mon - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = min;
    tm.tm_sec = sec;
    const std::time_t secs = timegm(&tm);
    return Timestamp{static_cast<std::int64_t>(secs) * 1000 + ms};
}

Clock system_clock() {
    return [] {
        using namespace std::chrono;
        return Timestamp{duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
    };
}

Clock stepping_clock(Timestamp start, std::int64_t step_ms) {
    auto next = std::make_shared<std::atomic<std::int64_t>>(start.unix_ms);
    return [next, step_ms] { return Timestamp{next->fetch_add(step_ms)}; };
}

std::string trim(std::string_view text) {
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
    while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
    return std::string(text);
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) {
            words.emplace_back(text.substr(start, i - start));
        }
    }
    return words;
}

std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

std::size_t utf8_length(std::string_view text) {
    return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

bool contains(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

std::string random_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::array<std::uint8_t, 16> bytes{};
    for (auto& b : bytes) {
        b = static_cast<std::uint8_t>(rng());
    }
    return to_hex(bytes);
}

}  // namespace charforge
