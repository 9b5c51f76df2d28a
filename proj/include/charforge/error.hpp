#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace charforge {

/// Every failure the library can raise. The HTTP layer maps each code to a
/// unique (status, code) pair, so adding a value here requires a mapping entry.
enum class ErrorCode {
    PreconditionViolation,
    BadRequest,
    ValidationError,
    TemplateError,
    ConfigError,
    Timeout,
    RateLimited,
    MalformedResponse,
    ContentRefused,
    ProviderUnavailable,
    ParseFailed,
    UnknownPath,
    TypeMismatch,
    UpstreamStale,
    UnknownImage,
    StaleImages,
    ConflictError,
    SelfLoop,
    UnknownNode,
    UnknownEdge,
    BadLabel,
    NotFound,
    CorruptEntity,
    Incomplete,
    MissingBlob,
    SchemaMismatch,
};

inline constexpr std::array kAllErrorCodes = {
    ErrorCode::PreconditionViolation, ErrorCode::BadRequest,     ErrorCode::ValidationError,
    ErrorCode::TemplateError,         ErrorCode::ConfigError,    ErrorCode::Timeout,
    ErrorCode::RateLimited,           ErrorCode::MalformedResponse, ErrorCode::ContentRefused,
    ErrorCode::ProviderUnavailable,   ErrorCode::ParseFailed,    ErrorCode::UnknownPath,
    ErrorCode::TypeMismatch,          ErrorCode::UpstreamStale,  ErrorCode::UnknownImage,
    ErrorCode::StaleImages,           ErrorCode::ConflictError,  ErrorCode::SelfLoop,
    ErrorCode::UnknownNode,           ErrorCode::UnknownEdge,    ErrorCode::BadLabel,
    ErrorCode::NotFound,              ErrorCode::CorruptEntity,  ErrorCode::Incomplete,
    ErrorCode::MissingBlob,           ErrorCode::SchemaMismatch,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Provider failures that are worth another attempt.
bool is_transient(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json details = nullptr)
        : std::runtime_error(message), code_(code), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    nlohmann::json details_;
};

/// A pipeline layer failed; code() is the underlying cause, layer() names where.
class PipelineError : public Error {
public:
    PipelineError(std::string layer, ErrorCode cause, const std::string& message,
                  nlohmann::json details = nullptr)
        : Error(cause, "layer '" + layer + "' failed: " + message, std::move(details)),
          layer_(std::move(layer)) {}

    const std::string& layer() const noexcept { return layer_; }

private:
    std::string layer_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message,
                              nlohmann::json details = nullptr) {
    throw Error(code, message, std::move(details));
}

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        fail(ErrorCode::PreconditionViolation, message);
    }
}

}  // namespace charforge
