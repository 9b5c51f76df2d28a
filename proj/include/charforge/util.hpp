#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace charforge {

using Bytes = std::vector<std::uint8_t>;

// Hashing and encoding

/// Lowercase hex SHA-256 of the input.
std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);

/// Raw 32-byte SHA-256 digest.
std::array<std::uint8_t, 32> sha256_raw(std::string_view data);

std::string base64_encode(std::span<const std::uint8_t> data);
/// Throws Error{BadRequest} on malformed input.
Bytes base64_decode(std::string_view text);

// Time

/// Milliseconds since the Unix epoch, UTC.
struct Timestamp {
    std::int64_t unix_ms = 0;
    auto operator<=>(const Timestamp&) const = default;
};

/// "2024-01-01T00:00:00.000Z"
std::string format_timestamp(Timestamp t);
/// Inverse of format_timestamp; throws Error{BadRequest} on any other shape.
Timestamp parse_timestamp(std::string_view text);

using Clock = std::function<Timestamp()>;
Clock system_clock();
/// Returns start, start+step, start+2*step, ... on successive calls.
Clock stepping_clock(Timestamp start, std::int64_t step_ms = 1000);

// Text

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
/// Number of maximal whitespace-delimited tokens.
std::size_t word_count(std::string_view text);
std::vector<std::string> split_words(std::string_view text);
/// Length in Unicode code points (UTF-8 continuation bytes are not counted).
std::size_t utf8_length(std::string_view text);
bool iequals(std::string_view a, std::string_view b);
bool contains(std::string_view haystack, std::string_view needle);

/// Lowercase hex of 16 random bytes.
std::string random_id();

}  // namespace charforge
