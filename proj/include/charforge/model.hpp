#pragma once

// Domain types shared by every module, their validation rules, and the
// canonical JSON form (sorted keys, two-space indent, UTF-8).

#include "charforge/error.hpp"
#include "charforge/util.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace charforge {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kMaxSpecFieldLength = 2000;
inline constexpr std::size_t kMaxStoryWords = 150;
inline constexpr std::size_t kMinKeywords = 5;
inline constexpr std::size_t kMaxKeywords = 10;
inline constexpr std::size_t kMaxKeywordWords = 5;
inline constexpr int kReferenceImageCount = 5;

/// The designer's raw inputs. An empty name asks the generator to invent one.
struct CharacterSpec {
    std::string name;
    std::string role_details;
    std::string background_story;
    std::string game_type;
    std::string render_style;

    bool operator==(const CharacterSpec&) const = default;
};

struct ProfileSection {
    std::string heading;
    std::string text;

    bool operator==(const ProfileSection&) const = default;
};

/// Structured summary produced from a CharacterSpec. Sections beyond the five
/// core fields are kept, in source order, in extra_sections.
struct CharacterProfile {
    std::string name;
    std::string age;
    std::string dressing_style;
    std::string weapon;
    std::string background_story;
    std::vector<ProfileSection> extra_sections;

    bool operator==(const CharacterProfile&) const = default;
};

struct KeywordSet {
    std::vector<std::string> keywords;

    bool operator==(const KeywordSet&) const = default;
};

struct ImagePrompt {
    KeywordSet keywords;
    std::string render_style;
    std::string role_details;
    std::string assembled;

    bool operator==(const ImagePrompt&) const = default;
};

/// image_id is always sha256_hex(media).
struct ReferenceImage {
    std::string image_id;
    Bytes media;
    std::string prompt_used;
    Timestamp created_at;

    bool operator==(const ReferenceImage&) const = default;
};

struct IdCardDocument {
    std::string character_id;
    CharacterProfile profile;
    ReferenceImage selected_image;
    KeywordSet keywords;
    Timestamp issued_at;

    bool operator==(const IdCardDocument&) const = default;
};

/// Persisted summary of a character; one `.char.json` per character.
struct CharacterRecord {
    std::string character_id;
    std::string session_id;
    CharacterSpec spec;
    std::optional<CharacterProfile> profile;
    std::optional<KeywordSet> keywords;
    std::optional<std::string> selected_image_id;
    Timestamp updated_at;

    bool operator==(const CharacterRecord&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
    /// Violations joined with "; ".
    std::string summary() const;
};

ValidationReport validate_spec(const CharacterSpec& spec);
ValidationReport validate_profile(const CharacterProfile& profile);
ValidationReport validate_keywords(const KeywordSet& keywords);
ValidationReport validate_image_prompt(const ImagePrompt& prompt);
/// Checks the digest and that the media decodes as a raster image.
ValidationReport validate_image(const ReferenceImage& image);

/// Throws Error{ValidationError} carrying the report when it is not ok.
void ensure_valid(const ValidationReport& report, const std::string& what);

ReferenceImage make_reference_image(Bytes media, std::string prompt_used, Timestamp created_at);

// Canonical serialization

void to_json(nlohmann::json& j, const CharacterSpec& v);
void from_json(const nlohmann::json& j, CharacterSpec& v);
void to_json(nlohmann::json& j, const ProfileSection& v);
void from_json(const nlohmann::json& j, ProfileSection& v);
void to_json(nlohmann::json& j, const CharacterProfile& v);
void from_json(const nlohmann::json& j, CharacterProfile& v);
void to_json(nlohmann::json& j, const KeywordSet& v);
void from_json(const nlohmann::json& j, KeywordSet& v);
void to_json(nlohmann::json& j, const ImagePrompt& v);
void from_json(const nlohmann::json& j, ImagePrompt& v);
void to_json(nlohmann::json& j, const ReferenceImage& v);
void from_json(const nlohmann::json& j, ReferenceImage& v);
void to_json(nlohmann::json& j, const IdCardDocument& v);
void from_json(const nlohmann::json& j, IdCardDocument& v);
void to_json(nlohmann::json& j, const CharacterRecord& v);
void from_json(const nlohmann::json& j, CharacterRecord& v);
void to_json(nlohmann::json& j, const Timestamp& v);
void from_json(const nlohmann::json& j, Timestamp& v);

/// Canonical text form: sorted keys, 2-space indent, trailing newline.
std::string canonical_dump(const nlohmann::json& j);

template <typename T>
std::string encode(const T& value) {
    return canonical_dump(nlohmann::json(value));
}

/// Parses text and converts it; any parse or shape failure becomes Error{SchemaMismatch}.
nlohmann::json parse_document(std::string_view text);

template <typename T>
T decode(std::string_view text) {
    try {
        return parse_document(text).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, std::string("document does not match schema: ") + e.what());
    }
}

/// Throws Error{SchemaMismatch} unless j["schema"] == kSchemaVersion.
void check_schema(const nlohmann::json& j);

}  // namespace charforge
