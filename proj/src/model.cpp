#include "charforge/model.hpp"

#include "charforge/error.hpp"
#include "charforge/png.hpp"

#include <set>

namespace charforge {

using nlohmann::json;

std::string ValidationReport::summary() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v;
    }
    return out;
}

void ensure_valid(const ValidationReport& report, const std::string& what) {
    if (!report.ok()) {
        throw Error(ErrorCode::ValidationError, what + " is invalid: " + report.summary(),
                    json{{"violations", report.violations}});
    }
}

ValidationReport validate_spec(const CharacterSpec& spec) {
    ValidationReport report;
    if (trim(spec.role_details).empty() && trim(spec.background_story).empty()) {
        report.violations.emplace_back("role_details/background_story both empty");
    }
    if (trim(spec.game_type).empty()) {
        report.violations.emplace_back("game_type empty");
    }
    if (trim(spec.render_style).empty()) {
        report.violations.emplace_back("render_style empty");
    }
    const std::pair<const char*, const std::string*> fields[] = {
        {"name", &spec.name},
        {"role_details", &spec.role_details},
        {"background_story", &spec.background_story},
        {"game_type", &spec.game_type},
        {"render_style", &spec.render_style},
    };
    for (const auto& [label, value] : fields) {
        const auto length = utf8_length(trim(*value));
        if (length > kMaxSpecFieldLength) {
            report.violations.push_back(std::string(label) + ": field too long (" + std::to_string(length) +
                                        " > " + std::to_string(kMaxSpecFieldLength) + " characters)");
        }
    }
    return report;
}

ValidationReport validate_profile(const CharacterProfile& profile) {
    ValidationReport report;
    const std::pair<const char*, const std::string*> fields[] = {
        {"name", &profile.name},
        {"age", &profile.age},
        {"dressing_style", &profile.dressing_style},
        {"weapon", &profile.weapon},
        {"background_story", &profile.background_story},
    };
    for (const auto& [label, value] : fields) {
        if (trim(*value).empty()) {
            report.violations.push_back(std::string(label) + " empty");
        }
    }
    const auto words = word_count(profile.background_story);
    if (words > kMaxStoryWords) {
        report.violations.push_back("background_story exceeds " + std::to_string(kMaxStoryWords) +
                                    " words (" + std::to_string(words) + ")");
    }
    return report;
}

ValidationReport validate_keywords(const KeywordSet& set) {
    ValidationReport report;
    const auto n = set.keywords.size();
    if (n < kMinKeywords || n > kMaxKeywords) {
        report.violations.push_back("keyword count " + std::to_string(n) + " outside [" +
                                    std::to_string(kMinKeywords) + ", " + std::to_string(kMaxKeywords) + "]");
    }
    std::set<std::string> seen;
    for (const auto& k : set.keywords) {
        const auto words = word_count(k);
        if (words < 1 || words > kMaxKeywordWords) {
            report.violations.push_back("keyword '" + k + "' has " + std::to_string(words) + " words");
        }
        if (!seen.insert(to_lower(trim(k))).second) {
            report.violations.push_back("duplicate keyword '" + k + "'");
        }
    }
    return report;
}

ValidationReport validate_image_prompt(const ImagePrompt& prompt) {
    ValidationReport report;
    for (const auto& k : prompt.keywords.keywords) {
        if (!contains(prompt.assembled, k)) {
            report.violations.push_back("assembled prompt lacks keyword '" + k + "'");
        }
    }
    if (!contains(prompt.assembled, prompt.render_style)) {
        report.violations.emplace_back("assembled prompt lacks render_style");
    }
    if (!contains(prompt.assembled, prompt.role_details)) {
        report.violations.emplace_back("assembled prompt lacks role_details");
    }
    return report;
}

ValidationReport validate_image(const ReferenceImage& image) {
    ValidationReport report;
    if (image.image_id != sha256_hex(image.media)) {
        report.violations.emplace_back("image_id is not the digest of media");
    }
    if (!png::inspect(image.media)) {
        report.violations.emplace_back("media is not a decodable raster image");
    }
    return report;
}

ReferenceImage make_reference_image(Bytes media, std::string prompt_used, Timestamp created_at) {
    ReferenceImage image;
    image.image_id = sha256_hex(media);
    image.media = std::move(media);
    image.prompt_used = std::move(prompt_used);
    image.created_at = created_at;
    return image;
}

// Serialization

void to_json(json& j, const Timestamp& v) { j = format_timestamp(v); }

void from_json(const json& j, Timestamp& v) {
    try {
        v = parse_timestamp(j.get<std::string>());
    } catch (const Error& e) {
        throw Error(ErrorCode::SchemaMismatch, e.what());
    }
}

void to_json(json& j, const CharacterSpec& v) {
    j = json{{"name", v.name},
             {"role_details", v.role_details},
             {"background_story", v.background_story},
             {"game_type", v.game_type},
             {"render_style", v.render_style}};
}

void from_json(const json& j, CharacterSpec& v) {
    j.at("name").get_to(v.name);
    j.at("role_details").get_to(v.role_details);
    j.at("background_story").get_to(v.background_story);
    j.at("game_type").get_to(v.game_type);
    j.at("render_style").get_to(v.render_style);
}

void to_json(json& j, const ProfileSection& v) { j = json{{"heading", v.heading}, {"text", v.text}}; }

void from_json(const json& j, ProfileSection& v) {
    j.at("heading").get_to(v.heading);
    j.at("text").get_to(v.text);
}

void to_json(json& j, const CharacterProfile& v) {
    j = json{{"name", v.name},
             {"age", v.age},
             {"dressing_style", v.dressing_style},
             {"weapon", v.weapon},
             {"background_story", v.background_story},
             {"extra_sections", v.extra_sections}};
}

void from_json(const json& j, CharacterProfile& v) {
    j.at("name").get_to(v.name);
    j.at("age").get_to(v.age);
    j.at("dressing_style").get_to(v.dressing_style);
    j.at("weapon").get_to(v.weapon);
    j.at("background_story").get_to(v.background_story);
    j.at("extra_sections").get_to(v.extra_sections);
}

void to_json(json& j, const KeywordSet& v) { j = v.keywords; }

void from_json(const json& j, KeywordSet& v) { j.get_to(v.keywords); }

void to_json(json& j, const ImagePrompt& v) {
    j = json{{"keywords", v.keywords},
             {"render_style", v.render_style},
             {"role_details", v.role_details},
             {"assembled", v.assembled}};
}

void from_json(const json& j, ImagePrompt& v) {
    j.at("keywords").get_to(v.keywords);
    j.at("render_style").get_to(v.render_style);
    j.at("role_details").get_to(v.role_details);
    j.at("assembled").get_to(v.assembled);
}

void to_json(json& j, const ReferenceImage& v) {
    j = json{{"image_id", v.image_id},
             {"media", base64_encode(v.media)},
             {"prompt_used", v.prompt_used},
             {"created_at", v.created_at}};
}

void from_json(const json& j, ReferenceImage& v) {
    j.at("image_id").get_to(v.image_id);
    try {
        v.media = base64_decode(j.at("media").get<std::string>());
    } catch (const Error& e) {
        throw Error(ErrorCode::SchemaMismatch, e.what());
    }
    j.at("prompt_used").get_to(v.prompt_used);
    j.at("created_at").get_to(v.created_at);
}

void to_json(json& j, const IdCardDocument& v) {
    j = json{{"schema", kSchemaVersion},
             {"character_id", v.character_id},
             {"profile", v.profile},
             {"selected_image", v.selected_image},
             {"keywords", v.keywords},
             {"issued_at", v.issued_at}};
}

void from_json(const json& j, IdCardDocument& v) {
    check_schema(j);
    j.at("character_id").get_to(v.character_id);
    j.at("profile").get_to(v.profile);
    j.at("selected_image").get_to(v.selected_image);
    j.at("keywords").get_to(v.keywords);
    j.at("issued_at").get_to(v.issued_at);
}

namespace {

template <typename T>
json optional_to_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const json& j, const char* key) {
    const auto& node = j.at(key);
    if (node.is_null()) return std::nullopt;
    return node.get<T>();
}

}  // namespace

void to_json(json& j, const CharacterRecord& v) {
    j = json{{"schema", kSchemaVersion},
             {"character_id", v.character_id},
             {"session_id", v.session_id},
             {"spec", v.spec},
             {"profile", optional_to_json(v.profile)},
             {"keywords", optional_to_json(v.keywords)},
             {"selected_image_id", optional_to_json(v.selected_image_id)},
             {"updated_at", v.updated_at}};
}

void from_json(const json& j, CharacterRecord& v) {
    check_schema(j);
    j.at("character_id").get_to(v.character_id);
    j.at("session_id").get_to(v.session_id);
    j.at("spec").get_to(v.spec);
    v.profile = optional_from_json<CharacterProfile>(j, "profile");
    v.keywords = optional_from_json<KeywordSet>(j, "keywords");
    v.selected_image_id = optional_from_json<std::string>(j, "selected_image_id");
    j.at("updated_at").get_to(v.updated_at);
}

std::string canonical_dump(const json& j) {
    return j.dump(2, ' ', false, json::error_handler_t::strict) + "\n";
}

json parse_document(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, std::string("malformed JSON document: ") + e.what());
    }
}

void check_schema(const json& j) {
    if (!j.is_object() || !j.contains("schema") || !j.at("schema").is_number_integer() ||
        j.at("schema").get<int>() != kSchemaVersion) {
        const std::string found = j.is_object() && j.contains("schema") ? j.at("schema").dump() : "none";
        throw Error(ErrorCode::SchemaMismatch,
                    "unsupported schema version " + found + " (expected " + std::to_string(kSchemaVersion) + ")");
    }
}

}  // namespace charforge
