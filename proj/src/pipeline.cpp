#include "charforge/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace charforge {

using nlohmann::json;

std::string_view parse_error_kind_name(ParseError::Kind kind) noexcept {
    switch (kind) {
        case ParseError::Kind::MissingFields: return "missing_fields";
        case ParseError::Kind::OverWordLimit: return "over_word_limit";
        case ParseError::Kind::EmptyField: return "empty_field";
    }
    return "missing_fields";
}

std::string_view parse_status_name(ParseOutcome::Status status) noexcept {
    switch (status) {
        case ParseOutcome::Status::Ok: return "ok";
        case ParseOutcome::Status::Repaired: return "repaired";
        case ParseOutcome::Status::Failed: return "failed";
    }
    return "failed";
}

namespace {

std::map<std::string, std::string> spec_values(const CharacterSpec& spec) {
    const auto name = trim(spec.name);
    return {
        {"name", name.empty() ? std::string(kInventNameHint) : name},
        {"role_details", trim(spec.role_details).empty() ? "(none given)" : trim(spec.role_details)},
        {"background_story", trim(spec.background_story).empty() ? "(none given)" : trim(spec.background_story)},
        {"game_type", trim(spec.game_type)},
        {"render_style", trim(spec.render_style)},
    };
}

std::map<std::string, std::string> profile_values(const CharacterProfile& p) {
    return {
        {"name", p.name},
        {"age", p.age},
        {"dressing_style", p.dressing_style},
        {"weapon", p.weapon},
        {"background_story", p.background_story},
    };
}

ChatRequest request_from(const PromptTemplate& tmpl, const std::map<std::string, std::string>& values,
                         const std::vector<std::string>& directives) {
    ChatRequest request;
    if (const auto system = render(tmpl.system, values); !trim(system).empty()) {
        request.messages.push_back({Role::System, system});
    }
    std::string user = render(tmpl.body, values);
    for (const auto& d : directives) {
        user += "\n\n" + d;
    }
    request.messages.push_back({Role::User, std::move(user)});
    return request;
}

// Profile section labels

enum class Field { Name, Age, Dressing, Weapon, Story, Other };

std::string normalize_label(std::string_view label) {
    std::string out;
    for (char c : label) {
        if (c == '_' || c == '-') c = ' ';
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return trim(out);
}

Field classify(std::string_view label) {
    const auto n = normalize_label(label);
    if (n == "name" || n == "character name") return Field::Name;
    if (n == "age") return Field::Age;
    if (n == "dressing style" || n == "dress style" || n == "dressing" || n == "outfit" || n == "attire")
        return Field::Dressing;
    if (n == "weapon" || n == "weapons") return Field::Weapon;
    if (n == "background story" || n == "background" || n == "backstory" || n == "story") return Field::Story;
    return Field::Other;
}

/// Recognises "Label: text", "**Label:** text", "- Label: text", "## Label: text".
std::optional<std::pair<std::string, std::string>> split_label_line(std::string_view line) {
    std::string_view s = line;
    auto skip = [&](std::string_view chars) {
        while (!s.empty() && (chars.find(s.front()) != std::string_view::npos ||
                              std::isspace(static_cast<unsigned char>(s.front())))) {
            s.remove_prefix(1);
        }
    };
    skip("-*#>");
    const auto colon = s.find(':');
    if (colon == std::string_view::npos || colon == 0) return std::nullopt;
    std::string label(s.substr(0, colon));
    std::string_view rest = s.substr(colon + 1);
    label.erase(std::remove(label.begin(), label.end(), '*'), label.end());
    label = trim(label);
    if (label.empty() || word_count(label) > 3) return std::nullopt;
    if (!std::isalpha(static_cast<unsigned char>(label.front()))) return std::nullopt;
    for (char c : label) {
        if (!std::isalpha(static_cast<unsigned char>(c)) && c != ' ' && c != '_' && c != '-' && c != '\'') {
            return std::nullopt;
        }
    }
    while (!rest.empty() && (rest.front() == '*' || std::isspace(static_cast<unsigned char>(rest.front())))) {
        rest.remove_prefix(1);
    }
    return std::make_pair(label, std::string(rest));
}

struct Sections {
    std::vector<std::pair<std::string, std::string>> ordered;
};

Sections sections_from_text(std::string_view raw) {
    Sections out;
    std::istringstream in{std::string(raw)};
    std::string line;
    bool open = false;
    while (std::getline(in, line)) {
        if (auto labeled = split_label_line(line)) {
            out.ordered.push_back(std::move(*labeled));
            open = true;
        } else if (open) {
            auto& text = out.ordered.back().second;
            const auto t = trim(line);
            if (t.empty()) {
                if (!text.empty()) text += "\n";
            } else {
                if (!text.empty() && text.back() != '\n') text += "\n";
                text += t;
            }
        }
    }
    for (auto& [label, text] : out.ordered) text = trim(text);
    return out;
}

std::optional<Sections> sections_from_json(std::string_view raw) {
    std::string body = trim(raw);
    if (body.rfind("```", 0) == 0) {
        const auto first_nl = body.find('\n');
        const auto fence = body.rfind("```");
        if (first_nl == std::string::npos || fence <= first_nl) return std::nullopt;
        body = trim(body.substr(first_nl + 1, fence - first_nl - 1));
    }
    if (body.empty() || body.front() != '{') return std::nullopt;
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(body);
    } catch (const nlohmann::ordered_json::exception&) {
        return std::nullopt;
    }
    if (!doc.is_object()) return std::nullopt;
    Sections out;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        out.ordered.emplace_back(it.key(), it.value().is_string() ? it.value().get<std::string>() : it.value().dump());
    }
    return out;
}

std::string join_fields(const std::vector<std::string>& fields) {
    std::string out;
    for (const auto& f : fields) {
        if (!out.empty()) out += ", ";
        out += f;
    }
    return out;
}

std::string repair_message(const ParseError& error) {
    return "Your previous answer could not be used: " + error.message +
           ". Reply again with all five labeled sections (Name, Age, Dressing style, Weapon, Background story), "
           "each non-empty, and keep the background story no more than 150 words.";
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",   "the", "and",  "or",    "of",    "with", "in",   "on",  "at",   "to",
        "for",  "from", "by",  "his",  "her",   "their", "its",  "over", "under", "into", "is",
        "was",  "who",  "that", "this", "as",   "but",   "they", "he",   "she", "it",   "has",
    };
    return words;
}

std::string strip_decoration(std::string token) {
    token = trim(token);
    // Leading bullets and enumerations: "-", "*", "•", "1.", "2)".
    while (!token.empty()) {
        if (token.front() == '-' || token.front() == '*' || token.front() == '#') {
            token = trim(token.substr(1));
        } else if (token.rfind("\xE2\x80\xA2", 0) == 0) {
            token = trim(token.substr(3));
        } else if (std::isdigit(static_cast<unsigned char>(token.front()))) {
            std::size_t i = 0;
            while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) ++i;
            if (i < token.size() && (token[i] == '.' || token[i] == ')')) {
                token = trim(token.substr(i + 1));
            } else {
                break;
            }
        } else {
            break;
        }
    }
    auto strip_edges = [](std::string t) {
        const std::string_view edge = "\"'`[](){}.!";
        while (!t.empty() && edge.find(t.front()) != std::string_view::npos) t.erase(t.begin());
        while (!t.empty() && edge.find(t.back()) != std::string_view::npos) t.pop_back();
        return trim(t);
    };
    return strip_edges(token);
}

std::vector<std::string> noun_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& w : split_words(text)) {
        std::string t;
        for (char c : w) {
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'') t.push_back(c);
        }
        while (!t.empty() && (t.front() == '-' || t.front() == '\'')) t.erase(t.begin());
        while (!t.empty() && (t.back() == '-' || t.back() == '\'')) t.pop_back();
        t = to_lower(t);
        if (t.size() < 3 || stopwords().count(t)) continue;
        out.push_back(std::move(t));
    }
    return out;
}

template <typename Fn>
auto in_layer(const char* layer, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(layer, e.code(), e.what(), e.details());
    }
}

}  // namespace

ChatRequest build_summary_prompt(const CharacterSpec& spec, const PromptTemplate& tmpl,
                                 const std::vector<std::string>& directives) {
    require(tmpl.layer == PromptLayer::Summary, "template '" + tmpl.template_id + "' is not a summary template");
    ensure_valid(validate_spec(spec), "character spec");
    return request_from(tmpl, spec_values(spec), directives);
}

std::variant<CharacterProfile, ParseError> parse_profile_response(std::string_view raw) {
    auto sections = sections_from_json(raw);
    if (!sections) sections = sections_from_text(raw);

    CharacterProfile profile;
    bool seen[5] = {false, false, false, false, false};
    std::string* slots[5] = {&profile.name, &profile.age, &profile.dressing_style, &profile.weapon,
                             &profile.background_story};
    for (auto& [label, text] : sections->ordered) {
        const auto field = classify(label);
        if (field == Field::Other) {
            profile.extra_sections.push_back({label, text});
            continue;
        }
        const auto index = static_cast<std::size_t>(field);
        if (!seen[index]) {
            seen[index] = true;
            *slots[index] = trim(text);
        }
    }

    static const char* const kFieldNames[5] = {"name", "age", "dressing_style", "weapon", "background_story"};
    std::vector<std::string> missing;
    std::vector<std::string> empty;
    for (std::size_t i = 0; i < 5; ++i) {
        if (!seen[i]) {
            missing.emplace_back(kFieldNames[i]);
        } else if (slots[i]->empty()) {
            empty.emplace_back(kFieldNames[i]);
        }
    }
    if (!missing.empty()) {
        return ParseError{ParseError::Kind::MissingFields, missing, "missing fields: " + join_fields(missing)};
    }
    if (!empty.empty()) {
        return ParseError{ParseError::Kind::EmptyField, empty, "empty fields: " + join_fields(empty)};
    }
    if (const auto words = word_count(profile.background_story); words > kMaxStoryWords) {
        return ParseError{ParseError::Kind::OverWordLimit,
                          {"background_story"},
                          "background_story exceeds " + std::to_string(kMaxStoryWords) + " words (" +
                              std::to_string(words) + ")"};
    }
    return profile;
}

ParseOutcome summarize_profile(const CharacterSpec& spec, Provider& provider, const TemplateCatalog& templates,
                               const std::vector<std::string>& directives) {
    ChatRequest request = build_summary_prompt(spec, templates.summary, directives);
    ParseOutcome outcome;
    for (int attempt = 1; attempt <= kMaxSummaryAttempts; ++attempt) {
        const auto reply = provider.complete_text(request);
        outcome.attempts = attempt;
        outcome.raw_transcripts.push_back(reply.content);
        auto parsed = parse_profile_response(reply.content);
        if (auto* profile = std::get_if<CharacterProfile>(&parsed)) {
            outcome.status = attempt == 1 ? ParseOutcome::Status::Ok : ParseOutcome::Status::Repaired;
            outcome.profile = std::move(*profile);
            outcome.last_error.reset();
            return outcome;
        }
        const auto& error = std::get<ParseError>(parsed);
        outcome.last_error = error;
        request.messages.push_back({Role::Assistant, reply.content});
        request.messages.push_back({Role::User, repair_message(error)});
    }
    outcome.status = ParseOutcome::Status::Failed;
    return outcome;
}

ChatRequest build_keyword_prompt(const CharacterProfile& profile, const PromptTemplate& tmpl) {
    require(tmpl.layer == PromptLayer::Keywords, "template '" + tmpl.template_id + "' is not a keyword template");
    ensure_valid(validate_profile(profile), "character profile");
    return request_from(tmpl, profile_values(profile), {});
}

KeywordSet parse_keyword_response(std::string_view raw, const CharacterProfile& profile) {
    std::vector<std::string> tokens;
    bool from_json = false;
    if (const auto body = trim(raw); !body.empty() && body.front() == '[') {
        try {
            const auto doc = json::parse(body);
            if (doc.is_array()) {
                for (const auto& item : doc) {
                    if (item.is_string()) tokens.push_back(item.get<std::string>());
                }
                from_json = true;
            }
        } catch (const json::exception&) {
        }
    }
    if (!from_json) {
        std::string current;
        for (char c : raw) {
            if (c == ',' || c == ';' || c == '\n') {
                tokens.push_back(std::move(current));
                current.clear();
            } else {
                current.push_back(c);
            }
        }
        tokens.push_back(std::move(current));
    }

    KeywordSet set;
    std::set<std::string> seen;
    auto accept = [&](const std::string& token) {
        if (set.keywords.size() >= kMaxKeywords) return;
        const auto words = word_count(token);
        if (words < 1 || words > kMaxKeywordWords) return;
        if (!seen.insert(to_lower(token)).second) return;
        set.keywords.push_back(token);
    };
    for (auto& t : tokens) accept(strip_decoration(t));

    if (set.keywords.size() < kMinKeywords) {
        std::vector<std::string> padding;
        for (const auto* text : {&profile.dressing_style, &profile.weapon, &profile.background_story}) {
            auto nouns = noun_tokens(*text);
            padding.insert(padding.end(), nouns.begin(), nouns.end());
        }
        for (const char* generic : {"character", "concept art", "full body", "game character", "reference sheet"}) {
            padding.emplace_back(generic);
        }
        for (const auto& p : padding) {
            if (set.keywords.size() >= kMinKeywords) break;
            accept(p);
        }
    }
    return set;
}

KeywordSet extract_keywords(const CharacterProfile& profile, Provider& provider, const TemplateCatalog& templates) {
    const auto request = build_keyword_prompt(profile, templates.keywords);
    const auto reply = provider.complete_text(request);
    return parse_keyword_response(reply.content, profile);
}

ImagePrompt build_image_prompt(const KeywordSet& keywords, const std::string& render_style,
                               const std::string& role_details, const PromptTemplate& tmpl) {
    require(tmpl.layer == PromptLayer::Image, "template '" + tmpl.template_id + "' is not an image template");
    require(!trim(render_style).empty(), "render_style is empty");
    if (auto report = validate_keywords(keywords); !report.ok()) {
        fail(ErrorCode::PreconditionViolation, "keyword set is invalid: " + report.summary());
    }
    std::string joined;
    for (const auto& k : keywords.keywords) {
        if (!joined.empty()) joined += ", ";
        joined += k;
    }
    ImagePrompt prompt;
    prompt.keywords = keywords;
    prompt.render_style = render_style;
    prompt.role_details = role_details;
    prompt.assembled = render(tmpl.body, {{"render_style", render_style},
                                          {"role_details", role_details},
                                          {"keywords", joined}});
    if (trim(role_details).empty()) {
        // Collapse the empty role_details slot so the prompt reads "style, keywords".
        if (const auto gap = prompt.assembled.find(", " + role_details + ", "); gap != std::string::npos) {
            prompt.assembled.erase(gap, 2 + role_details.size());
        }
    }
    if (auto report = validate_image_prompt(prompt); !report.ok()) {
        fail(ErrorCode::TemplateError, "image template dropped content: " + report.summary());
    }
    return prompt;
}

ImagePrompt build_image_prompt(const KeywordSet& keywords, const std::string& render_style,
                               const std::string& role_details) {
    static const PromptTemplate kFixed = [] {
        PromptTemplate t;
        t.template_id = "fixed/image";
        t.layer = PromptLayer::Image;
        t.body = "{{render_style}}, {{role_details}}, {{keywords}}, " + std::string(kImagePromptSuffix);
        return t;
    }();
    return build_image_prompt(keywords, render_style, role_details, kFixed);
}

ParseOutcome run_summary_layer(const CharacterSpec& spec, Provider& provider, const TemplateCatalog& templates,
                               const std::vector<std::string>& directives) {
    return in_layer("summary", [&] {
        auto outcome = summarize_profile(spec, provider, templates, directives);
        if (outcome.status == ParseOutcome::Status::Failed) {
            const auto& error = *outcome.last_error;
            throw PipelineError("summary", ErrorCode::ParseFailed,
                                "no usable profile after " + std::to_string(outcome.attempts) +
                                    " attempts: " + error.message,
                                json{{"attempts", outcome.attempts},
                                     {"kind", parse_error_kind_name(error.kind)},
                                     {"fields", error.fields}});
        }
        return outcome;
    });
}

KeywordSet run_keyword_layer(const CharacterProfile& profile, Provider& provider, const TemplateCatalog& templates) {
    return in_layer("keywords", [&] { return extract_keywords(profile, provider, templates); });
}

std::pair<ImagePrompt, std::vector<ReferenceImage>> run_image_layer(const KeywordSet& keywords,
                                                                    const CharacterSpec& spec, Provider& provider,
                                                                    const TemplateCatalog& templates,
                                                                    const ImageSize& size) {
    return in_layer("images", [&] {
        auto prompt = build_image_prompt(keywords, trim(spec.render_style), trim(spec.role_details), templates.image);
        ImageRequest request{prompt.assembled, kReferenceImageCount, size};
        auto images = provider.generate_images(request);
        return std::make_pair(std::move(prompt), std::move(images));
    });
}

PipelineResult run_pipeline(const CharacterSpec& spec, Provider& provider, const TemplateCatalog& templates,
                            const PipelineOptions& options) {
    ensure_valid(validate_spec(spec), "character spec");
    PipelineResult result;
    result.summary = run_summary_layer(spec, provider, templates, options.summary_directives);
    result.profile = *result.summary.profile;
    result.keywords = run_keyword_layer(result.profile, provider, templates);
    auto [prompt, images] = run_image_layer(result.keywords, spec, provider, templates, options.image_size);
    result.image_prompt = std::move(prompt);
    result.images = std::move(images);
    return result;
}

void to_json(json& j, const ParseOutcome& v) {
    j = json{{"status", parse_status_name(v.status)},
             {"attempts", v.attempts},
             {"raw_transcripts", v.raw_transcripts},
             {"profile", v.profile ? json(*v.profile) : json(nullptr)}};
    if (v.last_error) {
        j["last_error"] = json{{"kind", parse_error_kind_name(v.last_error->kind)},
                               {"fields", v.last_error->fields},
                               {"message", v.last_error->message}};
    }
}

void to_json(json& j, const PipelineResult& v) {
    j = json{{"profile", v.profile},
             {"keywords", v.keywords},
             {"image_prompt", v.image_prompt},
             {"images", v.images},
             {"summary", v.summary}};
}

}  // namespace charforge
