#include "charforge/session.hpp"

#include <algorithm>

namespace charforge {

using nlohmann::json;

std::string_view stage_name(Stage stage) noexcept {
    switch (stage) {
        case Stage::Profile: return "profile";
        case Stage::Keywords: return "keywords";
        case Stage::Images: return "images";
    }
    return "profile";
}

Stage parse_stage(std::string_view name) {
    for (auto s : kAllStages) {
        if (stage_name(s) == name) return s;
    }
    fail(ErrorCode::BadRequest, "unknown layer '" + std::string(name) + "' (expected profile, keywords or images)");
}

bool stale_set_is_downward_closed(const std::set<Stage>& stale) {
    bool upstream_stale = false;
    for (auto s : kAllStages) {
        const bool here = stale.count(s) != 0;
        if (upstream_stale && !here) return false;
        upstream_stale = upstream_stale || here;
    }
    return true;
}

namespace {

constexpr const char* kSpecFields[] = {"name", "role_details", "background_story", "game_type", "render_style"};
constexpr const char* kProfileFields[] = {"name", "age", "dressing_style", "weapon", "background_story",
                                          "extra_sections"};

struct FieldPath {
    std::optional<Stage> stage;  // nullopt: the spec
    std::string field;           // empty for "keywords"
};

FieldPath parse_path(std::string_view path) {
    auto matches = [](std::string_view field, const auto& allowed) {
        return std::any_of(std::begin(allowed), std::end(allowed), [&](const char* f) { return field == f; });
    };
    if (path == "keywords") return {Stage::Keywords, ""};
    if (path.rfind("spec.", 0) == 0 && matches(path.substr(5), kSpecFields)) {
        return {std::nullopt, std::string(path.substr(5))};
    }
    if (path.rfind("profile.", 0) == 0 && matches(path.substr(8), kProfileFields)) {
        return {Stage::Profile, std::string(path.substr(8))};
    }
    fail(ErrorCode::UnknownPath, "unknown field path '" + std::string(path) + "'");
}

std::string* spec_slot(CharacterSpec& spec, const std::string& field) {
    if (field == "name") return &spec.name;
    if (field == "role_details") return &spec.role_details;
    if (field == "background_story") return &spec.background_story;
    if (field == "game_type") return &spec.game_type;
    return &spec.render_style;
}

std::string* profile_slot(CharacterProfile& profile, const std::string& field) {
    if (field == "name") return &profile.name;
    if (field == "age") return &profile.age;
    if (field == "dressing_style") return &profile.dressing_style;
    if (field == "weapon") return &profile.weapon;
    if (field == "background_story") return &profile.background_story;
    return nullptr;
}

std::string expect_string(const json& value, std::string_view path) {
    if (!value.is_string()) {
        fail(ErrorCode::TypeMismatch, "field '" + std::string(path) + "' expects a string");
    }
    return value.get<std::string>();
}

bool upstream_fresh(const GenerationSession& s, Stage stage) {
    switch (stage) {
        case Stage::Profile: return true;
        case Stage::Keywords: return s.profile.has_value() && !s.is_stale(Stage::Profile);
        case Stage::Images: return s.keywords.has_value() && !s.is_stale(Stage::Keywords) && upstream_fresh(s, Stage::Keywords);
    }
    return false;
}

void mark_downstream_stale(GenerationSession& s, std::optional<Stage> edited) {
    for (auto stage : kAllStages) {
        if (!edited || stage > *edited) s.stale.insert(stage);
    }
    if (edited && upstream_fresh(s, *edited)) {
        s.stale.erase(*edited);
    }
}

/// Applies an edit and its staleness effect; returns the previous value.
json apply_edit(GenerationSession& s, std::string_view path, const json& value) {
    const auto target = parse_path(path);
    json before;
    if (!target.stage) {
        auto spec = s.spec;
        auto* slot = spec_slot(spec, target.field);
        before = *slot;
        *slot = expect_string(value, path);
        ensure_valid(validate_spec(spec), "character spec");
        s.spec = std::move(spec);
    } else if (*target.stage == Stage::Profile) {
        if (!s.profile) fail(ErrorCode::UnknownPath, "session has no profile yet");
        auto profile = *s.profile;
        if (target.field == "extra_sections") {
            before = profile.extra_sections;
            try {
                profile.extra_sections = value.get<std::vector<ProfileSection>>();
            } catch (const json::exception&) {
                fail(ErrorCode::TypeMismatch, "profile.extra_sections expects an array of {heading, text}");
            }
        } else {
            auto* slot = profile_slot(profile, target.field);
            before = *slot;
            *slot = expect_string(value, path);
        }
        ensure_valid(validate_profile(profile), "character profile");
        s.profile = std::move(profile);
    } else {
        if (!s.keywords) fail(ErrorCode::UnknownPath, "session has no keywords yet");
        if (!value.is_array() || !std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_string(); })) {
            fail(ErrorCode::TypeMismatch, "keywords expects an array of strings");
        }
        KeywordSet keywords{value.get<std::vector<std::string>>()};
        ensure_valid(validate_keywords(keywords), "keyword set");
        before = *s.keywords;
        s.keywords = std::move(keywords);
    }
    mark_downstream_stale(s, target.stage);
    return before;
}

json images_state(const GenerationSession& s) {
    return json{{"image_prompt", s.image_prompt ? json(*s.image_prompt) : json(nullptr)},
                {"images", s.images},
                {"selected_image_id", s.selected_image_id ? json(*s.selected_image_id) : json(nullptr)}};
}

void set_images_state(GenerationSession& s, const json& state) {
    const auto& prompt = state.at("image_prompt");
    s.image_prompt = prompt.is_null() ? std::nullopt : std::optional<ImagePrompt>(prompt.get<ImagePrompt>());
    s.images = state.at("images").get<std::vector<ReferenceImage>>();
    const auto& selected = state.at("selected_image_id");
    s.selected_image_id = selected.is_null() ? std::nullopt : std::optional<std::string>(selected.get<std::string>());
}

void append(GenerationSession& s, std::string actor, std::string op, std::string path, json before, json after,
            Timestamp at) {
    s.revisions.push_back(Revision{s.revisions.size(), std::move(actor), std::move(op), std::move(path),
                                   std::move(before), std::move(after), at});
}

}  // namespace

GenerationSession create_session(const CharacterSpec& spec, const Clock& clock, std::string session_id) {
    ensure_valid(validate_spec(spec), "character spec");
    GenerationSession s;
    s.session_id = std::move(session_id);
    s.spec = spec;
    s.stale = {Stage::Profile, Stage::Keywords, Stage::Images};
    append(s, "user", "create", "", nullptr, json{{"session_id", s.session_id}, {"spec", spec}}, clock());
    return s;
}

GenerationSession edit_field(const GenerationSession& session, std::string_view path, const json& value,
                             const Clock& clock) {
    GenerationSession next = session;
    json before = apply_edit(next, path, value);
    append(next, "user", "edit", std::string(path), std::move(before), value, clock());
    return next;
}

GenerationSession regenerate(const GenerationSession& session, Stage stage, const RegenerationContext& ctx) {
    if (!upstream_fresh(session, stage)) {
        fail(ErrorCode::UpstreamStale, "cannot regenerate " + std::string(stage_name(stage)) +
                                           ": an upstream layer is missing or stale; regenerate it first",
             json{{"layer", stage_name(stage)}});
    }

    // Compute everything first so a failure leaves the session untouched.
    std::optional<CharacterProfile> profile = session.profile;
    std::optional<KeywordSet> keywords = session.keywords;
    if (stage == Stage::Profile) {
        profile = *run_summary_layer(session.spec, ctx.provider, ctx.templates).profile;
    }
    if (stage <= Stage::Keywords) {
        keywords = run_keyword_layer(*profile, ctx.provider, ctx.templates);
    }
    auto [prompt, images] = run_image_layer(*keywords, session.spec, ctx.provider, ctx.templates, ctx.image_size);

    GenerationSession next = session;
    const auto at = ctx.clock();
    if (stage == Stage::Profile) {
        append(next, "pipeline", "regenerate", "profile",
               session.profile ? json(*session.profile) : json(nullptr), json(*profile), at);
        next.profile = profile;
    }
    if (stage <= Stage::Keywords) {
        append(next, "pipeline", "regenerate", "keywords",
               session.keywords ? json(*session.keywords) : json(nullptr), json(*keywords), at);
        next.keywords = keywords;
    }
    const json before = images_state(session);
    next.image_prompt = std::move(prompt);
    next.images = std::move(images);
    next.selected_image_id.reset();
    append(next, "pipeline", "regenerate", "images", before, images_state(next), at);

    for (auto s : kAllStages) {
        if (s >= stage) next.stale.erase(s);
    }
    return next;
}

GenerationSession select_image(const GenerationSession& session, std::string_view image_id, const Clock& clock) {
    if (session.is_stale(Stage::Images)) {
        fail(ErrorCode::StaleImages, "images are stale; regenerate them before selecting");
    }
    const bool known = std::any_of(session.images.begin(), session.images.end(),
                                   [&](const ReferenceImage& img) { return img.image_id == image_id; });
    if (!known) {
        fail(ErrorCode::UnknownImage, "image " + std::string(image_id) + " is not among the current images");
    }
    GenerationSession next = session;
    const json before = session.selected_image_id ? json(*session.selected_image_id) : json(nullptr);
    next.selected_image_id = std::string(image_id);
    append(next, "user", "select", "selected_image_id", before, json(image_id), clock());
    return next;
}

void check_revision(const GenerationSession& session, std::size_t expected) {
    if (session.revision_count() != expected) {
        fail(ErrorCode::ConflictError,
             "session " + session.session_id + " is at revision " + std::to_string(session.revision_count()) +
                 ", request expected " + std::to_string(expected),
             json{{"current", session.revision_count()}, {"expected", expected}});
    }
}

GenerationSession replay(const std::vector<Revision>& revisions) {
    if (revisions.empty() || revisions.front().op != "create") {
        fail(ErrorCode::CorruptEntity, "revision log does not start with a create");
    }
    const auto& first = revisions.front();
    GenerationSession s;
    s.session_id = first.after.at("session_id").get<std::string>();
    s.spec = first.after.at("spec").get<CharacterSpec>();
    s.stale = {Stage::Profile, Stage::Keywords, Stage::Images};
    s.revisions.push_back(first);

    for (std::size_t i = 1; i < revisions.size(); ++i) {
        const auto& r = revisions[i];
        if (r.op == "edit") {
            apply_edit(s, r.path, r.after);
        } else if (r.op == "select") {
            s.selected_image_id = r.after.get<std::string>();
        } else if (r.op == "regenerate") {
            const auto stage = parse_stage(r.path);
            switch (stage) {
                case Stage::Profile: s.profile = r.after.get<CharacterProfile>(); break;
                case Stage::Keywords: s.keywords = r.after.get<KeywordSet>(); break;
                case Stage::Images: set_images_state(s, r.after); break;
            }
            s.stale.erase(stage);
        } else {
            fail(ErrorCode::CorruptEntity, "unknown revision op '" + r.op + "'");
        }
        s.revisions.push_back(r);
    }
    return s;
}

void to_json(json& j, const Revision& v) {
    j = json{{"index", v.index}, {"actor", v.actor}, {"op", v.op},       {"path", v.path},
             {"before", v.before}, {"after", v.after}, {"timestamp", v.at}};
}

void from_json(const json& j, Revision& v) {
    j.at("index").get_to(v.index);
    j.at("actor").get_to(v.actor);
    j.at("op").get_to(v.op);
    j.at("path").get_to(v.path);
    v.before = j.at("before");
    v.after = j.at("after");
    j.at("timestamp").get_to(v.at);
}

void to_json(json& j, const GenerationSession& v) {
    json stale = json::array();
    for (auto s : v.stale) stale.push_back(stage_name(s));
    j = json{{"schema", kSchemaVersion},
             {"session_id", v.session_id},
             {"spec", v.spec},
             {"profile", v.profile ? json(*v.profile) : json(nullptr)},
             {"keywords", v.keywords ? json(*v.keywords) : json(nullptr)},
             {"image_prompt", v.image_prompt ? json(*v.image_prompt) : json(nullptr)},
             {"images", v.images},
             {"selected_image_id", v.selected_image_id ? json(*v.selected_image_id) : json(nullptr)},
             {"stale", std::move(stale)},
             {"revisions", v.revisions}};
}

void from_json(const json& j, GenerationSession& v) {
    check_schema(j);
    j.at("session_id").get_to(v.session_id);
    j.at("spec").get_to(v.spec);
    v.profile = j.at("profile").is_null() ? std::nullopt
                                          : std::optional<CharacterProfile>(j.at("profile").get<CharacterProfile>());
    v.keywords = j.at("keywords").is_null() ? std::nullopt : std::optional<KeywordSet>(j.at("keywords").get<KeywordSet>());
    v.image_prompt = j.at("image_prompt").is_null() ? std::nullopt
                                                    : std::optional<ImagePrompt>(j.at("image_prompt").get<ImagePrompt>());
    j.at("images").get_to(v.images);
    v.selected_image_id = j.at("selected_image_id").is_null()
                              ? std::nullopt
                              : std::optional<std::string>(j.at("selected_image_id").get<std::string>());
    v.stale.clear();
    for (const auto& name : j.at("stale")) {
        try {
            v.stale.insert(parse_stage(name.get<std::string>()));
        } catch (const Error& e) {
            throw Error(ErrorCode::SchemaMismatch, e.what());
        }
    }
    j.at("revisions").get_to(v.revisions);
}

}  // namespace charforge
