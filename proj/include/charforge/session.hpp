#pragma once

// Human-in-the-loop generation sessions.
//
// A session holds the designer's spec plus the three derived layers, which
// depend on each other in a fixed chain: spec -> profile -> keywords -> images.
// Every mutation is a pure transition returning a new session and appending to
// the revision log. Editing a layer marks everything strictly downstream of it
// stale; stale values stay visible until they are regenerated.

#include "charforge/model.hpp"
#include "charforge/pipeline.hpp"

#include <set>

namespace charforge {

enum class Stage { Profile, Keywords, Images };

inline constexpr std::array kAllStages = {Stage::Profile, Stage::Keywords, Stage::Images};

std::string_view stage_name(Stage stage) noexcept;
/// Throws Error{BadRequest} for anything but "profile", "keywords", "images".
Stage parse_stage(std::string_view name);

struct Revision {
    std::size_t index = 0;
    std::string actor;  // "user" | "pipeline"
    std::string op;     // "create" | "edit" | "regenerate" | "select"
    std::string path;
    nlohmann::json before;
    nlohmann::json after;
    Timestamp at;

    bool operator==(const Revision&) const = default;
};

struct GenerationSession {
    std::string session_id;
    CharacterSpec spec;
    std::optional<CharacterProfile> profile;
    std::optional<KeywordSet> keywords;
    std::optional<ImagePrompt> image_prompt;
    std::vector<ReferenceImage> images;
    std::optional<std::string> selected_image_id;
    std::set<Stage> stale;
    std::vector<Revision> revisions;

    std::size_t revision_count() const noexcept { return revisions.size(); }
    bool is_stale(Stage stage) const { return stale.count(stage) != 0; }

    bool operator==(const GenerationSession&) const = default;
};

/// Options shared by every regeneration.
struct RegenerationContext {
    Provider& provider;
    const TemplateCatalog& templates;
    ImageSize image_size{};
    Clock clock = system_clock();
};

/// Throws Error{ValidationError} for an invalid spec.
GenerationSession create_session(const CharacterSpec& spec, const Clock& clock = system_clock(),
                                 std::string session_id = random_id());

/// Editable paths: spec.<field>, profile.<field> (including extra_sections),
/// and keywords. Values are JSON strings, except keywords (array of strings)
/// and profile.extra_sections (array of {heading, text}).
///
/// Errors: UnknownPath (bad path or the layer does not exist yet),
/// TypeMismatch, ValidationError (the edit would break a field invariant).
GenerationSession edit_field(const GenerationSession& session, std::string_view path, const nlohmann::json& value,
                             const Clock& clock = system_clock());

/// Recomputes `stage` and everything downstream via the pipeline layers.
/// Errors: UpstreamStale when an upstream layer is absent or stale; provider
/// and pipeline errors propagate and leave the input untouched.
GenerationSession regenerate(const GenerationSession& session, Stage stage, const RegenerationContext& ctx);

/// Errors: StaleImages, UnknownImage.
GenerationSession select_image(const GenerationSession& session, std::string_view image_id,
                               const Clock& clock = system_clock());

/// Throws Error{ConflictError} unless session.revision_count() == expected.
void check_revision(const GenerationSession& session, std::size_t expected);

/// Rebuilds a session from its revision log alone.
GenerationSession replay(const std::vector<Revision>& revisions);

/// True when the stale set is closed downstream (profile stale => keywords and images stale).
bool stale_set_is_downward_closed(const std::set<Stage>& stale);

void to_json(nlohmann::json& j, const Revision& v);
void from_json(const nlohmann::json& j, Revision& v);
void to_json(nlohmann::json& j, const GenerationSession& v);
void from_json(const nlohmann::json& j, GenerationSession& v);

}  // namespace charforge
