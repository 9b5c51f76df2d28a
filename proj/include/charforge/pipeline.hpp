#pragma once

// Three-layer generation: spec -> summarized profile -> keywords -> image
// prompt -> reference images. Each layer only sees the output of the layer
// before it (plus render_style and role_details for the image layer).

#include "charforge/model.hpp"
#include "charforge/provider.hpp"
#include "charforge/templates.hpp"

#include <variant>

namespace charforge {

inline constexpr int kMaxSummaryAttempts = 3;
inline constexpr std::string_view kImagePromptSuffix = "single character, full-body concept reference";
inline constexpr std::string_view kInventNameHint = "(not given; invent a fitting name)";

struct ParseError {
    enum class Kind { MissingFields, OverWordLimit, EmptyField };

    Kind kind = Kind::MissingFields;
    std::vector<std::string> fields;
    std::string message;

    bool operator==(const ParseError&) const = default;
};

std::string_view parse_error_kind_name(ParseError::Kind kind) noexcept;

struct ParseOutcome {
    enum class Status { Ok, Repaired, Failed };

    Status status = Status::Failed;
    std::optional<CharacterProfile> profile;
    int attempts = 0;
    std::vector<std::string> raw_transcripts;
    std::optional<ParseError> last_error;
};

std::string_view parse_status_name(ParseOutcome::Status status) noexcept;

/// Layer 1 request. Extra directives (batch variants, names to avoid) are
/// appended to the user message as separate paragraphs.
ChatRequest build_summary_prompt(const CharacterSpec& spec, const PromptTemplate& tmpl,
                                 const std::vector<std::string>& directives = {});

/// Reads "Label: text" sections (case-insensitive labels, markdown decoration
/// tolerated) or a JSON object. Unknown sections keep their source order in
/// extra_sections. The result always passes validate_profile.
std::variant<CharacterProfile, ParseError> parse_profile_response(std::string_view raw);

/// Requests a profile and repairs malformed answers: each retry continues the
/// conversation with a message quoting the violation, up to kMaxSummaryAttempts
/// total. Provider errors propagate.
ParseOutcome summarize_profile(const CharacterSpec& spec, Provider& provider, const TemplateCatalog& templates,
                               const std::vector<std::string>& directives = {});

ChatRequest build_keyword_prompt(const CharacterProfile& profile, const PromptTemplate& tmpl);

/// Turns a raw keyword answer into a valid KeywordSet: splits on commas,
/// semicolons and newlines, strips list decoration, drops empty, overlong and
/// case-insensitive duplicate tokens, keeps the first 10, then pads to 5 from
/// the profile's dressing_style and weapon words (then background_story words,
/// then a fixed generic list).
KeywordSet parse_keyword_response(std::string_view raw, const CharacterProfile& profile);

KeywordSet extract_keywords(const CharacterProfile& profile, Provider& provider, const TemplateCatalog& templates);

/// render_style, role_details, the comma-joined keywords, then kImagePromptSuffix.
ImagePrompt build_image_prompt(const KeywordSet& keywords, const std::string& render_style,
                               const std::string& role_details);
ImagePrompt build_image_prompt(const KeywordSet& keywords, const std::string& render_style,
                               const std::string& role_details, const PromptTemplate& tmpl);

struct PipelineOptions {
    ImageSize image_size;
    /// Extra layer-1 directives, used by batch generation.
    std::vector<std::string> summary_directives;
};

struct PipelineResult {
    CharacterProfile profile;
    KeywordSet keywords;
    ImagePrompt image_prompt;
    std::vector<ReferenceImage> images;
    ParseOutcome summary;
};

// Single-layer steps. Failures are rethrown as PipelineError naming the layer
// ("summary", "keywords" or "images") with the underlying error code.

ParseOutcome run_summary_layer(const CharacterSpec& spec, Provider& provider, const TemplateCatalog& templates,
                               const std::vector<std::string>& directives = {});
KeywordSet run_keyword_layer(const CharacterProfile& profile, Provider& provider, const TemplateCatalog& templates);
std::pair<ImagePrompt, std::vector<ReferenceImage>> run_image_layer(const KeywordSet& keywords,
                                                                    const CharacterSpec& spec, Provider& provider,
                                                                    const TemplateCatalog& templates,
                                                                    const ImageSize& size);

/// All three layers in order; exactly kReferenceImageCount images requested.
PipelineResult run_pipeline(const CharacterSpec& spec, Provider& provider, const TemplateCatalog& templates,
                            const PipelineOptions& options = {});

void to_json(nlohmann::json& j, const ParseOutcome& v);
void to_json(nlohmann::json& j, const PipelineResult& v);

}  // namespace charforge
