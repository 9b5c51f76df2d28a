#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace charforge {

enum class PromptLayer { Summary, Keywords, Image };

std::string_view prompt_layer_name(PromptLayer layer) noexcept;

/// Placeholder names a template may reference: the spec and profile fields,
/// plus `keywords` (comma-joined) for the image layer.
const std::set<std::string>& known_placeholders();

/// Text with `{{placeholder}}` slots.
///
/// Template files hold an optional system part and a user part separated by a
/// line consisting of `---`; without a separator the whole file is the user part.
struct PromptTemplate {
    std::string template_id;
    PromptLayer layer = PromptLayer::Summary;
    std::string system;
    std::string body;

    static PromptTemplate parse(std::string template_id, PromptLayer layer, std::string_view text);

    /// Placeholder names in system and body, in order of first appearance.
    std::set<std::string> placeholders() const;

    /// Throws Error{TemplateError} for unknown placeholders, unbalanced braces,
    /// or a layer-specific requirement that is missing.
    void check() const;
};

/// Replaces every `{{name}}` in text with values.at(name). Throws
/// Error{TemplateError} for a placeholder that is unknown or has no value.
std::string render(std::string_view text, const std::map<std::string, std::string>& values);

/// One template per layer.
struct TemplateCatalog {
    PromptTemplate summary;
    PromptTemplate keywords;
    PromptTemplate image;

    /// The wording shipped in the repository's templates/ directory.
    static TemplateCatalog builtin();

    /// Reads summary.txt, keywords.txt and image.txt from dir and checks them.
    static TemplateCatalog load(const std::filesystem::path& dir);
};

}  // namespace charforge
