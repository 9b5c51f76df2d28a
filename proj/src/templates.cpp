#include "charforge/templates.hpp"

#include "charforge/error.hpp"
#include "charforge/util.hpp"
#include "builtin_templates.hpp"

#include <fstream>
#include <sstream>

namespace charforge {

std::string_view prompt_layer_name(PromptLayer layer) noexcept {
    switch (layer) {
        case PromptLayer::Summary: return "summary";
        case PromptLayer::Keywords: return "keywords";
        case PromptLayer::Image: return "image";
    }
    return "summary";
}

const std::set<std::string>& known_placeholders() {
    static const std::set<std::string> names = {
        "name",  "role_details",   "background_story", "game_type", "render_style",
        "age",   "dressing_style", "weapon",           "keywords",
    };
    return names;
}

namespace {

template <typename Visit>
void scan_placeholders(std::string_view text, Visit&& visit) {
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find("{{", pos);
        const auto stray_close = text.find("}}", pos);
        if (open == std::string_view::npos) {
            if (stray_close != std::string_view::npos) {
                fail(ErrorCode::TemplateError, "unbalanced '}}' in template");
            }
            return;
        }
        if (stray_close < open) {
            fail(ErrorCode::TemplateError, "unbalanced '}}' in template");
        }
        const auto close = text.find("}}", open + 2);
        if (close == std::string_view::npos) {
            fail(ErrorCode::TemplateError, "unterminated '{{' in template");
        }
        visit(open, close + 2, trim(text.substr(open + 2, close - open - 2)));
        pos = close + 2;
    }
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string template_id, PromptLayer layer, std::string_view text) {
    PromptTemplate t;
    t.template_id = std::move(template_id);
    t.layer = layer;
    std::string content(text);
    if (content.rfind("---\n", 0) == 0) {
        t.body = trim(content.substr(4));
        return t;
    }
    const auto sep = content.find("\n---\n");
    if (sep == std::string::npos) {
        t.body = trim(content);
    } else {
        t.system = trim(content.substr(0, sep));
        t.body = trim(content.substr(sep + 5));
    }
    return t;
}

std::set<std::string> PromptTemplate::placeholders() const {
    std::set<std::string> names;
    for (const auto* text : {&system, &body}) {
        scan_placeholders(*text, [&](std::size_t, std::size_t, std::string name) { names.insert(std::move(name)); });
    }
    return names;
}

void PromptTemplate::check() const {
    const auto names = placeholders();
    for (const auto& n : names) {
        if (!known_placeholders().count(n)) {
            fail(ErrorCode::TemplateError, "template '" + template_id + "' references unknown placeholder {{" + n + "}}");
        }
    }
    if (trim(body).empty()) {
        fail(ErrorCode::TemplateError, "template '" + template_id + "' has an empty body");
    }
    auto need_text = [&](std::string_view fragment) {
        if (!contains(body, fragment)) {
            fail(ErrorCode::TemplateError,
                 "template '" + template_id + "' must contain \"" + std::string(fragment) + "\"");
        }
    };
    auto need_slot = [&](const std::string& name) {
        if (!names.count(name)) {
            fail(ErrorCode::TemplateError, "template '" + template_id + "' must reference {{" + name + "}}");
        }
    };
    switch (layer) {
        case PromptLayer::Summary:
            need_text("no more than 150 words");
            need_text("name, age, dressing style, weapon, background story");
            for (const char* n : {"name", "role_details", "background_story", "game_type"}) need_slot(n);
            break;
        case PromptLayer::Keywords:
            for (const char* n : {"name", "dressing_style", "weapon", "background_story"}) need_slot(n);
            break;
        case PromptLayer::Image:
            for (const char* n : {"render_style", "role_details", "keywords"}) need_slot(n);
            break;
    }
}

std::string render(std::string_view text, const std::map<std::string, std::string>& values) {
    std::string out;
    std::size_t copied = 0;
    scan_placeholders(text, [&](std::size_t begin, std::size_t end, const std::string& name) {
        if (!known_placeholders().count(name)) {
            fail(ErrorCode::TemplateError, "unknown placeholder {{" + name + "}}");
        }
        auto it = values.find(name);
        if (it == values.end()) {
            fail(ErrorCode::TemplateError, "unresolved placeholder {{" + name + "}}");
        }
        out.append(text.substr(copied, begin - copied));
        out.append(it->second);
        copied = end;
    });
    out.append(text.substr(copied));
    return out;
}

TemplateCatalog TemplateCatalog::builtin() {
    TemplateCatalog catalog{
        PromptTemplate::parse("builtin/summary", PromptLayer::Summary, builtin_templates::kSummary),
        PromptTemplate::parse("builtin/keywords", PromptLayer::Keywords, builtin_templates::kKeywords),
        PromptTemplate::parse("builtin/image", PromptLayer::Image, builtin_templates::kImage),
    };
    catalog.summary.check();
    catalog.keywords.check();
    catalog.image.check();
    return catalog;
}

TemplateCatalog TemplateCatalog::load(const std::filesystem::path& dir) {
    auto read = [&](const char* file, PromptLayer layer) {
        const auto path = dir / file;
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            fail(ErrorCode::TemplateError, "cannot read template " + path.string());
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        auto t = PromptTemplate::parse(path.string(), layer, buffer.str());
        t.check();
        return t;
    };
    return TemplateCatalog{
        read("summary.txt", PromptLayer::Summary),
        read("keywords.txt", PromptLayer::Keywords),
        read("image.txt", PromptLayer::Image),
    };
}

}  // namespace charforge
