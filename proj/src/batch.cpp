#include "charforge/batch.hpp"

#include <algorithm>

namespace charforge {

using nlohmann::json;

namespace {

bool name_taken(const std::string& name, const std::vector<std::string>& taken) {
    return std::any_of(taken.begin(), taken.end(), [&](const std::string& t) { return iequals(t, name); });
}

}  // namespace

std::string variant_directive(std::size_t index, std::size_t count) {
    return "This is variant " + std::to_string(index) + " of " + std::to_string(count) +
           "; vary the name and details.";
}

std::string avoid_names_directive(const std::vector<std::string>& names) {
    std::string out = "Avoid these names: ";
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
    return out;
}

std::string roman_numeral(int n) {
    require(n >= 1 && n < 4000, "roman numerals cover 1-3999");
    static constexpr std::pair<int, const char*> kDigits[] = {{1000, "M"}, {900, "CM"}, {500, "D"}, {400, "CD"},
                                                              {100, "C"},  {90, "XC"},  {50, "L"},  {40, "XL"},
                                                              {10, "X"},   {9, "IX"},   {5, "V"},   {4, "IV"},
                                                              {1, "I"}};
    std::string out;
    for (const auto& [value, digits] : kDigits) {
        while (n >= value) {
            out += digits;
            n -= value;
        }
    }
    return out;
}

std::string suffixed_name(const std::string& name, const std::vector<std::string>& taken) {
    if (!name_taken(name, taken)) return name;
    for (int n = 2;; ++n) {
        auto candidate = name + " " + roman_numeral(n);
        if (!name_taken(candidate, taken)) return candidate;
    }
}

BatchResult batch_generate_npcs(const CharacterSpec& spec, std::size_t k, Provider& provider,
                                const TemplateCatalog& templates, const PipelineOptions& options) {
    require(k >= 1 && k <= kMaxBatchSize, "batch size must be between 1 and " + std::to_string(kMaxBatchSize));
    ensure_valid(validate_spec(spec), "character spec");

    BatchResult batch;
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= k; ++i) {
        NpcVariant variant;
        variant.index = i;
        try {
            auto directives = options.summary_directives;
            directives.push_back(variant_directive(i, k));
            auto summary = run_summary_layer(spec, provider, templates, directives);
            while (name_taken(summary.profile->name, names) && variant.name_retries < kMaxNameRetries) {
                ++variant.name_retries;
                auto retry = directives;
                retry.push_back(avoid_names_directive(names));
                summary = run_summary_layer(spec, provider, templates, retry);
            }
            if (name_taken(summary.profile->name, names)) {
                summary.profile->name = suffixed_name(summary.profile->name, names);
                variant.name_suffixed = true;
            }
            auto& result = variant.result;
            result.profile = *summary.profile;
            result.summary = std::move(summary);
            result.keywords = run_keyword_layer(result.profile, provider, templates);
            std::tie(result.image_prompt, result.images) =
                run_image_layer(result.keywords, spec, provider, templates, options.image_size);
        } catch (const Error& e) {
            batch.complete = false;
            batch.failed_index = i;
            batch.error_code = e.code();
            batch.error_message = e.what();
            break;
        }
        names.push_back(variant.result.profile.name);
        batch.variants.push_back(std::move(variant));
    }
    return batch;
}

void to_json(json& j, const NpcVariant& v) {
    j = json{{"index", v.index},
             {"result", v.result},
             {"name_retries", v.name_retries},
             {"name_suffixed", v.name_suffixed}};
}

void to_json(json& j, const BatchResult& v) {
    j = json{{"schema", kSchemaVersion}, {"variants", v.variants}, {"complete", v.complete}};
    if (v.failed_index) {
        j["failed_index"] = *v.failed_index;
        j["error"] = {{"code", error_code_name(*v.error_code)}, {"message", v.error_message}};
    }
}

}  // namespace charforge
