#pragma once

// Batch NPC generation: k pipeline runs over one spec, each told which variant
// it is, with pairwise-distinct names.

#include "charforge/pipeline.hpp"

namespace charforge {

inline constexpr std::size_t kMaxBatchSize = 50;
inline constexpr int kMaxNameRetries = 3;

struct NpcVariant {
    std::size_t index = 0;  // 1-based
    PipelineResult result;
    /// Summary regenerations spent on name collisions.
    int name_retries = 0;
    bool name_suffixed = false;
};

struct BatchResult {
    std::vector<NpcVariant> variants;
    bool complete = true;
    /// Set when a variant failed and the remaining ones were not generated.
    std::optional<std::size_t> failed_index;
    std::optional<ErrorCode> error_code;
    std::string error_message;
};

std::string variant_directive(std::size_t index, std::size_t count);
std::string avoid_names_directive(const std::vector<std::string>& names);

/// 1 -> "I", 4 -> "IV", ...
std::string roman_numeral(int n);

/// `name` if unused (case-insensitively), otherwise "<name> II", "<name> III", ...
std::string suffixed_name(const std::string& name, const std::vector<std::string>& taken);

/// Errors: PreconditionViolation (k outside 1..50), ValidationError (spec).
/// Provider and pipeline failures stop the batch; variants finished so far are
/// returned with complete = false.
BatchResult batch_generate_npcs(const CharacterSpec& spec, std::size_t k, Provider& provider,
                                const TemplateCatalog& templates, const PipelineOptions& options = {});

void to_json(nlohmann::json& j, const NpcVariant& v);
void to_json(nlohmann::json& j, const BatchResult& v);

}  // namespace charforge
