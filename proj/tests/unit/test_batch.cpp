#include "fakes.hpp"

#include <doctest.h>

#include <set>

using namespace charforge;

namespace {

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

TEST_CASE("directives") {
    CHECK(variant_directive(2, 10) == "This is variant 2 of 10; vary the name and details.");
    CHECK(avoid_names_directive({"Durin", "Thrain"}) == "Avoid these names: Durin, Thrain");
}

TEST_CASE("roman numerals and suffixes") {
    CHECK(roman_numeral(2) == "II");
    CHECK(roman_numeral(4) == "IV");
    CHECK(roman_numeral(9) == "IX");
    CHECK(roman_numeral(14) == "XIV");
    CHECK(roman_numeral(49) == "XLIX");
    CHECK(suffixed_name("Durin", {}) == "Durin");
    CHECK(suffixed_name("Durin", {"durin"}) == "Durin II");
    CHECK(suffixed_name("Durin", {"Durin", "Durin II"}) == "Durin III");
}

TEST_CASE("three dwarves with distinct names and one render style") {
    MockProvider mock(8);
    const auto r = batch_generate_npcs(fakes::dwarf_spec(), 3, mock, TemplateCatalog::builtin(), {{16, 16}});
    REQUIRE(r.complete);
    REQUIRE(r.variants.size() == 3);
    std::set<std::string> names;
    for (const auto& v : r.variants) {
        names.insert(lower(v.result.profile.name));
        CHECK(v.result.image_prompt.render_style == "Chinese-ink");
        CHECK(v.result.images.size() == 5);
        CHECK(validate_profile(v.result.profile).ok());
    }
    CHECK(names.size() == 3);
    CHECK(r.variants[2].index == 3);
}

TEST_CASE("batch preconditions") {
    MockProvider mock(8);
    const auto templates = TemplateCatalog::builtin();
    auto code = [&](const CharacterSpec& spec, std::size_t k) {
        try {
            batch_generate_npcs(spec, k, mock, templates);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::BadRequest;
    };
    CHECK(code(fakes::dwarf_spec(), 0) == ErrorCode::PreconditionViolation);
    CHECK(code(fakes::dwarf_spec(), 51) == ErrorCode::PreconditionViolation);
    CHECK(code(CharacterSpec{}, 2) == ErrorCode::ValidationError);
}

TEST_CASE("a provider stuck on one name gets suffixes") {
    fakes::ConstantNameProvider p("Durin", 3);
    const auto r = batch_generate_npcs(fakes::dwarf_spec(), 3, p, TemplateCatalog::builtin(), {{16, 16}});
    REQUIRE(r.complete);
    CHECK(r.variants[0].result.profile.name == "Durin");
    CHECK(r.variants[1].result.profile.name == "Durin II");
    CHECK(r.variants[2].result.profile.name == "Durin III");
    CHECK(r.variants[0].name_retries == 0);
    CHECK(r.variants[1].name_retries == kMaxNameRetries);
    CHECK(r.variants[2].name_suffixed);
    CHECK(p.summary_calls() == 1 + 2 * (1 + kMaxNameRetries));
}

TEST_CASE("failures keep finished variants") {
    fakes::FailingProvider p("images", ErrorCode::ProviderUnavailable, 2);
    const auto r = batch_generate_npcs(fakes::dwarf_spec(), 4, p, TemplateCatalog::builtin(), {{16, 16}});
    CHECK_FALSE(r.complete);
    CHECK(r.variants.empty());
    CHECK(r.failed_index == 1);
    CHECK(r.error_code == ErrorCode::ProviderUnavailable);
    const auto doc = nlohmann::json(r);
    CHECK(doc["complete"] == false);
}
