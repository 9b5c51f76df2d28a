#include "fakes.hpp"

#include <doctest.h>

using namespace charforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::BadRequest;
}

Bytes text_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

Bytes rewrite_entry(const Bytes& bundle, const std::string& name, const std::function<Bytes(const Bytes&)>& edit) {
    auto entries = read_tar(bundle);
    for (auto& e : entries) {
        if (e.name == name) e.content = edit(e.content);
    }
    return write_tar(entries);
}

}  // namespace

TEST_CASE("tar round trip") {
    std::vector<TarEntry> entries = {{"b.txt", text_bytes("bee")}, {"a.txt", text_bytes("")},
                                     {"dir/c.bin", Bytes(1500, 0xab)}};
    const auto tar = write_tar(entries);
    CHECK(tar.size() % 512 == 0);
    const auto back = read_tar(tar);
    REQUIRE(back.size() == 3);
    CHECK(back[0].name == "a.txt");
    CHECK(back[2].content == Bytes(1500, 0xab));
    CHECK(write_tar(back) == tar);
}

TEST_CASE("tar corruption is detected") {
    const auto tar = write_tar({{"x.json", text_bytes("{}")}});
    auto flipped = tar;
    flipped[3] ^= 0x20;
    CHECK(code_of([&] { read_tar(flipped); }) == ErrorCode::CorruptEntity);
    const Bytes cut(tar.begin(), tar.begin() + 700);
    CHECK(code_of([&] { read_tar(cut); }) == ErrorCode::CorruptEntity);
    CHECK(code_of([&] { write_tar({{std::string(100, 'n'), {}}}); }) == ErrorCode::PreconditionViolation);
}

TEST_CASE("id card for a complete character") {
    MockProvider mock(1);
    fakes::TempDir dir;
    Workspace ws(dir.path());
    const auto s = fakes::seed_character(ws, mock, fakes::ahab_spec(), "ahab");
    const auto card = export_id_card("ahab", s, fakes::fixed_clock());
    CHECK(card.character_id == "ahab");
    CHECK(card.profile == *s.profile);
    CHECK(card.selected_image.image_id == s.images[1].image_id);
    CHECK(card.keywords == *s.keywords);
    CHECK(decode<IdCardDocument>(encode(card)) == card);
}

TEST_CASE("id card refuses incomplete characters") {
    MockProvider mock(1);
    fakes::TempDir dir;
    Workspace ws(dir.path());
    const auto unselected = fakes::seed_character(ws, mock, fakes::ahab_spec(), "ahab", false);
    try {
        export_id_card("ahab", unselected);
        FAIL("expected Incomplete");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Incomplete);
        CHECK(e.details()["missing"] == json{"selected_image"});
    }
    auto picked = select_image(unselected, unselected.images[0].image_id);
    const auto stale = edit_field(picked, "profile.weapon", "anchor");
    try {
        export_id_card("ahab", stale);
        FAIL("expected Incomplete");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Incomplete);
        CHECK(e.details()["stale"] == json{"keywords", "images"});
    }
    CHECK(code_of([] { export_id_card("x", create_session(fakes::warrior_spec())); }) == ErrorCode::Incomplete);
}

TEST_CASE("bundle round trip into a fresh workspace") {
    MockProvider mock(2);
    fakes::TempDir a, b;
    Workspace src(a.path());
    const auto s = fakes::seed_character(src, mock, fakes::ahab_spec(), "ahab");
    fakes::seed_character(src, mock, fakes::warrior_spec(), "mira");
    src.save_transcript(ChatTranscript{"ahab", {{Speaker::Designer, "ahoy", Timestamp{5}}}, 20}, 0);
    auto g = LineageGraph{"crew", {}, {}};
    for (const char* id : {"ahab", "mira", "stub"}) g = add_node(g, id);
    g = link(link(link(g, "ahab", "mira", "mentor"), "mira", "stub", "ally"), "stub", "ahab", "rival");
    src.save_graph(g, 0);

    const auto bundle = export_bundle(src, "ahab");
    CHECK(export_bundle(src, "ahab") == bundle);
    std::vector<std::string> names;
    for (const auto& e : read_tar(bundle)) names.push_back(e.name);
    CHECK(std::count_if(names.begin(), names.end(), [](auto& n) { return n.rfind("blobs/", 0) == 0; }) == 5);

    Workspace dst(b.path());
    CHECK(import_bundle(dst, bundle) == "ahab");
    CHECK(dst.load_session("ahab").value == s);
    CHECK(dst.load_character("ahab").value == src.load_character("ahab").value);
    CHECK(dst.load_transcript("ahab").value == src.load_transcript("ahab").value);
    const auto sub = dst.load_graph("crew").value;
    CHECK(sub.edges.size() == 2);
    CHECK(sub.edges.count({"mira", "stub"}) == 0);
    CHECK(export_bundle(dst, "ahab") == bundle);
}

TEST_CASE("bundle failures") {
    MockProvider mock(2);
    fakes::TempDir a, b;
    Workspace src(a.path());
    const auto s = fakes::seed_character(src, mock, fakes::ahab_spec(), "ahab");
    const auto bundle = export_bundle(src, "ahab");

    SUBCASE("re-import conflicts") {
        CHECK(code_of([&] { import_bundle(src, bundle); }) == ErrorCode::ConflictError);
    }
    SUBCASE("schema 99") {
        const auto bad = rewrite_entry(bundle, "manifest.json", [](const Bytes& c) {
            auto doc = json::parse(std::string(c.begin(), c.end()));
            doc["schema"] = 99;
            return text_bytes(doc.dump());
        });
        Workspace dst(b.path());
        CHECK(code_of([&] { import_bundle(dst, bad); }) == ErrorCode::SchemaMismatch);
        CHECK(dst.index().empty());
    }
    SUBCASE("blob missing from the bundle") {
        auto entries = read_tar(bundle);
        entries.erase(std::remove_if(entries.begin(), entries.end(),
                                     [&](const TarEntry& e) { return e.name == "blobs/" + s.images[2].image_id + ".png"; }),
                      entries.end());
        Workspace dst(b.path());
        CHECK(code_of([&] { import_bundle(dst, write_tar(entries)); }) == ErrorCode::MissingBlob);
    }
    SUBCASE("garbage") {
        CHECK(code_of([&] { read_bundle(text_bytes("not a tar at all")); }) == ErrorCode::CorruptEntity);
        const auto bad = rewrite_entry(bundle, "character.char.json", [](const Bytes&) { return text_bytes("{"); });
        CHECK(code_of([&] { read_bundle(bad); }) == ErrorCode::CorruptEntity);
    }
    SUBCASE("blob deleted from the workspace") {
        fs::remove(src.blob_path(s.images[0].image_id));
        CHECK(code_of([&] { export_bundle(src, "ahab"); }) == ErrorCode::MissingBlob);
    }
    SUBCASE("no profile yet") {
        const auto fresh = create_session(fakes::warrior_spec(), system_clock(), "raw");
        src.save_session(fresh, 0);
        src.save_character(record_from_session(fresh, Timestamp{1}), 0);
        CHECK(code_of([&] { export_bundle(src, "raw"); }) == ErrorCode::Incomplete);
    }
}

TEST_CASE("importing merges into an existing graph") {
    MockProvider mock(2);
    fakes::TempDir a, b;
    Workspace src(a.path()), dst(b.path());
    fakes::seed_character(src, mock, fakes::ahab_spec(), "ahab");
    auto g = add_node(add_node(LineageGraph{"crew", {}, {}}, "ahab"), "mira");
    src.save_graph(link(g, "ahab", "mira", "mentor"), 0);
    const auto bundle = export_bundle(src, "ahab");

    auto existing = add_node(add_node(LineageGraph{"crew", {}, {}}, "mira"), "pip");
    dst.save_graph(link(existing, "pip", "mira", "friend"), 0);
    import_bundle(dst, bundle);
    const auto merged = dst.load_graph("crew").value;
    CHECK(merged.edges.size() == 2);
    CHECK(merged.nodes.size() == 3);

    fakes::TempDir c;
    Workspace clash(c.path());
    clash.save_graph(link(g, "ahab", "mira", "rival"), 0);
    CHECK(code_of([&] { import_bundle(clash, bundle); }) == ErrorCode::ConflictError);
    CHECK_FALSE(clash.exists(EntityKind::Character, "ahab"));
}
