#include "fakes.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace charforge;
using nlohmann::json;

namespace {

std::set<std::string> names_of(const std::set<Stage>& stale) {
    std::set<std::string> out;
    for (auto s : stale) out.emplace(stage_name(s));
    return out;
}

std::set<std::string> names_of(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

ChatRequest random_request(std::mt19937_64& rng) {
    ChatRequest r;
    if (rng() % 2) r.messages.push_back({Role::System, fakes::random_phrase(rng, 1, 12)});
    r.messages.push_back({Role::User, fakes::random_phrase(rng, 1, 30)});
    if (rng() % 3 == 0) {
        r.messages.push_back({Role::Assistant, fakes::random_phrase(rng, 1, 10)});
        r.messages.push_back({Role::User, "Answer as a comma-separated list of keywords."});
    }
    return r;
}

}  // namespace

TEST_CASE("mock provider is a pure function of seed and request") {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 1000; ++i) {
        const auto seed = rng() % 7;
        const auto req = random_request(rng);
        MockProvider a(seed), b(seed);
        CHECK(a.complete_text(req).content == b.complete_text(req).content);
        CHECK(a.complete_text(req).content == a.complete_text(req).content);
    }
    MockProvider a(1), b(1);
    const ImageRequest img{"a prompt", 5, {8, 8}};
    CHECK(a.generate_images(img) == b.generate_images(img));
}

TEST_CASE("the mock pipeline always yields a valid profile") {
    const auto templates = TemplateCatalog::builtin();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::mt19937_64 rng(seed);
        MockProvider mock(seed);
        const auto r = run_pipeline(fakes::random_spec(rng), mock, templates, {{8, 8}});
        CHECK(validate_profile(r.profile).ok());
        CHECK(r.keywords.keywords.size() >= 5);
        CHECK(r.images.size() == 5);
    }
}

TEST_CASE("staleness agrees with the version-stamp oracle") {
    using M = oracle::StalenessModel;
    const auto templates = TemplateCatalog::builtin();
    std::mt19937_64 rng(2024);
    MockProvider mock(6);
    const RegenerationContext ctx{mock, templates, {8, 8}, fakes::fixed_clock()};
    for (int seq = 0; seq < 500; ++seq) {
        auto session = create_session(fakes::random_spec(rng), fakes::fixed_clock(), "p" + std::to_string(seq));
        M model;
        const auto ops = std::uniform_int_distribution<int>(1, 30)(rng);
        for (int i = 0; i < ops; ++i) {
            const int op = static_cast<int>(rng() % 6);
            bool engine_ok = true;
            bool model_ok = true;
            try {
                switch (op) {
                    case 0:
                        model_ok = model.edit(M::Spec);
                        session = edit_field(session, "spec.role_details", fakes::random_phrase(rng, 2, 8));
                        break;
                    case 1:
                        model_ok = model.edit(M::Profile);
                        session = edit_field(session, "profile.weapon", fakes::random_phrase(rng, 1, 3));
                        break;
                    case 2: {
                        model_ok = model.edit(M::Keywords);
                        json kws = json::array();
                        for (int k = 0; k < 5; ++k) kws.push_back(fakes::random_word(rng) + std::to_string(k));
                        session = edit_field(session, "keywords", kws);
                        break;
                    }
                    default: {
                        const auto layer = static_cast<M::Layer>(op - 2);
                        model_ok = model.regenerate(layer);
                        session = regenerate(session, static_cast<Stage>(op - 3), ctx);
                    }
                }
            } catch (const Error& e) {
                engine_ok = false;
                CHECK((e.code() == ErrorCode::UnknownPath || e.code() == ErrorCode::UpstreamStale));
            }
            REQUIRE(engine_ok == model_ok);
            REQUIRE(names_of(session.stale) == names_of(model.stale_names()));
            REQUIRE(stale_set_is_downward_closed(session.stale));
        }
        CHECK(replay(session.revisions) == session);
    }
}

TEST_CASE("random graphs round-trip and neighbors match a full scan") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 100; ++i) {
        const auto g = fakes::random_graph(rng, 50, 200);
        CHECK(validate_graph(g).ok());
        const auto text = encode(g);
        CHECK(decode<LineageGraph>(text) == g);
        CHECK(encode(decode<LineageGraph>(text)) == text);
        for (const auto& id : g.nodes) {
            const auto got = neighbors(g, id);
            const auto want = oracle::incident_scan(g, id);
            REQUIRE(got.size() == want.size());
            std::size_t in = 0, out = 0;
            for (const auto& [ends, label] : g.edges) {
                in += ends.second == id;
                out += ends.first == id;
            }
            CHECK(got.size() == in + out);
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got[k].other_id == want[k].other);
                CHECK(got[k].label == want[k].label);
                CHECK((got[k].direction == EdgeDirection::Outgoing) == want[k].outgoing);
            }
        }
    }
}

TEST_CASE("assembled image prompts contain every keyword and the style") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        KeywordSet kws;
        const auto n = 5 + rng() % 6;
        for (std::size_t k = 0; k < n; ++k) kws.keywords.push_back(fakes::random_phrase(rng, 1, 2) + std::to_string(k));
        const auto style = fakes::random_phrase(rng, 1, 3);
        const auto p = build_image_prompt(kws, style, fakes::random_phrase(rng, 2, 6));
        CHECK(contains(p.assembled, style));
        for (const auto& k : kws.keywords) CHECK(contains(p.assembled, k));
    }
}

TEST_CASE("persona system message carries all five profile fields") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        const auto profile = fakes::random_profile(rng);
        const auto card = build_persona("c", profile, KeywordSet{}, {});
        ChatTranscript t{"c", {}, 20};
        const auto req = build_chat_request(card, t, "hello");
        REQUIRE(req.messages.front().role == Role::System);
        const auto& sys = req.messages.front().content;
        for (const auto& f : {profile.name, profile.age, profile.dressing_style, profile.weapon, profile.background_story}) {
            CHECK(contains(sys, f));
        }
    }
}

TEST_CASE("a session survives any number of encode/decode cycles") {
    std::mt19937_64 rng(31);
    const auto templates = TemplateCatalog::builtin();
    for (int i = 0; i < 20; ++i) {
        MockProvider mock(i);
        auto s = create_session(fakes::random_spec(rng), fakes::fixed_clock(), "r" + std::to_string(i));
        s = regenerate(s, Stage::Profile, {mock, templates, {8, 8}, fakes::fixed_clock()});
        auto text = encode(s);
        for (int k = 0; k < 3; ++k) text = encode(decode<GenerationSession>(text));
        CHECK(decode<GenerationSession>(text) == s);
    }
}
