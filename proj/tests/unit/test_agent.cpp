#include "fakes.hpp"

#include <doctest.h>

using namespace charforge;

namespace {

ChatTranscript with_turns(std::size_t n) {
    ChatTranscript t{"c1", {}, 20};
    for (std::size_t i = 0; i < n; ++i) {
        t.turns.push_back({i % 2 ? Speaker::Character : Speaker::Designer, "turn " + std::to_string(i + 1),
                           Timestamp{static_cast<std::int64_t>(i)}});
    }
    return t;
}

}  // namespace

TEST_CASE("persona without relationships") {
    const auto card = build_persona("c1", fakes::ahab_profile(), KeywordSet{{"coat", "harpoon", "beard", "storm", "sea"}}, {});
    const auto& doc = card.persona_document;
    CHECK(contains(doc, "Ahab"));
    const auto p = fakes::ahab_profile();
    for (const auto& field : {p.name, p.age, p.dressing_style, p.weapon, p.background_story}) CHECK(contains(doc, field));
    for (const auto& kw : {"coat", "harpoon", "beard", "storm", "sea"}) CHECK(contains(doc, kw));
    CHECK_FALSE(contains(doc, "Relationships"));
    CHECK(contains(card.style_directives, "in character"));
}

TEST_CASE("relationship lines") {
    const std::vector<Relationship> rel = {{"mentor", "Mira", RelationDirection::Outgoing},
                                           {"rival", "Starbuck", RelationDirection::Incoming}};
    const auto card = build_persona("c1", fakes::ahab_profile(), KeywordSet{}, rel);
    CHECK(contains(card.persona_document, "- mentor of Mira\n"));
    CHECK(contains(card.persona_document, "- Starbuck is rival of Ahab\n"));
    CHECK(build_persona("c1", fakes::ahab_profile(), KeywordSet{}, rel) == card);
}

TEST_CASE("persona needs a valid profile") {
    auto p = fakes::ahab_profile();
    p.weapon.clear();
    CHECK_THROWS_AS(build_persona("c1", p, KeywordSet{}, {}), Error);
}

TEST_CASE("truncate_context") {
    CHECK(truncate_context(with_turns(5), 20).size() == 5);
    const auto last = truncate_context(with_turns(25), 20);
    REQUIRE(last.size() == 20);
    CHECK(last.front().text == "turn 6");
    CHECK(last.back().text == "turn 25");
    const auto two = truncate_context(with_turns(25), 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].text == "turn 24");
    CHECK_THROWS_AS(truncate_context(with_turns(3), 1), Error);
}

TEST_CASE("first message: one system and one user message") {
    fakes::ScriptedProvider p;
    const auto card = build_persona("c1", fakes::ahab_profile(), KeywordSet{}, {});
    const auto out = chat(card, ChatTranscript{"c1", {}, 20}, "Who are you?", p, fakes::fixed_clock());
    REQUIRE(p.requests().size() == 1);
    const auto& req = p.requests()[0];
    REQUIRE(req.messages.size() == 2);
    CHECK(req.messages[0].role == Role::System);
    CHECK(req.messages[0].content == card.persona_document + "\n" + card.style_directives);
    CHECK(req.messages[1].content == "Who are you?");
    REQUIRE(out.transcript.turns.size() == 2);
    CHECK(out.transcript.turns[0].speaker == Speaker::Designer);
    CHECK(out.transcript.turns[1].text == out.reply);
    CHECK(out.transcript.turns[0].at < out.transcript.turns[1].at);
}

TEST_CASE("after 50 turns only the window is sent") {
    fakes::ScriptedProvider p;
    const auto card = build_persona("c1", fakes::ahab_profile(), KeywordSet{}, {});
    const auto t = with_turns(50);
    const auto out = chat(card, t, "And now?", p);
    const auto& req = p.requests().back();
    REQUIRE(req.messages.size() == 22);
    CHECK(req.messages[1].content == "turn 31");
    CHECK(req.messages[20].content == "turn 50");
    CHECK(req.messages[21].content == "And now?");
    CHECK(out.transcript.turns.size() == 52);
    CHECK(std::equal(t.turns.begin(), t.turns.end(), out.transcript.turns.begin()));
}

TEST_CASE("empty messages and provider errors leave the transcript alone") {
    fakes::FailingProvider failing("chat", ErrorCode::RateLimited);
    const auto card = build_persona("c1", fakes::ahab_profile(), KeywordSet{}, {});
    const auto t = with_turns(4);
    CHECK_THROWS_AS(chat(card, t, "   ", failing), Error);
    try {
        chat(card, t, "hello", failing);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RateLimited);
    }
    CHECK(t.turns.size() == 4);
}

TEST_CASE("transcripts round-trip") {
    const auto t = with_turns(7);
    CHECK(decode<ChatTranscript>(encode(t)) == t);
    auto doc = nlohmann::json::parse(encode(t));
    doc["window"] = 1;
    CHECK_THROWS_AS(decode<ChatTranscript>(doc.dump()), Error);
}
