#include "fakes.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace charforge;

namespace {

LineageGraph abc() {
    LineageGraph g{"family", {}, {}};
    for (const char* id : {"A", "B", "C"}) g = add_node(g, id);
    return g;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::BadRequest;
}

}  // namespace

TEST_CASE("relinking replaces the label") {
    auto g = link(abc(), "A", "B", "mentor");
    g = link(g, "A", "B", "father");
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges.at({"A", "B"}) == "father");
}

TEST_CASE("link errors") {
    const auto g = abc();
    CHECK(code_of([&] { link(g, "A", "A", "twin"); }) == ErrorCode::SelfLoop);
    CHECK(code_of([&] { link(g, "A", "D", "rival"); }) == ErrorCode::UnknownNode);
    CHECK(code_of([&] { link(g, "A", "B", "   "); }) == ErrorCode::BadLabel);
    CHECK(code_of([&] { link(g, "A", "B", std::string(41, 'x')); }) == ErrorCode::BadLabel);
    CHECK(link(g, "A", "B", std::string(40, 'x')).edges.size() == 1);
    CHECK(link(g, "A", "B", "  mentor ").edges.at({"A", "B"}) == "mentor");
}

TEST_CASE("unlink") {
    auto g = link(link(abc(), "A", "B", "mentor"), "B", "A", "student");
    const auto h = unlink(g, "A", "B");
    CHECK(h.edges.size() == 1);
    CHECK(h.edges.count({"B", "A"}) == 1);
    CHECK(h.nodes == g.nodes);
    CHECK(code_of([&] { unlink(h, "A", "B"); }) == ErrorCode::UnknownEdge);
}

TEST_CASE("neighbors") {
    LineageGraph star{"s", {}, {}};
    for (const char* id : {"hub", "x", "y", "z"}) star = add_node(star, id);
    for (const char* id : {"z", "x", "y"}) star = link(star, "hub", id, "lord");
    const auto n = neighbors(star, "hub");
    REQUIRE(n.size() == 3);
    CHECK(n[0].other_id == "x");
    for (const auto& e : n) CHECK(e.direction == EdgeDirection::Outgoing);

    CHECK(neighbors(abc(), "C").empty());
    CHECK(code_of([&] { neighbors(abc(), "Q"); }) == ErrorCode::UnknownNode);

    auto g = link(link(abc(), "A", "B", "mentor"), "C", "A", "rival");
    const auto mixed = neighbors(g, "A");
    const auto expected = oracle::incident_scan(g, "A");
    REQUIRE(mixed.size() == expected.size());
    for (std::size_t i = 0; i < mixed.size(); ++i) {
        CHECK(mixed[i].other_id == expected[i].other);
        CHECK(mixed[i].label == expected[i].label);
        CHECK((mixed[i].direction == EdgeDirection::Outgoing) == expected[i].outgoing);
    }
}

TEST_CASE("cycles are allowed") {
    auto g = link(link(link(abc(), "A", "B", "x"), "B", "C", "y"), "C", "A", "z");
    CHECK(validate_graph(g).ok());
}

TEST_CASE("tree documents") {
    auto g = link(link(abc(), "B", "A", "son"), "A", "C", "rival");
    const auto text = encode(g);
    CHECK(contains(text, "\"schema\": 1"));
    CHECK(text.find("\"A\"") < text.find("\"B\""));
    CHECK(decode<LineageGraph>(text) == g);
    CHECK(encode(decode<LineageGraph>(text)) == text);

    auto doc = nlohmann::json::parse(text);
    doc["edges"].push_back({{"from", "A"}, {"to", "A"}, {"label", "me"}});
    CHECK(code_of([&] { decode<LineageGraph>(doc.dump()); }) == ErrorCode::SchemaMismatch);
    doc = nlohmann::json::parse(text);
    doc["edges"].push_back(doc["edges"][0]);
    CHECK(code_of([&] { decode<LineageGraph>(doc.dump()); }) == ErrorCode::SchemaMismatch);
    doc = nlohmann::json::parse(text);
    doc["edges"].push_back({{"from", "A"}, {"to", "Z"}, {"label", "ghost"}});
    CHECK(code_of([&] { decode<LineageGraph>(doc.dump()); }) == ErrorCode::SchemaMismatch);
}

TEST_CASE("incident subgraph") {
    auto g = link(link(link(abc(), "A", "B", "x"), "B", "C", "y"), "C", "A", "z");
    const auto sub = incident_subgraph(g, "B");
    CHECK(sub.edges.size() == 2);
    CHECK(sub.nodes == std::set<std::string>{"A", "B", "C"});
    CHECK(validate_graph(sub).ok());
}
