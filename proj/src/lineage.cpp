#include "charforge/lineage.hpp"

namespace charforge {

using nlohmann::json;

std::vector<Edge> LineageGraph::edge_list() const {
    std::vector<Edge> out;
    out.reserve(edges.size());
    for (const auto& [ends, label] : edges) out.push_back({ends.first, ends.second, label});
    return out;
}

std::string_view edge_direction_name(EdgeDirection d) noexcept {
    return d == EdgeDirection::Outgoing ? "outgoing" : "incoming";
}

namespace {

void require_node(const LineageGraph& g, const std::string& id) {
    if (!g.nodes.count(id)) {
        fail(ErrorCode::UnknownNode, "character '" + id + "' is not in graph '" + g.graph_id + "'",
             json{{"node", id}});
    }
}

std::string checked_label(std::string_view raw) {
    auto label = trim(raw);
    if (label.empty()) fail(ErrorCode::BadLabel, "relationship label is empty");
    if (utf8_length(label) > kMaxLabelLength) {
        fail(ErrorCode::BadLabel, "relationship label longer than " + std::to_string(kMaxLabelLength) + " characters");
    }
    return label;
}

}  // namespace

LineageGraph add_node(const LineageGraph& g, const std::string& id) {
    require(!trim(id).empty(), "node id is empty");
    LineageGraph next = g;
    next.nodes.insert(id);
    return next;
}

LineageGraph link(const LineageGraph& g, const std::string& from, const std::string& to, std::string_view label) {
    if (from == to) fail(ErrorCode::SelfLoop, "a character cannot be related to itself", json{{"node", from}});
    require_node(g, from);
    require_node(g, to);
    LineageGraph next = g;
    next.edges[{from, to}] = checked_label(label);
    return next;
}

LineageGraph unlink(const LineageGraph& g, const std::string& from, const std::string& to) {
    if (!g.edges.count({from, to})) {
        fail(ErrorCode::UnknownEdge, "no edge " + from + " -> " + to, json{{"from", from}, {"to", to}});
    }
    LineageGraph next = g;
    next.edges.erase({from, to});
    return next;
}

std::vector<Neighbor> neighbors(const LineageGraph& g, const std::string& id) {
    require_node(g, id);
    std::vector<Neighbor> outgoing;
    std::vector<Neighbor> incoming;
    // Keys are ordered by (from, to): edges leaving id are contiguous.
    for (auto it = g.edges.lower_bound({id, std::string{}}); it != g.edges.end() && it->first.first == id; ++it) {
        outgoing.push_back({it->first.second, it->second, EdgeDirection::Outgoing});
    }
    for (const auto& [ends, label] : g.edges) {
        if (ends.second == id) incoming.push_back({ends.first, label, EdgeDirection::Incoming});
    }
    // incoming is already ordered by other_id because the map is ordered by from.
    outgoing.insert(outgoing.end(), incoming.begin(), incoming.end());
    return outgoing;
}

LineageGraph incident_subgraph(const LineageGraph& g, const std::string& id) {
    LineageGraph sub;
    sub.graph_id = g.graph_id;
    if (!g.nodes.count(id)) return sub;
    sub.nodes.insert(id);
    for (const auto& [ends, label] : g.edges) {
        if (ends.first == id || ends.second == id) {
            sub.nodes.insert(ends.first);
            sub.nodes.insert(ends.second);
            sub.edges.emplace(ends, label);
        }
    }
    return sub;
}

ValidationReport validate_graph(const LineageGraph& g) {
    ValidationReport report;
    for (const auto& [ends, label] : g.edges) {
        const auto& [from, to] = ends;
        if (from == to) report.violations.push_back("self-loop on " + from);
        if (!g.nodes.count(from)) report.violations.push_back("edge endpoint " + from + " is not a node");
        if (!g.nodes.count(to)) report.violations.push_back("edge endpoint " + to + " is not a node");
        if (label.empty() || label != trim(label) || utf8_length(label) > kMaxLabelLength) {
            report.violations.push_back("bad label on " + from + " -> " + to);
        }
    }
    return report;
}

void to_json(json& j, const LineageGraph& g) {
    json edges = json::array();
    for (const auto& e : g.edge_list()) {
        edges.push_back({{"from", e.from}, {"to", e.to}, {"label", e.label}});
    }
    j = json{{"schema", kSchemaVersion}, {"graph_id", g.graph_id}, {"nodes", g.nodes}, {"edges", std::move(edges)}};
}

void from_json(const json& j, LineageGraph& g) {
    check_schema(j);
    LineageGraph out;
    j.at("graph_id").get_to(out.graph_id);
    for (const auto& n : j.at("nodes")) out.nodes.insert(n.get<std::string>());
    for (const auto& e : j.at("edges")) {
        auto key = std::make_pair(e.at("from").get<std::string>(), e.at("to").get<std::string>());
        if (!out.edges.emplace(key, e.at("label").get<std::string>()).second) {
            throw Error(ErrorCode::SchemaMismatch, "duplicate edge " + key.first + " -> " + key.second);
        }
    }
    if (auto report = validate_graph(out); !report.ok()) {
        throw Error(ErrorCode::SchemaMismatch, "graph document breaks invariants: " + report.summary());
    }
    g = std::move(out);
}

}  // namespace charforge
