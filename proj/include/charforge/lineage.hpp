#pragma once

// Character relationship graph: directed edges with one label per ordered pair.
// Cycles are allowed; the graph is a value and every operation returns a copy.

#include "charforge/model.hpp"

#include <map>
#include <set>

namespace charforge {

inline constexpr std::size_t kMaxLabelLength = 40;

struct Edge {
    std::string from;
    std::string to;
    std::string label;

    auto operator<=>(const Edge&) const = default;
};

struct LineageGraph {
    std::string graph_id;
    std::set<std::string> nodes;
    std::map<std::pair<std::string, std::string>, std::string> edges;

    std::vector<Edge> edge_list() const;
    bool operator==(const LineageGraph&) const = default;
};

enum class EdgeDirection { Outgoing, Incoming };

struct Neighbor {
    std::string other_id;
    std::string label;
    EdgeDirection direction = EdgeDirection::Outgoing;

    bool operator==(const Neighbor&) const = default;
};

std::string_view edge_direction_name(EdgeDirection d) noexcept;

LineageGraph add_node(const LineageGraph& g, const std::string& id);

/// Adds or relabels the edge from -> to. The label is trimmed first.
/// Errors: SelfLoop, UnknownNode, BadLabel.
LineageGraph link(const LineageGraph& g, const std::string& from, const std::string& to, std::string_view label);

/// Errors: UnknownEdge.
LineageGraph unlink(const LineageGraph& g, const std::string& from, const std::string& to);

/// Incident edges ordered by (direction, other_id), outgoing first.
/// Errors: UnknownNode.
std::vector<Neighbor> neighbors(const LineageGraph& g, const std::string& id);

/// Every edge touching id, plus the nodes they connect.
LineageGraph incident_subgraph(const LineageGraph& g, const std::string& id);

/// Empty when all graph invariants hold.
ValidationReport validate_graph(const LineageGraph& g);

/// `.tree.json` form: schema, graph_id, sorted nodes, sorted edge triples.
void to_json(nlohmann::json& j, const LineageGraph& g);
/// Rejects wrong schema versions and documents that break a graph invariant
/// with Error{SchemaMismatch}.
void from_json(const nlohmann::json& j, LineageGraph& g);

}  // namespace charforge
