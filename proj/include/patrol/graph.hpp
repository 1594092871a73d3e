#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace patrol {

using VertexId = int;

struct Target {
    double cost = 0.0;    // alpha
    int attack_time = 0;  // d, in time units
    double detection = 1.0;  // beta, in (0,1]
};

struct Edge {
    VertexId from = 0;
    VertexId to = 0;
    int time = 1;
};

/**
 * Directed graph with timed edges and a non-empty target subset.
 *
 * Vertices are addressed by dense indices in document order; the original
 * string ids are kept for reporting. Instances are immutable once built.
 */
class PatrollingGraph {
public:
    /// Validates and builds. Throws ValidationError naming the offending element.
    PatrollingGraph(std::vector<std::string> ids, std::vector<std::optional<Target>> targets,
                    std::vector<Edge> edges);

    std::size_t n_vertices() const { return ids_.size(); }
    std::size_t n_edges() const { return edges_.size(); }
    std::size_t n_targets() const { return target_vertices_.size(); }

    const std::string& id(VertexId v) const { return ids_[v]; }
    const std::vector<std::string>& ids() const { return ids_; }
    std::optional<VertexId> find(std::string_view id) const;
    VertexId vertex(std::string_view id) const;  // throws on unknown id

    bool is_target(VertexId v) const { return targets_[v].has_value(); }
    const Target& target(VertexId v) const { return *targets_[v]; }
    const std::optional<Target>& target_info(VertexId v) const { return targets_[v]; }

    /// Target vertices in vertex order; position in this list is the target index.
    const std::vector<VertexId>& target_vertices() const { return target_vertices_; }

    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[e]; }
    /// Outgoing edge indices of v, in document order.
    const std::vector<int>& out_edges(VertexId v) const { return out_[v]; }
    const std::vector<int>& in_edges(VertexId v) const { return in_[v]; }

    double alpha_max() const;

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, VertexId> by_id_;
    std::vector<std::optional<Target>> targets_;
    std::vector<VertexId> target_vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
};

struct GraphStats {
    double alpha_max = 0.0;
    int d_max = 0;
    int time_max = 0;
    double time_avg = 0.0;
    bool strongly_connected = false;
    std::size_t n_vertices = 0;
    std::size_t n_targets = 0;
    std::size_t n_edges = 0;
};

PatrollingGraph parse_graph(std::string_view text);
PatrollingGraph graph_from_json(const nlohmann::json& doc);
nlohmann::json graph_to_json(const PatrollingGraph& g);
std::string serialize_graph(const PatrollingGraph& g);

GraphStats graph_stats(const PatrollingGraph& g);
bool strongly_connected(const PatrollingGraph& g);

}  // namespace patrol
