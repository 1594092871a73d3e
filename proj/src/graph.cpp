#include "patrol/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "patrol/error.hpp"

namespace patrol {

namespace {

std::string fmt_num(double x) {
    nlohmann::json j = x;
    return j.dump();
}

}  // namespace

PatrollingGraph::PatrollingGraph(std::vector<std::string> ids,
                                 std::vector<std::optional<Target>> targets,
                                 std::vector<Edge> edges)
    : ids_(std::move(ids)), targets_(std::move(targets)), edges_(std::move(edges)) {
    if (ids_.empty()) throw ValidationError("graph has no vertices");
    if (targets_.size() != ids_.size())
        throw ValidationError("target table size does not match vertex count");
    for (VertexId v = 0; v < static_cast<VertexId>(ids_.size()); ++v) {
        if (!by_id_.emplace(ids_[v], v).second)
            throw ValidationError("duplicate vertex " + ids_[v]);
        if (!targets_[v]) continue;
        const Target& t = *targets_[v];
        if (!(t.cost > 0.0) || !std::isfinite(t.cost))
            throw ValidationError("cost must be positive at target " + ids_[v] + " (got " +
                                  fmt_num(t.cost) + ")");
        if (t.attack_time < 1)
            throw ValidationError("attack_time must be >= 1 at target " + ids_[v]);
        if (!(t.detection > 0.0 && t.detection <= 1.0))
            throw ValidationError("beta out of range (0,1] at target " + ids_[v] + " (got " +
                                  fmt_num(t.detection) + ")");
        target_vertices_.push_back(v);
    }
    if (target_vertices_.empty()) throw ValidationError("graph has no targets");

    const auto n = static_cast<VertexId>(ids_.size());
    out_.resize(ids_.size());
    in_.resize(ids_.size());
    std::set<std::pair<VertexId, VertexId>> seen;
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
        const Edge& ed = edges_[e];
        if (ed.from < 0 || ed.from >= n || ed.to < 0 || ed.to >= n)
            throw ValidationError("edge " + std::to_string(e) + " references an unknown vertex");
        const std::string label = ids_[ed.from] + "->" + ids_[ed.to];
        if (ed.from == ed.to) throw ValidationError("self-loop " + label);
        if (ed.time < 1) throw ValidationError("edge time must be >= 1 on " + label);
        if (!seen.emplace(ed.from, ed.to).second) throw ValidationError("duplicate edge " + label);
        out_[ed.from].push_back(e);
        in_[ed.to].push_back(e);
    }
}

std::optional<VertexId> PatrollingGraph::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

VertexId PatrollingGraph::vertex(std::string_view id) const {
    if (auto v = find(id)) return *v;
    throw ValidationError("unknown vertex " + std::string(id));
}

double PatrollingGraph::alpha_max() const {
    double m = 0.0;
    for (VertexId v : target_vertices_) m = std::max(m, targets_[v]->cost);
    return m;
}

PatrollingGraph graph_from_json(const nlohmann::json& doc) {
    using nlohmann::json;
    if (!doc.is_object()) throw ValidationError("graph document must be an object");
    if (!doc.contains("vertices") || !doc["vertices"].is_array())
        throw ValidationError("graph document needs a \"vertices\" array");
    if (!doc.contains("edges") || !doc["edges"].is_array())
        throw ValidationError("graph document needs an \"edges\" array");

    std::vector<std::string> ids;
    std::vector<std::optional<Target>> targets;
    std::unordered_map<std::string, VertexId> index;
    for (const json& jv : doc["vertices"]) {
        if (!jv.is_object() || !jv.contains("id") || !jv["id"].is_string())
            throw ValidationError("vertex entry needs a string \"id\"");
        std::string id = jv["id"].get<std::string>();
        std::optional<Target> target;
        if (jv.contains("target") && !jv["target"].is_null()) {
            const json& jt = jv["target"];
            if (!jt.is_object()) throw ValidationError("target of " + id + " must be an object");
            for (const char* key : {"cost", "attack_time", "detection"})
                if (!jt.contains(key) || !jt[key].is_number())
                    throw ValidationError(std::string("target ") + id + " needs numeric \"" + key +
                                          "\"");
            if (!jt["attack_time"].is_number_integer())
                throw ValidationError("attack_time of " + id + " must be an integer");
            target = Target{jt["cost"].get<double>(), jt["attack_time"].get<int>(),
                            jt["detection"].get<double>()};
        }
        index.emplace(id, static_cast<VertexId>(ids.size()));
        ids.push_back(std::move(id));
        targets.push_back(target);
    }

    std::vector<Edge> edges;
    for (const json& je : doc["edges"]) {
        if (!je.is_object() || !je.contains("from") || !je.contains("to") || !je.contains("time"))
            throw ValidationError("edge entry needs \"from\", \"to\" and \"time\"");
        if (!je["from"].is_string() || !je["to"].is_string())
            throw ValidationError("edge endpoints must be vertex id strings");
        const auto from = je["from"].get<std::string>();
        const auto to = je["to"].get<std::string>();
        if (!je["time"].is_number_integer())
            throw ValidationError("edge time must be an integer on " + from + "->" + to);
        auto f = index.find(from);
        if (f == index.end()) throw ValidationError("unknown vertex " + from);
        auto t = index.find(to);
        if (t == index.end()) throw ValidationError("unknown vertex " + to);
        edges.push_back(Edge{f->second, t->second, je["time"].get<int>()});
    }
    return PatrollingGraph(std::move(ids), std::move(targets), std::move(edges));
}

PatrollingGraph parse_graph(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("malformed graph document: ") + e.what());
    }
    return graph_from_json(doc);
}

nlohmann::json graph_to_json(const PatrollingGraph& g) {
    using nlohmann::json;
    json vertices = json::array();
    for (VertexId v = 0; v < static_cast<VertexId>(g.n_vertices()); ++v) {
        json jv = {{"id", g.id(v)}};
        if (g.is_target(v)) {
            const Target& t = g.target(v);
            jv["target"] = {{"cost", t.cost}, {"attack_time", t.attack_time},
                            {"detection", t.detection}};
        }
        vertices.push_back(std::move(jv));
    }
    json edges = json::array();
    for (const Edge& e : g.edges())
        edges.push_back({{"from", g.id(e.from)}, {"to", g.id(e.to)}, {"time", e.time}});
    return {{"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

std::string serialize_graph(const PatrollingGraph& g) { return graph_to_json(g).dump(2); }

namespace {

std::size_t reach_count(const PatrollingGraph& g, bool forward) {
    std::vector<char> seen(g.n_vertices(), 0);
    std::vector<VertexId> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        for (int e : forward ? g.out_edges(v) : g.in_edges(v)) {
            const VertexId w = forward ? g.edge(e).to : g.edge(e).from;
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count;
}

}  // namespace

bool strongly_connected(const PatrollingGraph& g) {
    return reach_count(g, true) == g.n_vertices() && reach_count(g, false) == g.n_vertices();
}

GraphStats graph_stats(const PatrollingGraph& g) {
    GraphStats s;
    s.n_vertices = g.n_vertices();
    s.n_targets = g.n_targets();
    s.n_edges = g.n_edges();
    s.alpha_max = g.alpha_max();
    for (VertexId v : g.target_vertices()) s.d_max = std::max(s.d_max, g.target(v).attack_time);
    long long total = 0;
    for (const Edge& e : g.edges()) {
        s.time_max = std::max(s.time_max, e.time);
        total += e.time;
    }
    s.time_avg = g.n_edges() ? static_cast<double>(total) / static_cast<double>(g.n_edges()) : 0.0;
    s.strongly_connected = strongly_connected(g);
    return s;
}

}  // namespace patrol
