#pragma once

#include <random>
#include <string>
#include <vector>

#include "patrol/generators.hpp"
#include "patrol/graph.hpp"
#include "patrol/strategy.hpp"

namespace patrol::testing {

/// Two targets a, b joined by unit edges both ways.
inline PatrollingGraph k2(int d_a, int d_b, double beta_a = 1.0, double beta_b = 1.0,
                          double alpha = 100.0) {
    return PatrollingGraph({"a", "b"},
                           {Target{alpha, d_a, beta_a}, Target{alpha, d_b, beta_b}},
                           {Edge{0, 1, 1}, Edge{1, 0, 1}});
}

inline std::string k2_document(double beta_a = 1.0) {
    return R"({"vertices":[{"id":"a","target":{"cost":100,"attack_time":2,"detection":)" +
           std::to_string(beta_a) +
           R"(}},{"id":"b","target":{"cost":100,"attack_time":2,"detection":1}}],
              "edges":[{"from":"a","to":"b","time":1},{"from":"b","to":"a","time":1}]})";
}

struct SmallInstance {
    PatrollingGraph graph;
    StrategyIndex index;
    Strategy strategy;
};

/// Random strongly connected graph (<= 6 vertices, times <= 3, d <= 12, mem <= 2)
/// with a random normalized strategy of full support.
inline SmallInstance random_small_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int n = uni(2, 6);
    std::vector<std::string> ids;
    std::vector<std::optional<Target>> targets;
    for (int v = 0; v < n; ++v) {
        ids.push_back("v" + std::to_string(v));
        const bool is_target = v == 0 || uni(0, 2) > 0;
        if (is_target) {
            const double beta = uni(0, 2) == 0 ? 1.0 : std::uniform_real_distribution<double>(0.3, 1.0)(rng);
            targets.emplace_back(Target{static_cast<double>(uni(50, 200)), uni(1, 12), beta});
        } else {
            targets.emplace_back();
        }
    }
    // A random Hamiltonian cycle keeps the graph strongly connected; extra chords on top.
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        const int a = perm[i], b = perm[(i + 1) % n];
        if (a == b || has[a][b]) continue;
        has[a][b] = 1;
        edges.push_back({a, b, uni(1, 3)});
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b && !has[a][b] && uni(0, 3) == 0) {
                has[a][b] = 1;
                edges.push_back({a, b, uni(1, 3)});
            }
    PatrollingGraph g(std::move(ids), std::move(targets), std::move(edges));
    std::vector<int> mem(n);
    for (int v = 0; v < n; ++v) mem[v] = uni(1, 2);
    StrategyIndex index(g, mem);
    Strategy s = random_strategy(index, seed ^ 0x5eedULL);
    // Keep every entry comfortably away from 0 so central differences stay on the support.
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r) {
        double sum = 0.0;
        for (int i = index.row_begin(r); i < index.row_end(r); ++i) sum += (s[i] += 0.02);
        for (int i = index.row_begin(r); i < index.row_end(r); ++i) s[i] /= sum;
    }
    return {std::move(g), std::move(index), std::move(s)};
}

/// Deterministic strategy for a tour given as a vertex sequence of a closed walk
/// (first vertex repeated at the end). The k-th visit of a vertex uses memory element k;
/// memory elements not on the tour copy the row of the vertex's first visit.
inline std::pair<StrategyIndex, Strategy> tour_strategy(const PatrollingGraph& g,
                                                        const std::vector<std::string>& walk) {
    const int len = static_cast<int>(walk.size()) - 1;
    std::vector<int> mem(g.n_vertices(), 0);
    std::vector<int> occurrence(len);
    for (int i = 0; i < len; ++i) occurrence[i] = mem[g.vertex(walk[i])]++;
    for (int& m : mem) m = std::max(m, 1);
    StrategyIndex index(g, mem);
    Strategy s{std::vector<double>(index.n_slots(), 0.0)};
    std::vector<int> first_row_target(g.n_vertices(), -1);
    for (int i = 0; i < len; ++i) {
        const VertexId v = g.vertex(walk[i]);
        const VertexId w = g.vertex(walk[i + 1]);
        const int next_occ = occurrence[(i + 1) % len];
        const int src = index.pair_id(v, occurrence[i]);
        const int dst = index.pair_id(w, next_occ);
        s[index.find_slot(src, dst)] = 1.0;
        if (occurrence[i] == 0) first_row_target[v] = dst;
    }
    for (VertexId v = 0; v < static_cast<VertexId>(g.n_vertices()); ++v)
        for (int m = 0; m < mem[v]; ++m) {
            const int src = index.pair_id(v, m);
            bool any = false;
            for (int e = index.row_begin(src); e < index.row_end(src); ++e) any = any || s[e] > 0.0;
            if (!any && first_row_target[v] >= 0) s[index.find_slot(src, first_row_target[v])] = 1.0;
        }
    return {std::move(index), std::move(s)};
}

/// The 112-unit one-floor office tour: every side office in turn, out to the far end
/// office, back along the corridor to the near end office.
inline std::vector<std::string> office_tour() {
    return {"f1_r0", "f1_c1", "f1_o1a", "f1_c1", "f1_o1b", "f1_c1", "f1_c2", "f1_o2a",
            "f1_c2", "f1_o2b", "f1_c2", "f1_c3", "f1_o3a", "f1_c3", "f1_o3b", "f1_c3",
            "f1_c4", "f1_o4a", "f1_c4", "f1_o4b", "f1_c4", "f1_r5", "f1_c4", "f1_c3",
            "f1_c2", "f1_c1", "f1_r0"};
}

}  // namespace patrol::testing
