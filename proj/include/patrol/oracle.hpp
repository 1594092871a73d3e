#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "patrol/graph.hpp"
#include "patrol/strategy.hpp"

namespace patrol {

// Brute-force and statistical cross-checks for the evaluator. Everything here works
// on individual paths and shares no code with the layered search.

struct PathRecord {
    std::vector<int> pairs;  // eligible pairs, starting at the committed slot's head
    double prob = 1.0;       // product of slot probabilities after the committed slot
    int visits = 0;          // arrivals at the target along the path
    int time = 0;            // including the committed slot's edge
};

struct PathSet {
    std::vector<PathRecord> paths;
};

inline constexpr std::size_t kPathLimit = 10'000'000;

/// Every eligible path from the head of `slot` that ends at `target_vertex` within its attack
/// time, following only slots with probability above `eps`. Throws NumericError past kPathLimit.
PathSet enumerate_paths(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& s,
                        int slot, VertexId target_vertex, double eps = 0.0);

/// Sum of probability times eval term over all paths (exact support, eps = 0).
double brute_protection(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& s,
                        int slot, VertexId target_vertex);

/// Central differences in raw coordinates.
std::vector<double> fd_gradient(const std::function<double(const Strategy&)>& f,
                                const Strategy& s, double h);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Simulated attacks launched on `slot`: mean defended value and its standard error.
McEstimate mc_protection(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& s,
                         int slot, VertexId target_vertex, std::int64_t n, std::uint64_t seed);

}  // namespace patrol
