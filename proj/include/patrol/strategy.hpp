#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "patrol/graph.hpp"

namespace patrol {

/// Eligible pair (vertex, memory element). Memory is 0-based internally, 1-based in files.
struct MemPair {
    VertexId vertex = 0;
    int memory = 0;
};

/// Eligible edge slot between two pairs whose underlying graph edge exists.
struct Slot {
    int src = 0;   // pair id
    int dst = 0;   // pair id
    int edge = 0;  // graph edge index
};

/**
 * Enumeration of eligible pairs and edge slots for a fixed memory assignment.
 *
 * Pairs are ordered by vertex then memory element. Slots are grouped into one
 * contiguous row per source pair and ordered inside the row by outgoing edge
 * (graph order) then by target memory element.
 */
class StrategyIndex {
public:
    StrategyIndex() = default;
    StrategyIndex(const PatrollingGraph& g, std::vector<int> mem);

    std::size_t n_pairs() const { return pairs_.size(); }
    std::size_t n_slots() const { return slots_.size(); }
    std::size_t n_rows() const { return pairs_.size(); }

    int mem(VertexId v) const { return mem_[v]; }
    const std::vector<int>& mem() const { return mem_; }
    int pair_id(VertexId v, int memory) const { return pair_offset_[v] + memory; }
    const MemPair& pair(int id) const { return pairs_[id]; }
    const Slot& slot(int id) const { return slots_[id]; }
    const std::vector<Slot>& slots() const { return slots_; }

    int row_begin(int pair) const { return row_begin_[pair]; }
    int row_end(int pair) const { return row_begin_[pair + 1]; }
    int row_width(int pair) const { return row_begin_[pair + 1] - row_begin_[pair]; }

    /// Slots entering the given pair, ascending by slot id.
    const std::vector<int>& in_slots(int pair) const { return in_slots_[pair]; }

    /// Slot id for (src pair -> dst pair), or -1 when the graph has no such edge.
    int find_slot(int src_pair, int dst_pair) const;

private:
    std::vector<int> mem_;
    std::vector<int> pair_offset_;
    std::vector<MemPair> pairs_;
    std::vector<Slot> slots_;
    std::vector<int> row_begin_;
    std::vector<std::vector<int>> in_slots_;
};

StrategyIndex build_index(const PatrollingGraph& g, const std::vector<int>& mem);
StrategyIndex build_index(const PatrollingGraph& g, int uniform_mem);

/// Flat vector over slot ids; normalized when every row is a distribution.
struct Strategy {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
    double operator[](std::size_t i) const { return probs[i]; }
    double& operator[](std::size_t i) { return probs[i]; }
};

/// Block-diagonal Jacobian of a normalization; one dense row-major block per row.
class NormJacobian {
public:
    explicit NormJacobian(const StrategyIndex& index);

    /// d(out_i)/d(x_j) for slots i, j of the same row.
    double at(const StrategyIndex& index, int row, int i, int j) const;
    std::span<double> block(int row);
    std::span<const double> block(int row) const;

    /// Chain rule: returns g^T J, i.e. xi_j = sum_i g_i dOut_i/dx_j.
    std::vector<double> pullback(const StrategyIndex& index, std::span<const double> grad) const;

private:
    std::vector<std::size_t> offset_;
    std::vector<int> width_;
    std::vector<double> data_;
};

struct Normalized {
    Strategy strategy;
    NormJacobian jacobian;
};

Strategy random_strategy(const StrategyIndex& index, std::uint64_t seed);
Strategy uniform_strategy(const StrategyIndex& index);

/// Crop to [0,1], then divide each row by its sum. Degenerate rows become uniform.
Normalized normalize_full(const Strategy& raw, const StrategyIndex& index);

/// Last slot of every row.
std::vector<int> default_pivots(const StrategyIndex& index);

/// Crop, keep non-pivot entries, set the pivot to one minus the rest.
/// When the rest exceeds one the pivot is clamped to 0 and the row rescaled.
Normalized normalize_pivot(const Strategy& raw, const StrategyIndex& index,
                           std::span<const int> pivots);

bool is_deterministic_update(const StrategyIndex& index, const Strategy& s, double eps);

/// Largest |row sum - 1| over all rows.
double max_row_defect(const StrategyIndex& index, const Strategy& s);

nlohmann::json strategy_to_json(const PatrollingGraph& g, const StrategyIndex& index,
                                const Strategy& s);
/// Parses a strategy document; the index is rebuilt from its "mem" map.
std::pair<StrategyIndex, Strategy> strategy_from_json(const PatrollingGraph& g,
                                                      const nlohmann::json& doc);

}  // namespace patrol
