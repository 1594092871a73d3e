#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "patrol/graph.hpp"
#include "patrol/sparse.hpp"
#include "patrol/strategy.hpp"

namespace patrol {

/// alpha * (1 - beta)^(visits - 1) * beta, with 0^0 = 1.
double eval_term(double alpha, double beta, int visits);

struct SearchStats {
    int lambda = 0;          // distinct suffix traversal times processed
    std::size_t heap_peak = 0;
    std::size_t popped = 0;
    std::vector<int> layers;  // processed times, in processing order
};

/**
 * Protection values P(e, tau) for every slot and target, optionally with their
 * exact gradients. Layout is target-major: entry (slot, t) lives at
 * t * n_slots + slot where t is the target position in the graph's target list.
 * Zero entries mean no eligible path within the attack budget.
 */
struct ProtectionTable {
    std::size_t n_slots = 0;
    std::size_t n_targets = 0;
    std::vector<double> values;
    std::vector<SparseVector> grads;  // empty when gradients were not requested
    std::vector<SearchStats> stats;   // one per target

    bool has_gradients() const { return !grads.empty(); }
    double value(int slot, int target) const { return values[entry(slot, target)]; }
    const SparseVector& grad(int slot, int target) const { return grads[entry(slot, target)]; }
    std::size_t entry(int slot, int target) const {
        return static_cast<std::size_t>(target) * n_slots + static_cast<std::size_t>(slot);
    }

    int lambda_max() const;
    std::size_t heap_peak() const;
};

struct EvalOptions {
    bool gradients = true;
    /// Merge heap items with identical (pair, time) on insert.
    bool coalesce = true;
    bool check_normalized = true;
    int threads = 1;
};

/// Backward min-heap search over time layers, jointly computing P and its gradient.
ProtectionTable protection_table(const PatrollingGraph& g, const StrategyIndex& index,
                                 const Strategy& s, const EvalOptions& opts = {});

struct SofteningConfig {
    double margin = 5.0;
    double temperature = 1.0;
    double eps_support = 1e-6;
};

struct Candidate {
    int slot = 0;
    int target = 0;  // position in the target list
    double loss = 0.0;
    double weight = 0.0;
};

struct RvalReport {
    double value = 0.0;
    int worst_slot = -1;
    int worst_target = -1;
    double worst_loss = 0.0;
    std::vector<Candidate> candidates;  // within the reporting margin, by descending loss
};

/// alpha_max minus the worst loss over supported slots and all targets.
RvalReport hard_value(const ProtectionTable& table, const PatrollingGraph& g,
                      const StrategyIndex& index, const Strategy& s, double eps_support,
                      double report_margin = 0.0);

/// Near-worst candidates with softmax(loss / temperature) weights.
std::vector<Candidate> soft_candidates(const ProtectionTable& table, const PatrollingGraph& g,
                                       const StrategyIndex& index, const Strategy& s,
                                       const SofteningConfig& cfg);

struct SoftResult {
    double value = 0.0;
    std::vector<double> gradient;
    RvalReport report;
};

/// Hard value plus the softened ascent direction, using the table's forward gradients.
SoftResult soft_value_gradient(const ProtectionTable& table, const PatrollingGraph& g,
                               const StrategyIndex& index, const Strategy& s,
                               const SofteningConfig& cfg);

/**
 * Same search as protection_table, but keeps the per-target time layers so the
 * gradient of any weighted sum of P(e, tau) is obtained by one reverse sweep
 * instead of carrying a gradient vector on every heap item.
 * Reusable across strategies over the same index; not thread-safe.
 */
class AdjointEvaluator {
public:
    AdjointEvaluator(const PatrollingGraph& g, const StrategyIndex& index);

    /// Values and stats only (no forward gradients).
    const ProtectionTable& evaluate(const Strategy& s);
    const ProtectionTable& table() const { return table_; }

    /// sum_c weight_c * grad P(slot_c, target_c), dense over slots, at the last evaluated strategy.
    std::vector<double> weighted_gradient(std::span<const Candidate> candidates) const;

private:
    const PatrollingGraph* g_;
    const StrategyIndex* index_;
    std::vector<double> sigma_;
    ProtectionTable table_;
    std::vector<int> budget_;                  // per target
    std::vector<std::vector<double>> layers_;  // per target: (budget+1) x n_pairs node values
};

/// Warnings for the equality conditions of the value bound (strong connectivity of the
/// supported pair graph, deterministic update).
std::vector<std::string> evaluation_warnings(const StrategyIndex& index, const Strategy& s,
                                             double eps_support);

nlohmann::json report_to_json(const PatrollingGraph& g, const StrategyIndex& index,
                              const ProtectionTable& table, const RvalReport& report);

}  // namespace patrol
