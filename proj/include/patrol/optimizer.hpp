#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "patrol/evaluator.hpp"
#include "patrol/graph.hpp"
#include "patrol/strategy.hpp"

namespace patrol {

enum class Normalization { full, pivot };

/// How the ascent direction is differentiated: reverse sweep over stored layers, or the
/// forward gradients carried by the heap items.
enum class GradientRoute { adjoint, forward };

struct OptimizerConfig {
    double delta = 0.002;
    double threshold = 1e-3;
    int max_iters = 2000;
    /// 1: stop as soon as one step gains at most `threshold`. W > 1: stop once the best
    /// value has not grown by more than `threshold` over the last W iterations.
    int patience = 100;
    SofteningConfig softening{20.0, 5.0, 1e-6};
    Normalization normalization = Normalization::full;
    double step_scale = 1.0;
    GradientRoute route = GradientRoute::adjoint;
    /// Pivot slot per row for pivot normalization; empty means the last slot of each row.
    std::vector<int> pivots;
    /// Called with every protection table the run computes (instrumentation). Must be
    /// thread-safe when regstar runs several threads.
    std::function<void(const ProtectionTable&)> on_evaluate;

    void validate() const;
};

struct TracePoint {
    int iteration = 0;
    double value = 0.0;
};

struct OptRun {
    Strategy final_strategy;
    double final_value = 0.0;
    std::vector<TracePoint> trace;
    int iterations = 0;
    double wall_time_s = 0.0;
};

struct BestResult {
    OptRun best;
    std::size_t best_restart = 0;
    std::vector<double> all_values;
    std::vector<int> all_iterations;
    std::vector<double> all_times_s;
    double close_fraction = 0.0;
};

/// raw + step_scale * (1 - delta)^k * xi; the result is not normalized.
Strategy ascent_step(const Strategy& s, std::span<const double> xi, int k,
                     const OptimizerConfig& cfg);

/// Normalize, evaluate, step (along the gradient of RVal / alpha_max), until the value gain between successive normalized iterates
/// drops to the threshold or max_iters is reached. Returns the best iterate seen.
OptRun optimize(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& initial,
                const OptimizerConfig& cfg);

/// Multi-restart driver over seeded random initial strategies.
BestResult regstar(const PatrollingGraph& g, const std::vector<int>& mem, int restarts,
                   const OptimizerConfig& cfg, std::uint64_t seed, int threads = 1);

/// Fraction of values reaching at least 90% of the best one.
double close_fraction(std::span<const double> values, double best);

}  // namespace patrol
