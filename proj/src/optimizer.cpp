#include "patrol/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "patrol/error.hpp"
#include "patrol/rng.hpp"

namespace patrol {

void OptimizerConfig::validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0,1)");
    if (!(threshold > 0.0) || !std::isfinite(threshold))
        throw ValidationError("threshold must be positive");
    if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
    if (patience < 1) throw ValidationError("patience must be >= 1");
    if (!(step_scale > 0.0) || !std::isfinite(step_scale))
        throw ValidationError("step_scale must be positive");
    if (!(softening.temperature > 0.0) || !std::isfinite(softening.temperature) ||
        !(softening.margin >= 0.0) || !std::isfinite(softening.margin) ||
        !(softening.eps_support >= 0.0 && softening.eps_support < 1.0))
        throw ValidationError("invalid softening configuration");
}

Strategy ascent_step(const Strategy& s, std::span<const double> xi, int k,
                     const OptimizerConfig& cfg) {
    if (xi.size() != s.size()) throw ValidationError("step direction has the wrong dimension");
    if (k < 0) throw ValidationError("iteration counter must be >= 0");
    const double rate = cfg.step_scale * std::pow(1.0 - cfg.delta, k);
    Strategy out = s;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (!std::isfinite(xi[i])) throw NumericError("non-finite entry in the step direction");
        out[i] += rate * xi[i];
    }
    return out;
}

OptRun optimize(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& initial,
                const OptimizerConfig& cfg) {
    cfg.validate();
    if (initial.size() != index.n_slots())
        throw ValidationError("initial strategy does not match the index");
    const auto started = std::chrono::steady_clock::now();
    const std::vector<int> pivots = cfg.pivots.empty() ? default_pivots(index) : cfg.pivots;

    AdjointEvaluator adjoint(g, index);
    const double inv_alpha = 1.0 / g.alpha_max();
    EvalOptions forward_opts;
    forward_opts.gradients = true;

    OptRun run;
    run.final_value = -std::numeric_limits<double>::infinity();
    Strategy raw = initial;
    double previous = 0.0;
    int best_at = 0;         // iteration that last raised the best value by more than threshold
    double best_mark = 0.0;  // best value at that iteration
    for (int k = 0; k < cfg.max_iters; ++k) {
        Normalized n = cfg.normalization == Normalization::full
                           ? normalize_full(raw, index)
                           : normalize_pivot(raw, index, pivots);

        std::vector<double> grad;
        double value = 0.0;
        if (cfg.route == GradientRoute::adjoint) {
            const ProtectionTable& table = adjoint.evaluate(n.strategy);
            if (cfg.on_evaluate) cfg.on_evaluate(table);
            const auto candidates = soft_candidates(table, g, index, n.strategy, cfg.softening);
            value = g.alpha_max() - std::max_element(candidates.begin(), candidates.end(),
                                                     [](const Candidate& a, const Candidate& b) {
                                                         return a.loss < b.loss;
                                                     })->loss;
            grad = adjoint.weighted_gradient(candidates);
        } else {
            ProtectionTable table = protection_table(g, index, n.strategy, forward_opts);
            if (cfg.on_evaluate) cfg.on_evaluate(table);
            SoftResult soft = soft_value_gradient(table, g, index, n.strategy, cfg.softening);
            value = soft.value;
            grad = std::move(soft.gradient);
        }

        run.trace.push_back({k, value});
        if (value > run.final_value) {
            run.final_value = value;
            run.final_strategy = n.strategy;
        }
        if (cfg.patience == 1) {
            if (k > 0 && value - previous <= cfg.threshold) break;
        } else {
            if (k == 0 || value - best_mark > cfg.threshold) {
                best_at = k;
                best_mark = value;
            } else if (k - best_at >= cfg.patience) {
                break;
            }
        }
        previous = value;

        // Ascend on RVal / alpha_max so step sizes do not depend on the cost scale.
        for (double& x : grad) x *= inv_alpha;
        const std::vector<double> xi = n.jacobian.pullback(index, grad);
        raw = ascent_step(n.strategy, xi, k, cfg);
    }
    run.iterations = static_cast<int>(run.trace.size());
    run.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return run;
}

double close_fraction(std::span<const double> values, double best) {
    if (values.empty()) return 0.0;
    const auto close = std::count_if(values.begin(), values.end(),
                                     [best](double v) { return v >= 0.9 * best; });
    return static_cast<double>(close) / static_cast<double>(values.size());
}

BestResult regstar(const PatrollingGraph& g, const std::vector<int>& mem, int restarts,
                   const OptimizerConfig& cfg, std::uint64_t seed, int threads) {
    if (restarts < 1) throw ValidationError("restarts must be >= 1");
    cfg.validate();
    const StrategyIndex index(g, mem);
    std::vector<OptRun> runs(restarts);

    auto work = [&](int r) {
        runs[r] = optimize(g, index, random_strategy(index, derive_seed(seed, r)), cfg);
    };
    const int n_threads = std::clamp(threads, 1, restarts);
    if (n_threads == 1) {
        for (int r = 0; r < restarts; ++r) work(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        std::exception_ptr failure;
        std::mutex failure_mu;
        for (int w = 0; w < n_threads; ++w)
            pool.emplace_back([&] {
                for (int r = next++; r < restarts; r = next++) {
                    try {
                        work(r);
                    } catch (...) {
                        std::lock_guard lock(failure_mu);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        pool.clear();
        if (failure) std::rethrow_exception(failure);
    }

    BestResult res;
    for (int r = 0; r < restarts; ++r) {
        res.all_values.push_back(runs[r].final_value);
        res.all_iterations.push_back(runs[r].iterations);
        res.all_times_s.push_back(runs[r].wall_time_s);
        if (r == 0 || runs[r].final_value > runs[res.best_restart].final_value) res.best_restart = r;
    }
    res.best = std::move(runs[res.best_restart]);
    res.close_fraction = close_fraction(res.all_values, res.best.final_value);
    return res;
}

}  // namespace patrol
