// Acceptance suite: one PASS/FAIL line per criterion. Arguments select criteria
// (e.g. `acceptance 1 3 4a`); no arguments runs everything.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "patrol/evaluator.hpp"
#include "patrol/generators.hpp"
#include "patrol/oracle.hpp"
#include "patrol/optimizer.hpp"
#include "patrol/rng.hpp"

#ifndef PATROL_DATA_DIR
#define PATROL_DATA_DIR "data"
#endif

using namespace patrol;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

constexpr std::uint64_t kCorpusBase = 1000;
constexpr int kCorpusSize = 200;

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t entries = 0;
    for (int i = 0; i < kCorpusSize; ++i) {
        const auto inst = testing::random_small_instance(kCorpusBase + i);
        const ProtectionTable t = protection_table(inst.graph, inst.index, inst.strategy);
        const auto tv = inst.graph.target_vertices();
        for (int e = 0; e < static_cast<int>(inst.index.n_slots()); ++e)
            for (int ti = 0; ti < static_cast<int>(tv.size()); ++ti) {
                const double b = brute_protection(inst.graph, inst.index, inst.strategy, e, tv[ti]);
                worst = std::max(worst, std::abs(t.value(e, ti) - b));
                ++entries;
            }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && secs < 60.0,
            fmt("%d instances, %zu entries, max abs error %.2e (<= 1e-9), %.1f s (< 60 s)", kCorpusSize,
                entries, worst, secs)};
}

double jacobian_error(const StrategyIndex& index, const Strategy& x,
                      const std::function<Normalized(const Strategy&)>& norm) {
    const Normalized at = norm(x);
    double worst = 0.0;
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r)
        for (int i = index.row_begin(r); i < index.row_end(r); ++i) {
            const auto fd = fd_gradient([&](const Strategy& y) { return norm(y).strategy[i]; }, x, 1e-6);
            for (int j = index.row_begin(r); j < index.row_end(r); ++j)
                worst = std::max(worst, rel_err(at.jacobian.at(index, r, i, j), fd[j]));
        }
    return worst;
}

Outcome gradient_exactness() {
    double worst_grad = 0.0, worst_full = 0.0, worst_pivot = 0.0;
    std::mt19937_64 rng(kCorpusBase);
    std::uniform_real_distribution<double> inner(0.05, 0.95);
    for (int i = 0; i < kCorpusSize; ++i) {
        const auto inst = testing::random_small_instance(kCorpusBase + i);
        const ProtectionTable t = protection_table(inst.graph, inst.index, inst.strategy);
        const auto tv = inst.graph.target_vertices();
        const int n_slots = static_cast<int>(inst.index.n_slots());
        // One brute-force table per perturbed coordinate.
        auto brute_table = [&](const Strategy& y) {
            std::vector<double> out(static_cast<std::size_t>(n_slots) * tv.size());
            for (std::size_t ti = 0; ti < tv.size(); ++ti)
                for (int e = 0; e < n_slots; ++e)
                    out[ti * n_slots + e] = brute_protection(inst.graph, inst.index, y, e, tv[ti]);
            return out;
        };
        const double h = 1e-6;
        for (int j = 0; j < n_slots; ++j) {
            Strategy plus = inst.strategy, minus = inst.strategy;
            plus[j] += h;
            minus[j] -= h;
            const auto fp = brute_table(plus);
            const auto fm = brute_table(minus);
            for (std::size_t ti = 0; ti < tv.size(); ++ti)
                for (int e = 0; e < n_slots; ++e) {
                    const double fd = (fp[ti * n_slots + e] - fm[ti * n_slots + e]) / (2 * h);
                    worst_grad = std::max(worst_grad, rel_err(t.grad(e, static_cast<int>(ti)).get(j), fd));
                }
        }

        Strategy smooth{std::vector<double>(n_slots)};
        for (double& x : smooth.probs) x = inner(rng);
        worst_full = std::max(worst_full, jacobian_error(inst.index, smooth, [&](const Strategy& y) {
                                  return normalize_full(y, inst.index);
                              }));
        const auto pivots = default_pivots(inst.index);
        Strategy small = smooth;
        for (int r = 0; r < static_cast<int>(inst.index.n_rows()); ++r)
            for (int k = inst.index.row_begin(r); k < inst.index.row_end(r); ++k)
                small[k] = 0.9 * smooth[k] / inst.index.row_width(r);
        worst_pivot = std::max(worst_pivot, jacobian_error(inst.index, small, [&](const Strategy& y) {
                                   return normalize_pivot(y, inst.index, pivots);
                               }));
    }
    return {worst_grad <= 1e-5 && worst_full <= 1e-4 && worst_pivot <= 1e-4,
            fmt("max gradient rel error %.2e (<= 1e-5); Jacobian rel error full %.2e, pivot %.2e (<= 1e-4)",
                worst_grad, worst_full, worst_pivot)};
}

Outcome micro_cases() {
    auto k2_value = [](int d, double beta_a) {
        const PatrollingGraph g = testing::k2(d, d, beta_a);
        const StrategyIndex idx = build_index(g, 1);
        const Strategy s = uniform_strategy(idx);
        const ProtectionTable t = protection_table(g, idx, s);
        const RvalReport r = hard_value(t, g, idx, s, 1e-6);
        // Oracle confirmation of the worst entry.
        const double brute = brute_protection(g, idx, s, r.worst_slot, g.target_vertices()[r.worst_target]);
        const bool agrees = std::abs(brute - t.value(r.worst_slot, r.worst_target)) <= 1e-12;
        return std::pair{r.value, agrees};
    };
    const auto [v2, o2] = k2_value(2, 1.0);
    const auto [v1, o1] = k2_value(1, 1.0);
    const auto [v4, o4] = k2_value(4, 0.5);
    const double e1 = eval_term(100.0, 1.0, 1);
    const bool pass = v2 == 100.0 && v1 == 0.0 && std::abs(v4 - 75.0) <= 1e-12 && o1 && o2 && o4 && e1 == 100.0;
    return {pass, fmt("K2 d=2 -> %.12g, d=1 -> %.12g, beta(a)=0.5 d=4 -> %.12g, oracle %s; Eval(100,1,1) = %.12g",
                      v2, v1, v4, (o1 && o2 && o4) ? "agrees" : "DISAGREES", e1)};
}

Outcome tour_value() {
    const PatrollingGraph g = gen_office_tight();
    const auto [idx, s] = testing::tour_strategy(g, testing::office_tour());
    const ProtectionTable t = protection_table(g, idx, s);
    const double v = hard_value(t, g, idx, s, 1e-6).value;
    return {std::abs(v - 100.0) <= 1e-9, fmt("112-unit tour RVal = %.12f (100 +- 1e-9)", v)};
}

Outcome tight_search() {
    const auto t0 = Clock::now();
    const PatrollingGraph g = gen_office_tight();
    const BestResult r = regstar(g, std::vector<int>(g.n_vertices(), 4), 500, {}, 2024);
    const auto hits = std::count_if(r.all_values.begin(), r.all_values.end(), [](double v) { return v >= 100.0 - 1e-9; });
    const double secs = seconds_since(t0);
    return {hits >= 1 && secs <= 1800.0,
            fmt("mem 4, 500 restarts: %ld reach 100 (%.1f%%), best %.6f, %.0f s (<= 1800 s)", static_cast<long>(hits),
                100.0 * hits / 500.0, r.best.final_value, secs)};
}

Outcome memory_trend() {
    const auto t0 = Clock::now();
    const PatrollingGraph g = gen_office(1);
    std::vector<double> best1, best4;
    for (std::uint64_t driver = 0; driver < 5; ++driver) {
        best1.push_back(regstar(g, std::vector<int>(g.n_vertices(), 1), 200, {}, 100 + driver).best.final_value);
        best4.push_back(regstar(g, std::vector<int>(g.n_vertices(), 4), 200, {}, 100 + driver).best.final_value);
    }
    const double m1 = median(best1), m4 = median(best4);

    std::ifstream in(std::string(PATROL_DATA_DIR) + "/synthetic_atm18.json");
    std::stringstream text;
    text << in.rdbuf();
    const PatrollingGraph atm = parse_graph(text.str());
    const double a1 = regstar(atm, std::vector<int>(atm.n_vertices(), 1), 5, {}, 7).best.final_value;
    const double a2 = regstar(atm, std::vector<int>(atm.n_vertices(), 2), 5, {}, 7).best.final_value;
    const double secs = seconds_since(t0);
    return {m4 - m1 >= 10.0 && a2 > a1,
            fmt("office median best m=1 %.2f, m=4 %.2f (gain %.2f >= 10); synthetic 18-point best m=1 %.2f < m=2 "
                "%.2f; %.0f s",
                m1, m4, m4 - m1, a1, a2, secs)};
}

Outcome performance() {
    GridSpec spec;
    spec.n = 9;
    spec.k = 10;
    spec.seed = 9;
    const PatrollingGraph g = gen_grid(spec);
    const std::vector<int> mem(g.n_vertices(), 1);
    const StrategyIndex idx(g, mem);
    std::atomic<long> evaluations{0}, violations{0};
    OptimizerConfig cfg;
    cfg.on_evaluate = [&](const ProtectionTable& t) {
        ++evaluations;
        for (const auto& st : t.stats)
            if (st.heap_peak > idx.n_pairs() * static_cast<std::size_t>(st.lambda)) ++violations;
    };
    const auto t0 = Clock::now();
    const BestResult r = regstar(g, mem, 50, cfg, 3);
    const double secs = seconds_since(t0);
    // The forward search's real heap on the final strategy of every restart's winner.
    const ProtectionTable t = protection_table(g, idx, r.best.final_strategy);
    for (const auto& st : t.stats)
        if (st.heap_peak > idx.n_pairs() * static_cast<std::size_t>(st.lambda)) ++violations;
    return {secs <= 600.0 && violations == 0,
            fmt("9x9 grid, 10 targets, 50 restarts: %.1f s (<= 600 s), best %.2f; %ld evaluations, %ld heap-bound "
                "violations",
                secs, r.best.final_value, evaluations.load(), violations.load())};
}

Outcome monte_carlo() {
    const PatrollingGraph k2 = testing::k2(4, 4, 0.5);
    const StrategyIndex k2_idx = build_index(k2, 1);
    const Strategy k2_s = uniform_strategy(k2_idx);
    const PatrollingGraph office = gen_office(1);
    const StrategyIndex office_idx = build_index(office, 1);
    int pass = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t seed = derive_seed(77, trial);
        const bool use_k2 = trial % 2 == 0;
        const PatrollingGraph& g = use_k2 ? k2 : office;
        const StrategyIndex& idx = use_k2 ? k2_idx : office_idx;
        const Strategy s = use_k2 ? k2_s : random_strategy(idx, seed);
        std::mt19937_64 pick(seed);
        const int slot = static_cast<int>(pick() % idx.n_slots());
        const int ti = static_cast<int>(pick() % g.n_targets());
        const double exact = protection_table(g, idx, s, {.gradients = false}).value(slot, ti);
        const McEstimate m = mc_protection(g, idx, s, slot, g.target_vertices()[ti], 100000, seed);
        if (std::abs(m.mean - exact) <= 4.0 * m.std_error + 1e-9) ++pass;
    }
    return {pass * 100 >= 96 * trials, fmt("%d/%d trials within 4 standard errors (>= 96%%)", pass, trials)};
}

struct Criterion {
    const char* id;
    const char* name;
    Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {"1", "oracle equivalence", oracle_equivalence},
        {"2", "gradient exactness", gradient_exactness},
        {"3", "closed-form micro-cases", micro_cases},
        {"4a", "perfect protection, handcrafted tour", tour_value},
        {"4b", "perfect protection, restart search", tight_search},
        {"5", "memory trend", memory_trend},
        {"6", "performance sanity", performance},
        {"7", "Monte-Carlo consistency", monte_carlo},
    };
    std::set<std::string> wanted(argv + 1, argv + argc);
    int failed = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("[%s] criterion %s (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
