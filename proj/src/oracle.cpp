#include "patrol/oracle.hpp"

#include <cmath>
#include <random>

#include "patrol/error.hpp"
#include "patrol/rng.hpp"

namespace patrol {

namespace {

struct Dfs {
    const PatrollingGraph& g;
    const StrategyIndex& index;
    const Strategy& s;
    VertexId target;
    int budget;
    double eps;
    PathSet& out;
    std::vector<int> path;
    std::size_t explored = 0;

    void visit(int pair, double prob, int visits, int time) {
        if (++explored > 100 * kPathLimit)
            throw NumericError("path enumeration exceeded the exploration limit");
        path.push_back(pair);
        const VertexId v = index.pair(pair).vertex;
        if (v == target) {
            ++visits;
            if (out.paths.size() >= kPathLimit)
                throw NumericError("path enumeration exceeded " + std::to_string(kPathLimit) +
                                   " paths");
            out.paths.push_back({path, prob, visits, time});
        }
        for (int e = index.row_begin(pair); e < index.row_end(pair); ++e) {
            if (!(s[e] > eps)) continue;
            const int t = time + g.edge(index.slot(e).edge).time;
            if (t > budget) continue;
            visit(index.slot(e).dst, prob * s[e], visits, t);
        }
        path.pop_back();
    }
};

}  // namespace

PathSet enumerate_paths(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& s,
                        int slot, VertexId target_vertex, double eps) {
    if (!g.is_target(target_vertex)) throw ValidationError("not a target: " + g.id(target_vertex));
    PathSet out;
    const Slot& sl = index.slot(slot);
    const int start = g.edge(sl.edge).time;
    const int budget = g.target(target_vertex).attack_time;
    if (start > budget) return out;
    Dfs dfs{g, index, s, target_vertex, budget, eps, out, {}};
    dfs.visit(sl.dst, 1.0, 0, start);
    return out;
}

double brute_protection(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& s,
                        int slot, VertexId target_vertex) {
    const Target& t = g.target(target_vertex);
    double total = 0.0;
    for (const PathRecord& p : enumerate_paths(g, index, s, slot, target_vertex, 0.0).paths)
        total += p.prob * t.cost * std::pow(1.0 - t.detection, p.visits - 1) * t.detection;
    return total;
}

std::vector<double> fd_gradient(const std::function<double(const Strategy&)>& f,
                                const Strategy& s, double h) {
    if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
    std::vector<double> out(s.size(), 0.0);
    Strategy x = s;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double up = f(x);
        x[i] = orig - h;
        const double down = f(x);
        x[i] = orig;
        if (!std::isfinite(up) || !std::isfinite(down))
            throw NumericError("non-finite function value in finite differences");
        out[i] = (up - down) / (2.0 * h);
    }
    return out;
}

McEstimate mc_protection(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& s,
                         int slot, VertexId target_vertex, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("sample count must be >= 1");
    const Target& tgt = g.target(target_vertex);
    const Slot& first = index.slot(slot);
    constexpr std::int64_t kBatch = 10'000;

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::int64_t b = 0; b * kBatch < n; ++b) {
        std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const std::int64_t count = std::min(kBatch, n - b * kBatch);
        for (std::int64_t i = 0; i < count; ++i) {
            int pair = first.dst;
            int elapsed = g.edge(first.edge).time;
            double payoff = 0.0;
            while (elapsed <= tgt.attack_time) {
                if (index.pair(pair).vertex == target_vertex && unif(rng) < tgt.detection) {
                    payoff = tgt.cost;
                    break;
                }
                const int begin = index.row_begin(pair);
                const int end = index.row_end(pair);
                if (begin == end) break;
                double u = unif(rng);
                int next = end - 1;
                for (int e = begin; e < end; ++e) {
                    if (u < s[e]) {
                        next = e;
                        break;
                    }
                    u -= s[e];
                }
                // Guard against rounding landing on a zero-probability tail slot.
                while (next > begin && !(s[next] > 0.0)) --next;
                elapsed += g.edge(index.slot(next).edge).time;
                pair = index.slot(next).dst;
            }
            sum += payoff;
            sum_sq += payoff * payoff;
        }
    }
    const double nn = static_cast<double>(n);
    McEstimate est;
    est.mean = sum / nn;
    if (n > 1) {
        const double var = std::max(0.0, (sum_sq - nn * est.mean * est.mean) / (nn - 1.0));
        est.std_error = std::sqrt(var / nn);
    }
    return est;
}

}  // namespace patrol
