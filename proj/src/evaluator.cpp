#include "patrol/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <thread>

#include "patrol/error.hpp"

namespace patrol {

double eval_term(double alpha, double beta, int visits) {
    if (!(alpha > 0.0)) throw ValidationError("eval_term: alpha must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) throw ValidationError("eval_term: beta out of range (0,1]");
    if (visits < 1) throw ValidationError("eval_term: visits must be >= 1");
    return alpha * std::pow(1.0 - beta, visits - 1) * beta;
}

int ProtectionTable::lambda_max() const {
    int m = 0;
    for (const auto& s : stats) m = std::max(m, s.lambda);
    return m;
}

std::size_t ProtectionTable::heap_peak() const {
    std::size_t m = 0;
    for (const auto& s : stats) m = std::max(m, s.heap_peak);
    return m;
}

namespace {

void require_normalized(const StrategyIndex& index, const Strategy& s) {
    if (s.size() != index.n_slots())
        throw ValidationError("strategy has " + std::to_string(s.size()) + " entries, index has " +
                              std::to_string(index.n_slots()) + " slots");
    for (double x : s.probs)
        if (!std::isfinite(x) || x < 0.0) throw NumericError("strategy has a negative or non-finite entry");
    if (max_row_defect(index, s) > 1e-6) throw ValidationError("strategy is not normalized");
}

struct HeapItem {
    int t = 0;
    std::uint64_t seq = 0;
    int pair = 0;
    double p = 0.0;
    SparseVector grad;
};

struct LaterFirst {
    bool operator()(const HeapItem& a, const HeapItem& b) const {
        return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
};

// Min-heap of path classes keyed by traversal time. In coalescing mode items with the
// same (time, pair) are merged on insert, so at most n_pairs items share one time.
class PathHeap {
public:
    explicit PathHeap(bool coalesce) : coalesce_(coalesce) {}

    bool empty() const { return size_ == 0; }
    std::size_t size() const { return size_; }

    int peek_time() const { return coalesce_ ? buckets_.begin()->first : heap_.top().t; }

    void insert(int pair, int t, double p, SparseVector&& grad) {
        if (coalesce_) {
            auto& bucket = buckets_[t];
            auto [it, fresh] = bucket.try_emplace(pair);
            if (fresh) {
                it->second.p = p;
                it->second.grad = std::move(grad);
                ++size_;
            } else {
                it->second.p += p;
                it->second.grad.axpy(1.0, grad);
            }
            return;
        }
        heap_.push(HeapItem{t, seq_++, pair, p, std::move(grad)});
        ++size_;
    }

    // Pops every item with time t, calling f(pair, p, grad) in pop order.
    template <class F>
    std::size_t pop_layer(int t, F&& f) {
        std::size_t n = 0;
        if (coalesce_) {
            auto it = buckets_.begin();
            for (auto& [pair, item] : it->second) {
                f(pair, item.p, item.grad);
                ++n;
            }
            buckets_.erase(it);
        } else {
            while (!heap_.empty() && heap_.top().t == t) {
                // top() is const; the item is discarded right after use.
                auto& item = const_cast<HeapItem&>(heap_.top());
                f(item.pair, item.p, item.grad);
                heap_.pop();
                ++n;
            }
        }
        size_ -= n;
        return n;
    }

private:
    struct Acc {
        double p = 0.0;
        SparseVector grad;
    };
    bool coalesce_;
    std::size_t size_ = 0;
    std::uint64_t seq_ = 0;
    std::map<int, std::map<int, Acc>> buckets_;
    std::priority_queue<HeapItem, std::vector<HeapItem>, LaterFirst> heap_;
};

void search_target(const PatrollingGraph& g, const StrategyIndex& index, const Strategy& s,
                   int target_pos, const EvalOptions& opts, ProtectionTable& table) {
    const VertexId tau = g.target_vertices()[target_pos];
    const Target& tgt = g.target(tau);
    const int budget = tgt.attack_time;
    const double keep = 1.0 - tgt.detection;
    const std::size_t row = static_cast<std::size_t>(target_pos) * table.n_slots;
    SearchStats& st = table.stats[target_pos];

    PathHeap heap(opts.coalesce);
    for (int m = 0; m < index.mem(tau); ++m)
        heap.insert(index.pair_id(tau, m), 0, tgt.cost * tgt.detection, SparseVector{});
    st.heap_peak = heap.size();

    std::vector<double> V(index.n_pairs(), 0.0);
    std::vector<SparseVector> G(opts.gradients ? index.n_pairs() : 0);
    std::vector<char> touched_flag(index.n_pairs(), 0);
    std::vector<int> touched;

    while (!heap.empty()) {
        const int layer = heap.peek_time();
        st.layers.push_back(layer);
        st.popped += heap.pop_layer(layer, [&](int pair, double p, SparseVector& grad) {
            V[pair] += p;
            if (opts.gradients) G[pair].axpy(1.0, grad);
            if (!touched_flag[pair]) {
                touched_flag[pair] = 1;
                touched.push_back(pair);
            }
        });
        std::sort(touched.begin(), touched.end());

        for (int h : touched) {
            if (!(V[h] > 0.0)) continue;
            for (int e : index.in_slots(h)) {
                const Slot& sl = index.slot(e);
                const int t = layer + g.edge(sl.edge).time;
                if (t > budget) continue;
                table.values[row + e] += V[h];
                if (opts.gradients) table.grads[row + e].axpy(1.0, G[h]);
                const double se = s[e];
                if (!(se > 0.0)) continue;
                const double factor = index.pair(sl.src).vertex == tau ? keep : 1.0;
                const double p = V[h] * se * factor;
                if (!(p > 0.0)) continue;
                SparseVector der;
                if (opts.gradients) {
                    der.assign_scaled_plus_unit(se, G[h], e, V[h]);
                    if (factor != 1.0) der.scale(factor);
                }
                heap.insert(sl.src, t, p, std::move(der));
            }
        }
        st.heap_peak = std::max(st.heap_peak, heap.size());

        for (int h : touched) {
            V[h] = 0.0;
            if (opts.gradients) G[h] = SparseVector{};
            touched_flag[h] = 0;
        }
        touched.clear();
    }
    st.lambda = static_cast<int>(st.layers.size());
}

ProtectionTable empty_table(const PatrollingGraph& g, const StrategyIndex& index, bool grads) {
    ProtectionTable t;
    t.n_slots = index.n_slots();
    t.n_targets = g.n_targets();
    t.values.assign(t.n_slots * t.n_targets, 0.0);
    if (grads) t.grads.resize(t.n_slots * t.n_targets);
    t.stats.resize(t.n_targets);
    return t;
}

}  // namespace

ProtectionTable protection_table(const PatrollingGraph& g, const StrategyIndex& index,
                                 const Strategy& s, const EvalOptions& opts) {
    if (opts.check_normalized) {
        require_normalized(index, s);
    } else if (s.size() != index.n_slots()) {
        throw ValidationError("strategy size does not match the index");
    }
    ProtectionTable table = empty_table(g, index, opts.gradients);
    const int n = static_cast<int>(g.n_targets());
    const int threads = std::clamp(opts.threads, 1, std::max(1, n));
    if (threads == 1) {
        for (int t = 0; t < n; ++t) search_target(g, index, s, t, opts, table);
        return table;
    }
    // Each target writes only its own table row and stats entry.
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (int t = w; t < n; t += threads) search_target(g, index, s, t, opts, table);
        });
    pool.clear();
    return table;
}

RvalReport hard_value(const ProtectionTable& table, const PatrollingGraph& g,
                      const StrategyIndex& index, const Strategy& s, double eps_support,
                      double report_margin) {
    RvalReport r;
    const auto& targets = g.target_vertices();
    double worst = -std::numeric_limits<double>::infinity();
    for (int e = 0; e < static_cast<int>(index.n_slots()); ++e) {
        if (s[e] < eps_support || !(s[e] > 0.0)) continue;
        for (int t = 0; t < static_cast<int>(targets.size()); ++t) {
            const double loss = g.target(targets[t]).cost - table.value(e, t);
            if (loss > worst) {
                worst = loss;
                r.worst_slot = e;
                r.worst_target = t;
            }
        }
    }
    if (r.worst_slot < 0) throw NumericError("strategy has no supported slot");
    r.worst_loss = worst;
    r.value = g.alpha_max() - worst;
    for (int e = 0; e < static_cast<int>(index.n_slots()); ++e) {
        if (s[e] < eps_support || !(s[e] > 0.0)) continue;
        for (int t = 0; t < static_cast<int>(targets.size()); ++t) {
            const double loss = g.target(targets[t]).cost - table.value(e, t);
            if (loss >= worst - report_margin) r.candidates.push_back({e, t, loss, 0.0});
        }
    }
    std::stable_sort(r.candidates.begin(), r.candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.loss > b.loss; });
    return r;
}

std::vector<Candidate> soft_candidates(const ProtectionTable& table, const PatrollingGraph& g,
                                       const StrategyIndex& index, const Strategy& s,
                                       const SofteningConfig& cfg) {
    if (!(cfg.temperature > 0.0) || !(cfg.margin >= 0.0) || !std::isfinite(cfg.margin) ||
        !std::isfinite(cfg.temperature) || !(cfg.eps_support >= 0.0 && cfg.eps_support < 1.0))
        throw ValidationError("invalid softening configuration");
    RvalReport r = hard_value(table, g, index, s, cfg.eps_support, cfg.margin);
    if (cfg.margin == 0.0) return {Candidate{r.worst_slot, r.worst_target, r.worst_loss, 1.0}};
    std::vector<Candidate> c;
    c.reserve(r.candidates.size());
    double total = 0.0;
    for (const Candidate& k : r.candidates) {
        const double w = std::exp((k.loss - r.worst_loss) / cfg.temperature);
        c.push_back({k.slot, k.target, k.loss, w});
        total += w;
    }
    // Deterministic order for the reduction: by target, then slot.
    std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
        return a.target != b.target ? a.target < b.target : a.slot < b.slot;
    });
    for (auto& k : c) k.weight /= total;
    return c;
}

SoftResult soft_value_gradient(const ProtectionTable& table, const PatrollingGraph& g,
                               const StrategyIndex& index, const Strategy& s,
                               const SofteningConfig& cfg) {
    if (!table.has_gradients()) throw ValidationError("protection table has no gradients");
    SoftResult out;
    out.report = hard_value(table, g, index, s, cfg.eps_support, cfg.margin);
    out.value = out.report.value;
    out.gradient.assign(index.n_slots(), 0.0);
    for (const Candidate& c : soft_candidates(table, g, index, s, cfg))
        table.grad(c.slot, c.target).add_to(out.gradient, c.weight);
    return out;
}

AdjointEvaluator::AdjointEvaluator(const PatrollingGraph& g, const StrategyIndex& index)
    : g_(&g), index_(&index), table_(empty_table(g, index, false)) {
    for (VertexId tau : g.target_vertices()) budget_.push_back(g.target(tau).attack_time);
    layers_.resize(g.n_targets());
    for (std::size_t t = 0; t < g.n_targets(); ++t)
        layers_[t].assign(static_cast<std::size_t>(budget_[t] + 1) * index.n_pairs(), 0.0);
}

const ProtectionTable& AdjointEvaluator::evaluate(const Strategy& s) {
    const PatrollingGraph& g = *g_;
    const StrategyIndex& index = *index_;
    require_normalized(index, s);
    sigma_ = s.probs;
    std::fill(table_.values.begin(), table_.values.end(), 0.0);
    const std::size_t np = index.n_pairs();

    for (int tp = 0; tp < static_cast<int>(g.n_targets()); ++tp) {
        const VertexId tau = g.target_vertices()[tp];
        const Target& tgt = g.target(tau);
        const int budget = budget_[tp];
        const double keep = 1.0 - tgt.detection;
        double* values = table_.values.data() + static_cast<std::size_t>(tp) * table_.n_slots;
        std::vector<double>& L = layers_[tp];
        std::fill(L.begin(), L.end(), 0.0);
        SearchStats& st = table_.stats[tp];
        st = SearchStats{};

        std::vector<std::size_t> pending_at(budget + 1, 0);
        std::size_t pending = 0;
        for (int m = 0; m < index.mem(tau); ++m) {
            L[index.pair_id(tau, m)] = tgt.cost * tgt.detection;
            ++pending_at[0];
            ++pending;
        }
        st.heap_peak = pending;

        // Same visiting order as the coalescing heap: layers ascending, pairs ascending.
        for (int layer = 0; layer <= budget; ++layer) {
            if (pending_at[layer] == 0) continue;
            st.layers.push_back(layer);
            st.popped += pending_at[layer];
            pending -= pending_at[layer];
            const double* V = L.data() + static_cast<std::size_t>(layer) * np;
            for (int h = 0; h < static_cast<int>(np); ++h) {
                const double vh = V[h];
                if (!(vh > 0.0)) continue;
                for (int e : index.in_slots(h)) {
                    const Slot& sl = index.slot(e);
                    const int t = layer + g.edge(sl.edge).time;
                    if (t > budget) continue;
                    values[e] += vh;
                    const double se = sigma_[e];
                    if (!(se > 0.0)) continue;
                    const double factor = index.pair(sl.src).vertex == tau ? keep : 1.0;
                    const double p = vh * se * factor;
                    if (!(p > 0.0)) continue;
                    double& cell = L[static_cast<std::size_t>(t) * np + sl.src];
                    if (cell == 0.0) {
                        ++pending_at[t];
                        ++pending;
                    }
                    cell += p;
                }
            }
            st.heap_peak = std::max(st.heap_peak, pending);
        }
        st.lambda = static_cast<int>(st.layers.size());
    }
    return table_;
}

std::vector<double> AdjointEvaluator::weighted_gradient(std::span<const Candidate> candidates) const {
    const PatrollingGraph& g = *g_;
    const StrategyIndex& index = *index_;
    const std::size_t np = index.n_pairs();
    std::vector<double> grad(index.n_slots(), 0.0);

    // Seeds per target: for each head pair, (budget left after the committed edge, weight).
    std::vector<std::vector<std::vector<std::pair<int, double>>>> seeds(g.n_targets());
    for (const Candidate& c : candidates) {
        if (c.weight == 0.0) continue;
        auto& per_pair = seeds[c.target];
        if (per_pair.empty()) per_pair.resize(np);
        const Slot& sl = index.slot(c.slot);
        per_pair[sl.dst].emplace_back(budget_[c.target] - g.edge(sl.edge).time, c.weight);
    }

    std::vector<double> adj;
    for (int tp = 0; tp < static_cast<int>(g.n_targets()); ++tp) {
        if (seeds[tp].empty()) continue;
        const VertexId tau = g.target_vertices()[tp];
        const double keep = 1.0 - g.target(tau).detection;
        const int budget = budget_[tp];
        const std::vector<double>& L = layers_[tp];
        adj.assign(L.size(), 0.0);
        const auto& layers = table_.stats[tp].layers;
        for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
            const int layer = *it;
            const double* V = L.data() + static_cast<std::size_t>(layer) * np;
            double* A = adj.data() + static_cast<std::size_t>(layer) * np;
            for (int h = 0; h < static_cast<int>(np); ++h) {
                const double vh = V[h];
                if (!(vh > 0.0)) continue;
                double a = 0.0;
                for (const auto& [left, w] : seeds[tp][h])
                    if (layer <= left) a += w;
                for (int e : index.in_slots(h)) {
                    const Slot& sl = index.slot(e);
                    const int t = layer + g.edge(sl.edge).time;
                    if (t > budget) continue;
                    const double se = sigma_[e];
                    if (!(se > 0.0)) continue;
                    const double factor = index.pair(sl.src).vertex == tau ? keep : 1.0;
                    const double up = adj[static_cast<std::size_t>(t) * np + sl.src] * factor;
                    if (up == 0.0) continue;
                    a += se * up;
                    grad[e] += vh * up;
                }
                A[h] = a;
            }
        }
    }
    return grad;
}

std::vector<std::string> evaluation_warnings(const StrategyIndex& index, const Strategy& s,
                                             double eps_support) {
    std::vector<std::string> out;
    const int np = static_cast<int>(index.n_pairs());
    std::vector<std::vector<int>> fwd(np), bwd(np);
    for (int e = 0; e < static_cast<int>(index.n_slots()); ++e) {
        if (s[e] < eps_support || !(s[e] > 0.0)) continue;
        fwd[index.slot(e).src].push_back(index.slot(e).dst);
        bwd[index.slot(e).dst].push_back(index.slot(e).src);
    }
    auto reaches_all = [np](const std::vector<std::vector<int>>& adj) {
        std::vector<char> seen(np, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : adj[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    stack.push_back(w);
                }
        }
        return count == np;
    };
    if (np > 0 && !(reaches_all(fwd) && reaches_all(bwd)))
        out.emplace_back("supported pair graph is not strongly connected; rval is a lower bound");
    if (!is_deterministic_update(index, s, eps_support))
        out.emplace_back("strategy is not deterministic-update; rval is a lower bound");
    return out;
}

nlohmann::json report_to_json(const PatrollingGraph& g, const StrategyIndex& index,
                              const ProtectionTable& table, const RvalReport& report) {
    using nlohmann::json;
    auto pair_json = [&](int p) {
        return json::array({g.id(index.pair(p).vertex), index.pair(p).memory + 1});
    };
    auto edge_json = [&](int slot) {
        return json::array({pair_json(index.slot(slot).src), pair_json(index.slot(slot).dst)});
    };
    const auto& targets = g.target_vertices();
    json candidates = json::array();
    for (const Candidate& c : report.candidates)
        candidates.push_back({{"edge", edge_json(c.slot)},
                              {"target", g.id(targets[c.target])},
                              {"loss", c.loss}});
    return {{"rval", report.value},
            {"worst_case",
             {{"edge", edge_json(report.worst_slot)},
              {"target", g.id(targets[report.worst_target])}}},
            {"candidates", std::move(candidates)},
            {"stats", {{"lambda_max", table.lambda_max()}, {"heap_peak", table.heap_peak()}}}};
}

}  // namespace patrol
