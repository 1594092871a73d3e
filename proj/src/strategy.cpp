#include "patrol/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "patrol/error.hpp"

namespace patrol {

StrategyIndex::StrategyIndex(const PatrollingGraph& g, std::vector<int> mem) : mem_(std::move(mem)) {
    if (mem_.size() != g.n_vertices())
        throw ValidationError("memory assignment must cover every vertex");
    pair_offset_.resize(mem_.size());
    for (VertexId v = 0; v < static_cast<VertexId>(mem_.size()); ++v) {
        if (mem_[v] < 1)
            throw ValidationError("memory size must be >= 1 at vertex " + g.id(v));
        pair_offset_[v] = static_cast<int>(pairs_.size());
        for (int m = 0; m < mem_[v]; ++m) pairs_.push_back({v, m});
    }
    row_begin_.reserve(pairs_.size() + 1);
    in_slots_.resize(pairs_.size());
    for (int p = 0; p < static_cast<int>(pairs_.size()); ++p) {
        row_begin_.push_back(static_cast<int>(slots_.size()));
        for (int e : g.out_edges(pairs_[p].vertex)) {
            const VertexId to = g.edge(e).to;
            for (int m = 0; m < mem_[to]; ++m) {
                const int dst = pair_offset_[to] + m;
                in_slots_[dst].push_back(static_cast<int>(slots_.size()));
                slots_.push_back({p, dst, e});
            }
        }
    }
    row_begin_.push_back(static_cast<int>(slots_.size()));
}

int StrategyIndex::find_slot(int src_pair, int dst_pair) const {
    for (int s = row_begin(src_pair); s < row_end(src_pair); ++s)
        if (slots_[s].dst == dst_pair) return s;
    return -1;
}

StrategyIndex build_index(const PatrollingGraph& g, const std::vector<int>& mem) {
    return StrategyIndex(g, mem);
}

StrategyIndex build_index(const PatrollingGraph& g, int uniform_mem) {
    return StrategyIndex(g, std::vector<int>(g.n_vertices(), uniform_mem));
}

NormJacobian::NormJacobian(const StrategyIndex& index) {
    offset_.reserve(index.n_rows() + 1);
    std::size_t total = 0;
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r) {
        offset_.push_back(total);
        const int w = index.row_width(r);
        width_.push_back(w);
        total += static_cast<std::size_t>(w) * static_cast<std::size_t>(w);
    }
    offset_.push_back(total);
    data_.assign(total, 0.0);
}

double NormJacobian::at(const StrategyIndex& index, int row, int i, int j) const {
    const int b = index.row_begin(row);
    return data_[offset_[row] + static_cast<std::size_t>((i - b) * width_[row] + (j - b))];
}

std::span<double> NormJacobian::block(int row) {
    return {data_.data() + offset_[row], offset_[row + 1] - offset_[row]};
}

std::span<const double> NormJacobian::block(int row) const {
    return {data_.data() + offset_[row], offset_[row + 1] - offset_[row]};
}

std::vector<double> NormJacobian::pullback(const StrategyIndex& index,
                                           std::span<const double> grad) const {
    std::vector<double> out(index.n_slots(), 0.0);
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r) {
        const int b = index.row_begin(r);
        const int w = width_[r];
        const double* J = data_.data() + offset_[r];
        for (int i = 0; i < w; ++i) {
            const double gi = grad[b + i];
            if (gi == 0.0) continue;
            for (int j = 0; j < w; ++j) out[b + j] += gi * J[i * w + j];
        }
    }
    return out;
}

Strategy random_strategy(const StrategyIndex& index, std::uint64_t seed) {
    // Symmetric Dirichlet(1) per row via normalized exponentials.
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    Strategy s{std::vector<double>(index.n_slots(), 0.0)};
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r) {
        double sum = 0.0;
        for (int i = index.row_begin(r); i < index.row_end(r); ++i) {
            double x = expo(rng);
            while (!(x > 0.0)) x = expo(rng);
            s[i] = x;
            sum += x;
        }
        for (int i = index.row_begin(r); i < index.row_end(r); ++i) s[i] /= sum;
    }
    return s;
}

Strategy uniform_strategy(const StrategyIndex& index) {
    Strategy s{std::vector<double>(index.n_slots(), 0.0)};
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r)
        for (int i = index.row_begin(r); i < index.row_end(r); ++i)
            s[i] = 1.0 / index.row_width(r);
    return s;
}

namespace {

double crop(double x) { return std::clamp(x, 0.0, 1.0); }

// Exclusive interior: the kinks at 0 and 1 get derivative 0.
double crop_slope(double x) { return (x > 0.0 && x < 1.0) ? 1.0 : 0.0; }

// Scales cropped[b..e) onto the simplex, writing values and the Jacobian block
// (w x w, row-major). Entries listed in `skip` are excluded (set to 0).
void scale_row(std::span<const double> raw, std::span<double> out, std::span<double> J, int skip) {
    const int w = static_cast<int>(raw.size());
    double sum = 0.0;
    for (int i = 0; i < w; ++i)
        if (i != skip) sum += crop(raw[i]);
    std::fill(J.begin(), J.end(), 0.0);
    if (!(sum > 0.0)) {
        const int n = skip >= 0 ? w - 1 : w;
        for (int i = 0; i < w; ++i) out[i] = (i == skip || n == 0) ? 0.0 : 1.0 / n;
        return;
    }
    for (int i = 0; i < w; ++i) {
        if (i == skip) {
            out[i] = 0.0;
            continue;
        }
        const double ci = crop(raw[i]);
        out[i] = ci / sum;
        for (int j = 0; j < w; ++j) {
            if (j == skip) continue;
            const double dj = crop_slope(raw[j]);
            if (dj == 0.0) continue;
            J[i * w + j] = ((i == j ? sum : 0.0) - ci) / (sum * sum) * dj;
        }
    }
}

}  // namespace

Normalized normalize_full(const Strategy& raw, const StrategyIndex& index) {
    Normalized res{Strategy{std::vector<double>(index.n_slots(), 0.0)}, NormJacobian(index)};
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r) {
        const int b = index.row_begin(r);
        const int w = index.row_width(r);
        if (w == 0) continue;
        scale_row(std::span<const double>(raw.probs).subspan(b, w),
                  std::span<double>(res.strategy.probs).subspan(b, w), res.jacobian.block(r), -1);
    }
    return res;
}

std::vector<int> default_pivots(const StrategyIndex& index) {
    std::vector<int> p(index.n_rows(), -1);
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r)
        if (index.row_width(r) > 0) p[r] = index.row_end(r) - 1;
    return p;
}

Normalized normalize_pivot(const Strategy& raw, const StrategyIndex& index,
                           std::span<const int> pivots) {
    if (pivots.size() != index.n_rows())
        throw ValidationError("pivot selection must name one slot per row");
    Normalized res{Strategy{std::vector<double>(index.n_slots(), 0.0)}, NormJacobian(index)};
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r) {
        const int b = index.row_begin(r);
        const int w = index.row_width(r);
        if (w == 0) continue;
        const int p = pivots[r] - b;
        if (p < 0 || p >= w) throw ValidationError("pivot outside its row");
        auto in = std::span<const double>(raw.probs).subspan(b, w);
        auto out = std::span<double>(res.strategy.probs).subspan(b, w);
        auto J = res.jacobian.block(r);

        double rest = 0.0;
        for (int i = 0; i < w; ++i)
            if (i != p) rest += crop(in[i]);
        if (rest > 1.0) {
            scale_row(in, out, J, p);
            continue;
        }
        for (int i = 0; i < w; ++i) {
            if (i == p) continue;
            out[i] = crop(in[i]);
            const double di = crop_slope(in[i]);
            J[i * w + i] = di;
            J[p * w + i] = -di;
        }
        out[p] = 1.0 - rest;
    }
    return res;
}

bool is_deterministic_update(const StrategyIndex& index, const Strategy& s, double eps) {
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r) {
        // Slots of one outgoing edge are contiguous within the row.
        int current_edge = -1;
        int count = 0;
        for (int i = index.row_begin(r); i < index.row_end(r); ++i) {
            if (index.slot(i).edge != current_edge) {
                current_edge = index.slot(i).edge;
                count = 0;
            }
            if (s[i] > eps && ++count > 1) return false;
        }
    }
    return true;
}

double max_row_defect(const StrategyIndex& index, const Strategy& s) {
    double worst = 0.0;
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r) {
        if (index.row_width(r) == 0) continue;
        double sum = 0.0;
        for (int i = index.row_begin(r); i < index.row_end(r); ++i) sum += s[i];
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

nlohmann::json strategy_to_json(const PatrollingGraph& g, const StrategyIndex& index,
                                const Strategy& s) {
    using nlohmann::json;
    json mem = json::object();
    for (VertexId v = 0; v < static_cast<VertexId>(g.n_vertices()); ++v) mem[g.id(v)] = index.mem(v);
    json rows = json::array();
    for (int r = 0; r < static_cast<int>(index.n_rows()); ++r) {
        const MemPair& from = index.pair(r);
        json to = json::array();
        for (int i = index.row_begin(r); i < index.row_end(r); ++i) {
            const MemPair& dst = index.pair(index.slot(i).dst);
            to.push_back(json::array({g.id(dst.vertex), dst.memory + 1, s[i]}));
        }
        rows.push_back({{"from", json::array({g.id(from.vertex), from.memory + 1})}, {"to", to}});
    }
    return {{"mem", std::move(mem)}, {"rows", std::move(rows)}};
}

namespace {

int parse_pair(const PatrollingGraph& g, const StrategyIndex& index, const nlohmann::json& j) {
    if (!j.is_array() || j.size() < 2 || !j[0].is_string() || !j[1].is_number_integer())
        throw ValidationError("pair must be [vertex, memory]");
    const VertexId v = g.vertex(j[0].get<std::string>());
    const int m = j[1].get<int>();
    if (m < 1 || m > index.mem(v))
        throw ValidationError("memory element " + std::to_string(m) + " out of range at vertex " +
                              g.id(v));
    return index.pair_id(v, m - 1);
}

}  // namespace

std::pair<StrategyIndex, Strategy> strategy_from_json(const PatrollingGraph& g,
                                                      const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("mem") || !doc["mem"].is_object())
        throw ValidationError("strategy document needs a \"mem\" object");
    if (!doc.contains("rows") || !doc["rows"].is_array())
        throw ValidationError("strategy document needs a \"rows\" array");
    std::vector<int> mem(g.n_vertices(), 0);
    for (const auto& [id, m] : doc["mem"].items()) {
        if (!m.is_number_integer()) throw ValidationError("mem of " + id + " must be an integer");
        mem[g.vertex(id)] = m.get<int>();
    }
    for (VertexId v = 0; v < static_cast<VertexId>(g.n_vertices()); ++v)
        if (mem[v] == 0 && !doc["mem"].contains(g.id(v)))
            throw ValidationError("mem missing vertex " + g.id(v));
    StrategyIndex index(g, mem);
    Strategy s{std::vector<double>(index.n_slots(), 0.0)};
    for (const auto& row : doc["rows"]) {
        if (!row.is_object() || !row.contains("from") || !row.contains("to") || !row["to"].is_array())
            throw ValidationError("strategy row needs \"from\" and \"to\"");
        const int src = parse_pair(g, index, row["from"]);
        for (const auto& entry : row["to"]) {
            if (!entry.is_array() || entry.size() != 3 || !entry[2].is_number())
                throw ValidationError("row entry must be [vertex, memory, prob]");
            const int dst = parse_pair(g, index, entry);
            const int slot = index.find_slot(src, dst);
            if (slot < 0)
                throw ValidationError("no edge " + g.id(index.pair(src).vertex) + "->" +
                                      g.id(index.pair(dst).vertex));
            s[slot] = entry[2].get<double>();
        }
    }
    return {std::move(index), std::move(s)};
}

}  // namespace patrol
