#include "patrol/sparse.hpp"

#include <algorithm>

namespace patrol {

double SparseVector::get(int index) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, int i) { return e.first < i; });
    return (it != entries_.end() && it->first == index) ? it->second : 0.0;
}

void SparseVector::axpy(double a, const SparseVector& x) {
    if (x.entries_.empty() || a == 0.0) return;
    if (entries_.empty()) {
        entries_.reserve(x.entries_.size());
        for (const auto& [i, v] : x.entries_) entries_.emplace_back(i, a * v);
        return;
    }
    std::vector<Entry> merged;
    merged.reserve(entries_.size() + x.entries_.size());
    auto p = entries_.begin();
    auto q = x.entries_.begin();
    while (p != entries_.end() || q != x.entries_.end()) {
        if (q == x.entries_.end() || (p != entries_.end() && p->first < q->first)) {
            merged.push_back(*p++);
        } else if (p == entries_.end() || q->first < p->first) {
            merged.emplace_back(q->first, a * q->second);
            ++q;
        } else {
            merged.emplace_back(p->first, p->second + a * q->second);
            ++p;
            ++q;
        }
    }
    entries_.swap(merged);
}

void SparseVector::assign_scaled_plus_unit(double a, const SparseVector& x, int index, double b) {
    entries_.clear();
    entries_.reserve(x.entries_.size() + 1);
    bool placed = false;
    for (const auto& [i, v] : x.entries_) {
        if (!placed && index <= i) {
            if (index == i) {
                entries_.emplace_back(i, a * v + b);
                placed = true;
                continue;
            }
            entries_.emplace_back(index, b);
            placed = true;
        }
        entries_.emplace_back(i, a * v);
    }
    if (!placed) entries_.emplace_back(index, b);
}

void SparseVector::scale(double a) {
    for (auto& e : entries_) e.second *= a;
}

void SparseVector::add_to(std::span<double> dense, double a) const {
    for (const auto& [i, v] : entries_) dense[i] += a * v;
}

std::vector<double> SparseVector::to_dense(std::size_t n) const {
    std::vector<double> out(n, 0.0);
    add_to(out);
    return out;
}

}  // namespace patrol
