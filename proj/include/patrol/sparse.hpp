#pragma once

#include <span>
#include <utility>
#include <vector>

namespace patrol {

/// Sparse real vector over slot ids, kept sorted by index with no duplicate keys.
class SparseVector {
public:
    using Entry = std::pair<int, double>;

    SparseVector() = default;

    bool empty() const { return entries_.empty(); }
    std::size_t nnz() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    double get(int index) const;

    /// this += a * x, merging by sorted-key union.
    void axpy(double a, const SparseVector& x);
    /// this = a * x + unit(index) * b, reusing storage.
    void assign_scaled_plus_unit(double a, const SparseVector& x, int index, double b);
    void scale(double a);

    void add_to(std::span<double> dense, double a = 1.0) const;
    std::vector<double> to_dense(std::size_t n) const;

private:
    std::vector<Entry> entries_;
};

}  // namespace patrol
