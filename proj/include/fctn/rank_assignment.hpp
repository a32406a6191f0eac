#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fctn/errors.hpp"
#include "fctn/tensor.hpp"

namespace fctn {

/// Unordered mode pair (i, j) with 1 <= i < j <= N.
using Edge = std::pair<int, int>;

/// All edges of the complete graph on N modes, ascending lexicographic.
inline std::vector<Edge> all_edges(int order) {
    std::vector<Edge> edges;
    for (int i = 1; i <= order; ++i)
        for (int j = i + 1; j <= order; ++j) edges.emplace_back(i, j);
    return edges;
}

/// Symmetric integer map on unordered mode pairs; the search variable of the
/// rank selection problem. N(N-1)/2 entries, all >= 1. Setting an entry to 1
/// drops the corresponding network edge.
class RankAssignment {
public:
    RankAssignment() : order_(0) {}

    explicit RankAssignment(int order, Index fill = 1)
        : order_(order), ranks_(static_cast<std::size_t>(order * (order - 1) / 2), fill) {
        if (order < 2) throw InvalidRank("RankAssignment needs order >= 2");
        if (fill < 1) throw InvalidRank("ranks must be >= 1");
    }

    int order() const { return order_; }
    int num_edges() const { return static_cast<int>(ranks_.size()); }

    /// Symmetric access: at(i, j) == at(j, i), 1-based, i != j.
    Index at(int i, int j) const { return ranks_[edge_index(i, j)]; }

    void set(int i, int j, Index r) {
        if (r < 1) throw InvalidRank("ranks must be >= 1");
        ranks_[edge_index(i, j)] = r;
    }

    std::vector<Edge> edges() const { return all_edges(order_); }

    /// Rank values in ascending lexicographic edge order.
    const std::vector<Index>& values() const { return ranks_; }

    bool operator==(const RankAssignment& o) const {
        return order_ == o.order_ && ranks_ == o.ranks_;
    }
    bool operator!=(const RankAssignment& o) const { return !(*this == o); }

    /// Lexicographic order on the edge-ordered value vector.
    bool operator<(const RankAssignment& o) const { return ranks_ < o.ranks_; }

    std::string to_string() const {
        std::string s;
        for (auto [i, j] : edges()) {
            if (!s.empty()) s += ", ";
            s += "R(" + std::to_string(i) + "," + std::to_string(j) +
                 ")=" + std::to_string(at(i, j));
        }
        return s;
    }

private:
    std::size_t edge_index(int i, int j) const {
        if (i == j || i < 1 || j < 1 || i > order_ || j > order_)
            throw InvalidRank("edge indices out of range");
        if (i > j) std::swap(i, j);
        // edges (1,2),(1,3),...,(1,N),(2,3),... in ascending lexicographic order
        const std::size_t before = static_cast<std::size_t>((i - 1) * order_ - i * (i - 1) / 2);
        return before + static_cast<std::size_t>(j - i - 1);
    }

    int order_;
    std::vector<Index> ranks_;
};

} // namespace fctn
