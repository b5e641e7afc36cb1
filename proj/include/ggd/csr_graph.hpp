#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ggd/matrix.hpp"

namespace ggd {

using NodeId = std::uint32_t;

/// Non-owning view of a (possibly rectangular) CSR matrix. An empty weight
/// span means every stored entry has weight 1.
struct CsrView {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::span<const std::uint64_t> row_ptr;
    std::span<const NodeId> col_idx;
    std::span<const double> weights;

    bool weighted() const noexcept { return !weights.empty(); }
};

/// Square adjacency in canonical CSR form: column indices strictly increasing
/// within each row (no duplicates). Immutable once constructed.
class CsrGraph {
public:
    CsrGraph() : row_ptr_{0} {}
    /// Validates every invariant; throws ShapeError / RangeError on violation.
    CsrGraph(std::size_t num_nodes, std::vector<std::uint64_t> row_ptr, std::vector<NodeId> col_idx,
             std::vector<double> weights = {});

    /// Builds a canonical graph from an arbitrary edge list (sorts, dedups).
    static CsrGraph from_edges(std::size_t num_nodes, std::vector<std::pair<NodeId, NodeId>> edges,
                               bool symmetrize);

    std::size_t num_nodes() const noexcept { return num_nodes_; }
    std::size_t num_edges() const noexcept { return col_idx_.size(); }
    bool weighted() const noexcept { return !weights_.empty(); }

    std::size_t degree(NodeId i) const noexcept { return row_ptr_[i + 1] - row_ptr_[i]; }
    std::span<const NodeId> neighbors(NodeId i) const noexcept {
        return {col_idx_.data() + row_ptr_[i], degree(i)};
    }
    std::span<const double> edge_weights(NodeId i) const noexcept {
        if (weights_.empty()) return {};
        return {weights_.data() + row_ptr_[i], degree(i)};
    }
    bool has_edge(NodeId i, NodeId j) const noexcept;

    const std::vector<std::uint64_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<NodeId>& col_idx() const noexcept { return col_idx_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    CsrView view() const noexcept {
        return {num_nodes_, num_nodes_, row_ptr_, col_idx_, weights_};
    }

    bool is_symmetric() const;
    /// Dense copy; missing entries are 0, unweighted entries are 1.
    DenseMatrix64 to_dense() const;
    /// Order-sensitive checksum over structure and weights.
    std::uint64_t checksum() const;

    friend bool operator==(const CsrGraph& a, const CsrGraph& b) {
        return a.num_nodes_ == b.num_nodes_ && a.row_ptr_ == b.row_ptr_ && a.col_idx_ == b.col_idx_ &&
               a.weights_ == b.weights_;
    }

private:
    std::size_t num_nodes_ = 0;
    std::vector<std::uint64_t> row_ptr_;
    std::vector<NodeId> col_idx_;
    std::vector<double> weights_;
};

}  // namespace ggd
