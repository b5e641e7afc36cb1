#include "ggd/csr_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "ggd/rng.hpp"

namespace ggd {

CsrGraph::CsrGraph(std::size_t num_nodes, std::vector<std::uint64_t> row_ptr, std::vector<NodeId> col_idx,
                   std::vector<double> weights)
    : num_nodes_(num_nodes), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), weights_(std::move(weights)) {
    if (num_nodes_ > std::numeric_limits<NodeId>::max()) throw RangeError("CsrGraph: too many nodes");
    if (row_ptr_.size() != num_nodes_ + 1) throw ShapeError("CsrGraph: row_ptr must have num_nodes+1 entries");
    if (row_ptr_.front() != 0) throw ShapeError("CsrGraph: row_ptr[0] must be 0");
    if (row_ptr_.back() != col_idx_.size()) throw ShapeError("CsrGraph: row_ptr[N] must equal nnz");
    if (!weights_.empty() && weights_.size() != col_idx_.size())
        throw ShapeError("CsrGraph: weights must align with col_idx");
    for (std::size_t i = 0; i < num_nodes_; ++i) {
        if (row_ptr_[i] > row_ptr_[i + 1]) throw ShapeError("CsrGraph: row_ptr must be non-decreasing");
        for (auto e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
            if (col_idx_[e] >= num_nodes_)
                throw RangeError("CsrGraph: column " + std::to_string(col_idx_[e]) + " out of range");
            if (e > row_ptr_[i] && col_idx_[e] <= col_idx_[e - 1])
                throw ShapeError("CsrGraph: row " + std::to_string(i) + " is not strictly increasing");
        }
    }
    for (double w : weights_) {
        if (!std::isfinite(w)) throw RangeError("CsrGraph: non-finite edge weight");
    }
}

CsrGraph CsrGraph::from_edges(std::size_t num_nodes, std::vector<std::pair<NodeId, NodeId>> edges, bool symmetrize) {
    if (symmetrize) {
        const std::size_t m = edges.size();
        edges.reserve(2 * m);
        for (std::size_t e = 0; e < m; ++e) edges.emplace_back(edges[e].second, edges[e].first);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<std::uint64_t> row_ptr(num_nodes + 1, 0);
    std::vector<NodeId> col_idx;
    col_idx.reserve(edges.size());
    for (const auto& [u, v] : edges) {
        if (u >= num_nodes || v >= num_nodes) throw RangeError("CsrGraph::from_edges: node id out of range");
        ++row_ptr[u + 1];
        col_idx.push_back(v);
    }
    for (std::size_t i = 0; i < num_nodes; ++i) row_ptr[i + 1] += row_ptr[i];
    return CsrGraph(num_nodes, std::move(row_ptr), std::move(col_idx));
}

bool CsrGraph::has_edge(NodeId i, NodeId j) const noexcept {
    auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
}

bool CsrGraph::is_symmetric() const {
    for (NodeId i = 0; i < num_nodes_; ++i) {
        auto nb = neighbors(i);
        auto w = edge_weights(i);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const NodeId j = nb[k];
            auto back = neighbors(j);
            auto it = std::lower_bound(back.begin(), back.end(), i);
            if (it == back.end() || *it != i) return false;
            if (weighted() && edge_weights(j)[static_cast<std::size_t>(it - back.begin())] != w[k]) return false;
        }
    }
    return true;
}

DenseMatrix64 CsrGraph::to_dense() const {
    DenseMatrix64 d(num_nodes_, num_nodes_);
    for (NodeId i = 0; i < num_nodes_; ++i) {
        auto nb = neighbors(i);
        auto w = edge_weights(i);
        for (std::size_t k = 0; k < nb.size(); ++k) d(i, nb[k]) = w.empty() ? 1.0 : w[k];
    }
    return d;
}

std::uint64_t CsrGraph::checksum() const {
    auto mix = [](std::uint64_t h, const void* p, std::size_t n) {
        return fnv1a64(std::string_view(static_cast<const char*>(p), n), h);
    };
    std::uint64_t h = fnv1a64("csr");
    const std::uint64_t n = num_nodes_;
    h = mix(h, &n, sizeof n);
    h = mix(h, row_ptr_.data(), row_ptr_.size() * sizeof(std::uint64_t));
    h = mix(h, col_idx_.data(), col_idx_.size() * sizeof(NodeId));
    h = mix(h, weights_.data(), weights_.size() * sizeof(double));
    return h;
}

}  // namespace ggd
