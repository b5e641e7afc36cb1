#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ggd/csr_graph.hpp"
#include "ggd/matrix.hpp"

namespace ggd {

/// Node feature matrix, one row per node.
using NodeFeatures = DenseMatrix;

struct EdgeListOptions {
    bool symmetrize = true;
    /// When set, ids are taken as-is and must lie in [0, num_nodes).
    /// Otherwise the distinct ids are remapped, in ascending order, to 0..N-1.
    std::optional<std::size_t> num_nodes;
};

struct EdgeList {
    CsrGraph graph;
    /// original_ids[dense_id] = id as written in the file.
    std::vector<std::int64_t> original_ids;
};

/// Whitespace-separated "src dst" lines; '#' lines and blank lines skipped.
EdgeList parse_edge_list(std::istream& in, const EdgeListOptions& opts = {});
EdgeList load_edge_list(const std::filesystem::path& path, const EdgeListOptions& opts = {});
/// One "src dst" line per stored (directed) entry, in CSR order.
void write_edge_list(const CsrGraph& g, std::ostream& out);
void save_edge_list(const CsrGraph& g, const std::filesystem::path& path);

/// Â = A + I. Existing self loops are kept once; weights of inserted loops are 1.
CsrGraph add_self_loops(const CsrGraph& g);
/// D^{-1/2} Â D^{-1/2}, with D the row sums of g (entry counts when unweighted).
/// Throws NumericError if any row is empty.
CsrGraph sym_normalize(const CsrGraph& g);
/// add_self_loops followed by sym_normalize.
CsrGraph normalized_adjacency(const CsrGraph& g);

/// L1 row normalisation; all-zero rows stay zero.
NodeFeatures row_normalize(const NodeFeatures& x);

// GGDF: "GGDF", u32 LE version 1, u64 LE rows, u64 LE cols, rows*cols f32 LE row-major.
void write_dense(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_dense(std::istream& in);
void save_features(const std::filesystem::path& path, const NodeFeatures& x);
NodeFeatures load_features(const std::filesystem::path& path);
/// Loads features and checks the row count against a graph.
NodeFeatures load_features(const std::filesystem::path& path, std::size_t expected_rows);

struct LabeledSplit {
    /// Class id per node, -1 for unlabeled nodes.
    std::vector<std::int32_t> labels;
    std::size_t num_classes = 0;
    std::vector<NodeId> train;
    std::vector<NodeId> val;
    std::vector<NodeId> test;

    std::size_t num_nodes() const noexcept { return labels.size(); }
    /// Throws if splits overlap, reference unlabeled nodes or ids out of range.
    void validate() const;
};

/// "node_id class_id split" lines, split in {train,val,test,none}.
LabeledSplit parse_labels(std::istream& in, std::size_t num_nodes);
LabeledSplit load_labels(const std::filesystem::path& path, std::size_t num_nodes);
void write_labels(const LabeledSplit& split, std::ostream& out);
void save_labels(const LabeledSplit& split, const std::filesystem::path& path);

/// FNV-1a over a file's bytes.
std::uint64_t file_checksum(const std::filesystem::path& path);

}  // namespace ggd
