#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ggd/csr_graph.hpp"
#include "ggd/graph_store.hpp"
#include "ggd/rng.hpp"

namespace ggd {

struct AugmentConfig {
    bool enabled = false;
    double drop_edge_p = 0.2;
    double drop_feat_p = 0.2;

    void validate() const;
};

/// Uniform random permutation of 0..n-1 (Fisher-Yates).
std::vector<NodeId> random_permutation(std::size_t n, Rng& rng);

struct Shuffled {
    NodeFeatures features;
    /// features.row(i) == input.row(perm[i])
    std::vector<NodeId> perm;
};

/// Corruption: rows of x in a uniformly random order. Requires >= 2 rows.
Shuffled shuffle_features(const NodeFeatures& x, Rng& rng);
/// Same, with a caller-supplied permutation.
Shuffled shuffle_features(const NodeFeatures& x, std::span<const NodeId> perm);

/// Keeps each undirected edge with probability 1 - p; both directions of an
/// edge share one decision and self loops always survive.
CsrGraph drop_edges(const CsrGraph& g, double p, Rng& rng);

/// Zeroes floor(p * D) distinct columns, chosen uniformly, for every node.
NodeFeatures drop_feature_dims(const NodeFeatures& x, double p, Rng& rng);

}  // namespace ggd
