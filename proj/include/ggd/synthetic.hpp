#pragma once

#include <cstddef>

#include "ggd/csr_graph.hpp"
#include "ggd/graph_store.hpp"
#include "ggd/rng.hpp"

namespace ggd {

struct SbmConfig {
    std::size_t n = 2000;
    std::size_t k = 4;
    double p_in = 0.02;
    double p_out = 0.002;
    std::size_t feat_dim = 100;
    /// Probability that each feature bit is flipped away from the class prototype.
    double noise = 0.3;
    /// Fraction of ones in each class prototype.
    double prototype_density = 0.1;

    void validate() const;
};

struct SyntheticDataset {
    CsrGraph graph;          // symmetric, no self loops
    NodeFeatures features;   // row-normalised
    LabeledSplit split;      // 10/10/80 random split
};

/// Stochastic block model with near-equal contiguous blocks (node i is in
/// block i*k/n) and class-prototype bag-of-words features.
SyntheticDataset sbm_generate(const SbmConfig& cfg, Rng& rng);

/// Erdős–Rényi graph with expected average degree `avg_degree`.
CsrGraph random_graph(std::size_t n, double avg_degree, Rng& rng);

/// Binary features, each entry 1 with probability `density`; every row gets
/// at least one 1. Not normalised.
NodeFeatures random_binary_features(std::size_t n, std::size_t d, double density, Rng& rng);

/// Random graph and features at Cora's dimensions: 2708 nodes, 1433 binary
/// features (about 18 words per node), average degree 4. Features row-normalised.
struct CoraShape {
    CsrGraph graph;
    NodeFeatures features;
};
CoraShape cora_shape(Rng& rng, std::size_t n = 2708, std::size_t d = 1433, double avg_degree = 4.0);

}  // namespace ggd
