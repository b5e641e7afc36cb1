#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ggd/csr_graph.hpp"
#include "ggd/encoder.hpp"
#include "ggd/graph_store.hpp"

namespace ggd {

inline constexpr std::size_t kDefaultGraphPower = 5;

struct EmbeddingMeta {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t graph_checksum = 0;
    std::size_t power = kDefaultGraphPower;
};

struct EmbeddingSet {
    DenseMatrix h;
    EmbeddingMeta meta;
};

/// Forward pass of the frozen encoder (projector included) on the full graph.
DenseMatrix encode_frozen(const CsrGraph& g_norm, const NodeFeatures& z, const EncoderParams<float>& params);

/// Ã^n H by n successive spmm calls; n = 0 returns h.
DenseMatrix graph_power(const CsrGraph& g_norm, const DenseMatrix& h, std::size_t n);

/// Elementwise h_local + h_global.
DenseMatrix reinforce(const DenseMatrix& h_local, const DenseMatrix& h_global);

/// encode_frozen -> graph_power -> reinforce. `g` is the raw adjacency.
EmbeddingSet embed(const CsrGraph& g, const NodeFeatures& z, const EncoderParams<float>& params, std::size_t power,
                   EmbeddingMeta meta = {});

/// Writes the GGDF matrix to `path` and "key=value" metadata to
/// `path` + ".meta".
void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& emb);
EmbeddingSet load_embeddings(const std::filesystem::path& path);

struct GraphPowerTiming {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double seconds = 0.0;
};

/// Times graph_power on synthetic fixed-average-degree graphs, one row per
/// size. Each row is the best of `repeats` runs after one warm-up.
std::vector<GraphPowerTiming> bench_graph_power(std::span<const std::size_t> sizes, std::size_t n,
                                                std::size_t hidden = 256, double avg_degree = 5.0,
                                                std::uint64_t seed = 0, std::size_t repeats = 3);

}  // namespace ggd
