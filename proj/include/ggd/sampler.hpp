#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ggd/csr_graph.hpp"
#include "ggd/discriminate.hpp"
#include "ggd/graph_store.hpp"
#include "ggd/rng.hpp"

namespace ggd {

/// One sampled bipartite layer: rows are dst nodes, columns are src nodes,
/// both given as sorted global ids. Every dst node is also a src node and its
/// self loop is always present.
struct Block {
    std::vector<NodeId> src_nodes;
    std::vector<NodeId> dst_nodes;
    std::vector<std::uint64_t> row_ptr;
    std::vector<NodeId> col_idx;  // local src index
    std::vector<double> weights;  // 1 / sqrt(row count * column count)

    std::size_t num_entries() const noexcept { return col_idx.size(); }
    CsrView view() const noexcept {
        return {dst_nodes.size(), src_nodes.size(), row_ptr, col_idx, weights};
    }
};

struct BlockStack {
    /// blocks.front() consumes input features, blocks.back() produces the seeds.
    std::vector<Block> blocks;
    std::vector<NodeId> seeds;

    std::vector<CsrView> views() const;
    const std::vector<NodeId>& input_nodes() const { return blocks.front().src_nodes; }
};

/// Samples one block per entry of `fanouts` (fanouts[0] feeds the first conv
/// layer). Each dst node keeps min(fanout, degree) distinct neighbours chosen
/// uniformly without replacement, plus itself. `seeds` must be distinct.
BlockStack sample_blocks(const CsrGraph& g, std::span<const NodeId> seeds, std::span<const std::size_t> fanouts,
                         Rng& rng);

struct MinibatchConfig {
    std::size_t batch_size = 512;
    std::vector<std::size_t> fanouts{12, 12};

    void validate(std::size_t num_conv) const;
};

/// Group Discrimination over sampled neighbourhoods. Negatives are a
/// permutation of the batch's input-frontier features. Edge dropout is not
/// applied; feature masking follows cfg.augment. Returns the parameters after
/// the final epoch; trace.loss holds the batch-size weighted mean per epoch.
TrainResult minibatch_train(const CsrGraph& g, const NodeFeatures& x, const TrainConfig& cfg,
                            const MinibatchConfig& mb);

}  // namespace ggd
