#include "ggd/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "ggd/adam.hpp"
#include "ggd/perturb.hpp"

namespace ggd {

std::vector<CsrView> BlockStack::views() const {
    std::vector<CsrView> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) out.push_back(b.view());
    return out;
}

namespace {

// Partial Fisher-Yates over a scratch copy of the neighbour list.
void sample_neighbors(std::span<const NodeId> nbrs, NodeId self, std::size_t fanout, Rng& rng,
                      std::vector<NodeId>& scratch, std::vector<NodeId>& out) {
    scratch.clear();
    for (NodeId u : nbrs) {
        if (u != self) scratch.push_back(u);
    }
    const std::size_t k = std::min(fanout, scratch.size());
    if (k < scratch.size()) {
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(scratch.size() - i));
            std::swap(scratch[i], scratch[j]);
        }
    }
    out.assign(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k));
    out.push_back(self);
    std::sort(out.begin(), out.end());
}

Block build_block(const CsrGraph& g, std::vector<NodeId> dst, std::size_t fanout, Rng& rng) {
    Block b;
    b.dst_nodes = std::move(dst);
    std::vector<std::vector<NodeId>> picked(b.dst_nodes.size());
    std::vector<NodeId> scratch;
    for (std::size_t i = 0; i < b.dst_nodes.size(); ++i) {
        const NodeId d = b.dst_nodes[i];
        sample_neighbors(g.neighbors(d), d, fanout, rng, scratch, picked[i]);
        b.src_nodes.insert(b.src_nodes.end(), picked[i].begin(), picked[i].end());
    }
    std::sort(b.src_nodes.begin(), b.src_nodes.end());
    b.src_nodes.erase(std::unique(b.src_nodes.begin(), b.src_nodes.end()), b.src_nodes.end());

    std::vector<std::size_t> col_count(b.src_nodes.size(), 0);
    b.row_ptr.assign(1, 0);
    for (const auto& row : picked) {
        for (NodeId u : row) {
            const auto local = static_cast<NodeId>(
                std::lower_bound(b.src_nodes.begin(), b.src_nodes.end(), u) - b.src_nodes.begin());
            b.col_idx.push_back(local);
            ++col_count[local];
        }
        b.row_ptr.push_back(b.col_idx.size());
    }
    b.weights.resize(b.col_idx.size());
    for (std::size_t i = 0; i < picked.size(); ++i) {
        const double rc = static_cast<double>(b.row_ptr[i + 1] - b.row_ptr[i]);
        for (std::uint64_t e = b.row_ptr[i]; e < b.row_ptr[i + 1]; ++e) {
            b.weights[e] = 1.0 / std::sqrt(rc * static_cast<double>(col_count[b.col_idx[e]]));
        }
    }
    return b;
}

}  // namespace

BlockStack sample_blocks(const CsrGraph& g, std::span<const NodeId> seeds, std::span<const std::size_t> fanouts,
                         Rng& rng) {
    if (fanouts.empty()) throw InvalidArgument("sample_blocks: no fanouts");
    if (seeds.empty()) throw InvalidArgument("sample_blocks: no seeds");
    BlockStack stack;
    stack.seeds.assign(seeds.begin(), seeds.end());
    std::vector<NodeId> dst(seeds.begin(), seeds.end());
    std::sort(dst.begin(), dst.end());
    if (std::adjacent_find(dst.begin(), dst.end()) != dst.end())
        throw InvalidArgument("sample_blocks: duplicate seed");
    if (dst.back() >= g.num_nodes())
        throw RangeError("sample_blocks: seed " + std::to_string(dst.back()) + " out of range");
    for (std::size_t f : fanouts) {
        if (f < 1) throw InvalidArgument("sample_blocks: fanout must be >= 1");
    }
    // Sample from the seeds outwards, then flip so the input layer comes first.
    for (std::size_t l = fanouts.size(); l-- > 0;) {
        stack.blocks.push_back(build_block(g, dst, fanouts[l], rng));
        dst = stack.blocks.back().src_nodes;
    }
    std::reverse(stack.blocks.begin(), stack.blocks.end());
    return stack;
}

void MinibatchConfig::validate(std::size_t num_conv) const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (fanouts.size() != num_conv)
        throw ConfigError("fanouts: " + std::to_string(fanouts.size()) + " entries for " +
                          std::to_string(num_conv) + " conv layers");
    for (std::size_t f : fanouts) {
        if (f < 1) throw ConfigError("fanouts must be >= 1");
    }
}

TrainResult minibatch_train(const CsrGraph& g, const NodeFeatures& x, const TrainConfig& cfg,
                            const MinibatchConfig& mb) {
    cfg.validate();
    mb.validate(cfg.num_conv);
    const std::size_t n = g.num_nodes();
    if (x.rows() != n)
        throw ShapeError("minibatch_train: " + std::to_string(x.rows()) + " feature rows for " + std::to_string(n) +
                         " nodes");
    Rng init_rng(cfg.seed, streams::init);
    Rng corrupt_rng(cfg.seed, streams::corrupt);
    Rng dropout_rng(cfg.seed, streams::dropout);
    Rng sample_rng(cfg.seed, streams::sample);

    TrainResult result;
    result.params = init_encoder(cfg.encoder_shape(x.cols()), init_rng);
    auto& params = result.params;
    auto spans = parameter_spans(params);
    MultiAdam<float> opt(spans, AdamOptions{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
    auto& trace = result.trace;
    double best_loss = INFINITY;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const NodeFeatures x_aug =
            cfg.augment.enabled ? drop_feature_dims(x, cfg.augment.drop_feat_p, dropout_rng) : NodeFeatures();
        const NodeFeatures& xs = cfg.augment.enabled ? x_aug : x;
        const auto order = random_permutation(n, sample_rng);
        double weighted = 0.0;
        std::size_t counted = 0;
        for (std::size_t start = 0; start < n; start += mb.batch_size) {
            const std::size_t end = std::min(n, start + mb.batch_size);
            std::vector<NodeId> seeds(order.begin() + static_cast<std::ptrdiff_t>(start),
                                      order.begin() + static_cast<std::ptrdiff_t>(end));
            std::sort(seeds.begin(), seeds.end());
            const auto stack = sample_blocks(g, seeds, mb.fanouts, sample_rng);
            const auto& input = stack.input_nodes();
            if (input.size() < 2) continue;
            NodeFeatures pos(input.size(), xs.cols());
            for (std::size_t i = 0; i < input.size(); ++i) {
                auto src = xs.row(input[i]);
                std::copy(src.begin(), src.end(), pos.row(i).begin());
            }
            const auto neg = shuffle_features(pos, corrupt_rng);
            const auto ops = stack.views();
            auto step = group_discrimination_step<float>(ops, false, pos, neg.features, params, cfg.aggregation);
            if (!std::isfinite(step.loss))
                throw NumericError("minibatch_train: non-finite loss at epoch " + std::to_string(epoch));
            weighted += step.loss * static_cast<double>(seeds.size());
            counted += seeds.size();
            opt.step(spans, parameter_spans(step.grads));
        }
        const double loss = counted ? weighted / static_cast<double>(counted) : 0.0;
        trace.loss.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            trace.best_epoch = epoch;
        }
        trace.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    trace.optimizer_steps = opt.steps();
    return result;
}

}  // namespace ggd
