#include "ggd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ggd/perturb.hpp"

namespace ggd {

void SbmConfig::validate() const {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (n == 0 || k == 0 || k > n) throw InvalidArgument("sbm: need 1 <= k <= n");
    if (!prob(p_in) || !prob(p_out)) throw InvalidArgument("sbm: probabilities must lie in [0, 1]");
    if (k > 1 && !(p_in > p_out)) throw InvalidArgument("sbm: p_in must exceed p_out");
    if (feat_dim == 0) throw InvalidArgument("sbm: feat_dim must be >= 1");
    if (!prob(noise) || !prob(prototype_density)) throw InvalidArgument("sbm: noise and density must lie in [0, 1]");
}

namespace {

/// Calls emit(idx) for each index in [0, total) kept with probability p,
/// using geometric skips so the cost is O(kept).
template <typename Emit>
void bernoulli_indices(std::uint64_t total, double p, Rng& rng, Emit&& emit) {
    if (p <= 0.0 || total == 0) return;
    if (p >= 1.0) {
        for (std::uint64_t i = 0; i < total; ++i) emit(i);
        return;
    }
    const double log_q = std::log1p(-p);
    double pos = -1.0;
    while (true) {
        const double u = rng.uniform();
        pos += 1.0 + std::floor(std::log1p(-u) / log_q);
        if (pos >= static_cast<double>(total)) return;
        emit(static_cast<std::uint64_t>(pos));
    }
}

std::vector<std::size_t> block_starts(std::size_t n, std::size_t k) {
    std::vector<std::size_t> starts(k + 1);
    for (std::size_t b = 0; b <= k; ++b) starts[b] = (b * n + k - 1) / k;
    // first node of block b is the smallest i with i*k/n >= b
    return starts;
}

CsrGraph sbm_graph(std::size_t n, std::size_t k, double p_in, double p_out, Rng& rng) {
    const auto starts = block_starts(n, k);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t a = 0; a < k; ++a) {
        const std::uint64_t sa = starts[a + 1] - starts[a];
        // upper triangle inside block a, row-major over (u < v)
        std::uint64_t row = 0;
        std::uint64_t row_start = 0;
        bernoulli_indices(sa * (sa - 1) / 2, p_in, rng, [&](std::uint64_t idx) {
            while (idx >= row_start + (sa - 1 - row)) {
                row_start += sa - 1 - row;
                ++row;
            }
            const auto u = starts[a] + row;
            const auto v = u + 1 + (idx - row_start);
            edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        });
        for (std::size_t b = a + 1; b < k; ++b) {
            const std::uint64_t sb = starts[b + 1] - starts[b];
            bernoulli_indices(sa * sb, p_out, rng, [&](std::uint64_t idx) {
                edges.emplace_back(static_cast<NodeId>(starts[a] + idx / sb), static_cast<NodeId>(starts[b] + idx % sb));
            });
        }
    }
    return CsrGraph::from_edges(n, std::move(edges), true);
}

}  // namespace

SyntheticDataset sbm_generate(const SbmConfig& cfg, Rng& rng) {
    cfg.validate();
    SyntheticDataset ds;
    ds.graph = sbm_graph(cfg.n, cfg.k, cfg.p_in, cfg.p_out, rng);

    const std::size_t d = cfg.feat_dim;
    const auto ones = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.prototype_density * d)));
    std::vector<std::vector<char>> proto(cfg.k, std::vector<char>(d, 0));
    for (auto& p : proto) {
        std::vector<std::size_t> cols(d);
        std::iota(cols.begin(), cols.end(), std::size_t{0});
        for (std::size_t i = 0; i < std::min(ones, d); ++i) {
            std::swap(cols[i], cols[i + rng.below(d - i)]);
            p[cols[i]] = 1;
        }
    }
    NodeFeatures x(cfg.n, d);
    ds.split.labels.resize(cfg.n);
    ds.split.num_classes = cfg.k;
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const auto cls = i * cfg.k / cfg.n;
        ds.split.labels[i] = static_cast<std::int32_t>(cls);
        auto row = x.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const bool bit = (proto[cls][j] != 0) != rng.bernoulli(cfg.noise);
            row[j] = bit ? 1.0f : 0.0f;
        }
    }
    ds.features = row_normalize(x);

    auto order = random_permutation(cfg.n, rng);
    const auto n_train = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(cfg.n)));
    const auto n_val = n_train;
    ds.split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                        order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    ds.split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    for (auto* part : {&ds.split.train, &ds.split.val, &ds.split.test}) std::sort(part->begin(), part->end());
    ds.split.validate();
    return ds;
}

CsrGraph random_graph(std::size_t n, double avg_degree, Rng& rng) {
    if (n < 2) return CsrGraph::from_edges(n, {}, true);
    const double p = std::clamp(avg_degree / static_cast<double>(n - 1), 0.0, 1.0);
    return sbm_graph(n, 1, p, 0.0, rng);
}

NodeFeatures random_binary_features(std::size_t n, std::size_t d, double density, Rng& rng) {
    NodeFeatures x(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        bool any = false;
        bernoulli_indices(d, density, rng, [&](std::uint64_t j) {
            row[j] = 1.0f;
            any = true;
        });
        if (!any && d > 0) row[rng.below(d)] = 1.0f;
    }
    return x;
}

CoraShape cora_shape(Rng& rng, std::size_t n, std::size_t d, double avg_degree) {
    CoraShape c;
    c.graph = random_graph(n, avg_degree, rng);
    c.features = row_normalize(random_binary_features(n, d, 18.0 / 1433.0, rng));
    return c;
}

}  // namespace ggd
