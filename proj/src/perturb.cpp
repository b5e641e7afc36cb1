#include "ggd/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ggd/encoder.hpp"

namespace ggd {

void AugmentConfig::validate() const {
    auto ok = [](double p) { return p >= 0.0 && p < 1.0; };
    if (!ok(drop_edge_p)) throw ConfigError("drop_edge_p must be in [0, 1)");
    if (!ok(drop_feat_p)) throw ConfigError("drop_feat_p must be in [0, 1)");
}

std::vector<NodeId> random_permutation(std::size_t n, Rng& rng) {
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

Shuffled shuffle_features(const NodeFeatures& x, Rng& rng) {
    if (x.rows() < 2) throw InvalidArgument("shuffle_features: corruption needs at least 2 nodes");
    auto perm = random_permutation(x.rows(), rng);
    return shuffle_features(x, perm);
}

Shuffled shuffle_features(const NodeFeatures& x, std::span<const NodeId> perm) {
    if (x.rows() < 2) throw InvalidArgument("shuffle_features: corruption needs at least 2 nodes");
    check_permutation(perm, x.rows());
    return {permute_rows(x, perm), std::vector<NodeId>(perm.begin(), perm.end())};
}

CsrGraph drop_edges(const CsrGraph& g, double p, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("drop_edges: p must be in [0, 1)");
    const std::size_t n = g.num_nodes();
    // keep[e] for every stored entry; the (v,u) entry reuses the (u,v) draw.
    std::vector<char> keep(g.num_edges(), 1);
    const auto& rp = g.row_ptr();
    for (NodeId u = 0; u < n; ++u) {
        auto nb = g.neighbors(u);
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const NodeId v = nb[k];
            const auto e = rp[u] + k;
            if (v == u) continue;
            if (v < u) {
                auto back = g.neighbors(v);
                auto it = std::lower_bound(back.begin(), back.end(), u);
                if (it != back.end() && *it == u) {
                    keep[e] = keep[rp[v] + static_cast<std::size_t>(it - back.begin())];
                    continue;
                }
            }
            keep[e] = rng.uniform() >= p ? 1 : 0;
        }
    }
    std::vector<std::uint64_t> row_ptr(n + 1, 0);
    std::vector<NodeId> col_idx;
    std::vector<double> weights;
    col_idx.reserve(g.num_edges());
    for (NodeId u = 0; u < n; ++u) {
        for (auto e = rp[u]; e < rp[u + 1]; ++e) {
            if (!keep[e]) continue;
            col_idx.push_back(g.col_idx()[e]);
            if (g.weighted()) weights.push_back(g.weights()[e]);
        }
        row_ptr[u + 1] = col_idx.size();
    }
    return CsrGraph(n, std::move(row_ptr), std::move(col_idx), std::move(weights));
}

NodeFeatures drop_feature_dims(const NodeFeatures& x, double p, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("drop_feature_dims: p must be in [0, 1)");
    const std::size_t d = x.cols();
    const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(d)));
    NodeFeatures out = x;
    if (k == 0) return out;
    std::vector<std::size_t> cols(d);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(d - i));
        std::swap(cols[i], cols[j]);
    }
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t i = 0; i < k; ++i) row[cols[i]] = 0.0f;
    }
    return out;
}

}  // namespace ggd
