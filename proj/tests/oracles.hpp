#pragma once

// Independent reference implementations used by the tests. Everything here is
// written against plain std::vector<double> so that it shares no code with the
// library kernels it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "ggd/csr_graph.hpp"
#include "ggd/matrix.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

template <typename T>
Dense from(const ggd::Matrix<T>& m) {
    Dense d = zeros(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = static_cast<double>(m(i, j));
    return d;
}

inline Dense from_graph(const ggd::CsrGraph& g) {
    Dense d = zeros(g.num_nodes(), g.num_nodes());
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        auto nb = g.neighbors(static_cast<ggd::NodeId>(i));
        auto w = g.edge_weights(static_cast<ggd::NodeId>(i));
        for (std::size_t e = 0; e < nb.size(); ++e) d[i][nb[e]] = w.empty() ? 1.0 : w[e];
    }
    return d;
}

inline Dense matmul(const Dense& a, const Dense& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    Dense c = zeros(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            long double s = 0;
            for (std::size_t p = 0; p < k; ++p) s += static_cast<long double>(a[i][p]) * b[p][j];
            c[i][j] = static_cast<double>(s);
        }
    return c;
}

inline Dense transpose(const Dense& a) {
    if (a.empty()) return {};
    Dense t = zeros(a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
    return t;
}

/// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
inline Dense sym_norm_with_loops(const Dense& a) {
    const std::size_t n = a.size();
    Dense ah = a;
    for (std::size_t i = 0; i < n; ++i) ah[i][i] = 1.0;
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i] += ah[i][j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (ah[i][j] != 0.0) ah[i][j] /= std::sqrt(d[i] * d[j]);
    return ah;
}

/// Largest |a - b| / max(1, |b|) over all entries.
inline double max_rel(const Dense& a, const Dense& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
            worst = std::max(worst, std::abs(a[i][j] - b[i][j]) / std::max(1.0, std::abs(b[i][j])));
    return worst;
}

inline double max_abs(const Dense& a, const Dense& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
    return worst;
}

/// Random undirected simple graph; edges as a set of ordered pairs (both directions).
struct EdgeSet {
    std::size_t n = 0;
    std::set<std::pair<ggd::NodeId, ggd::NodeId>> edges;
};

inline EdgeSet random_edges(std::size_t n, double p, std::mt19937_64& gen, bool loops = false) {
    EdgeSet es;
    es.n = n;
    std::bernoulli_distribution coin(p);
    for (ggd::NodeId i = 0; i < n; ++i)
        for (ggd::NodeId j = loops ? i : i + 1; j < n; ++j)
            if (coin(gen)) {
                es.edges.insert({i, j});
                es.edges.insert({j, i});
            }
    return es;
}

inline ggd::CsrGraph to_graph(const EdgeSet& es) {
    std::vector<std::pair<ggd::NodeId, ggd::NodeId>> e(es.edges.begin(), es.edges.end());
    return ggd::CsrGraph::from_edges(es.n, std::move(e), false);
}

template <typename T>
ggd::Matrix<T> random_matrix(std::size_t r, std::size_t c, std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    ggd::Matrix<T> m(r, c);
    for (auto& v : m.values()) v = static_cast<T>(u(gen));
    return m;
}

/// Softmax regression trained with bias-corrected Adam, written out longhand.
/// Weight decay is added to the gradient of W and b alike.
struct SoftmaxOracle {
    Dense w;               // dim x classes
    std::vector<double> b;  // classes

    void fit(const Dense& x, const std::vector<int>& y, std::size_t classes, double lr, std::size_t epochs,
             double l2) {
        const std::size_t n = x.size(), d = w.size();
        b.assign(classes, 0.0);
        Dense mw = zeros(d, classes), vw = zeros(d, classes);
        std::vector<double> mb(classes, 0.0), vb(classes, 0.0);
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        for (std::size_t t = 1; t <= epochs; ++t) {
            Dense gw = zeros(d, classes);
            std::vector<double> gb(classes, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<double> z(classes);
                for (std::size_t c = 0; c < classes; ++c) {
                    double s = b[c];
                    for (std::size_t k = 0; k < d; ++k) s += x[i][k] * w[k][c];
                    z[c] = s;
                }
                const double mx = *std::max_element(z.begin(), z.end());
                double sum = 0.0;
                for (double& v : z) sum += (v = std::exp(v - mx));
                for (std::size_t c = 0; c < classes; ++c) {
                    const double g = (z[c] / sum - (static_cast<int>(c) == y[i] ? 1.0 : 0.0)) / static_cast<double>(n);
                    gb[c] += g;
                    for (std::size_t k = 0; k < d; ++k) gw[k][c] += x[i][k] * g;
                }
            }
            const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
            const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
            auto upd = [&](double& p, double g, double& m, double& v) {
                g += l2 * p;
                m = b1 * m + (1 - b1) * g;
                v = b2 * v + (1 - b2) * g * g;
                p -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
            };
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t c = 0; c < classes; ++c) upd(w[k][c], gw[k][c], mw[k][c], vw[k][c]);
            for (std::size_t c = 0; c < classes; ++c) upd(b[c], gb[c], mb[c], vb[c]);
        }
    }

    int predict(const std::vector<double>& row) const {
        const std::size_t classes = b.size();
        int best = 0;
        double best_v = -INFINITY;
        for (std::size_t c = 0; c < classes; ++c) {
            double s = b[c];
            for (std::size_t k = 0; k < row.size(); ++k) s += row[k] * w[k][c];
            if (s > best_v) {
                best_v = s;
                best = static_cast<int>(c);
            }
        }
        return best;
    }
};

}  // namespace oracle
