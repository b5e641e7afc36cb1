#include "ggd/probe.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "ggd/adam.hpp"
#include "ggd/tensor_ops.hpp"

namespace ggd {

DenseMatrix64 init_probe_weights(std::size_t dim, std::size_t classes, std::uint64_t seed) {
    Rng rng(seed, streams::probe);
    return xavier_uniform(dim, classes, rng).cast<double>();
}

namespace {

DenseMatrix64 gather(const DenseMatrix& h, std::span<const NodeId> ids) {
    DenseMatrix64 out(ids.size(), h.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto src = h.row(ids[i]);
        auto dst = out.row(i);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
    }
    return out;
}

DenseMatrix64 logits(const DenseMatrix64& x, const DenseMatrix64& w, const DenseMatrix64& b) {
    DenseMatrix64 z = matmul(x, w);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        for (std::size_t c = 0; c < z.cols(); ++c) z(i, c) += b(0, c);
    }
    return z;
}

double accuracy(const DenseMatrix& h, std::span<const NodeId> ids, const LabeledSplit& split, const DenseMatrix64& w,
                const DenseMatrix64& b) {
    if (ids.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto z = logits(gather(h, ids), w, b);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto r = z.row(i);
        const auto pred = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
        if (static_cast<std::int32_t>(pred) == split.labels[ids[i]]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ids.size());
}

}  // namespace

ProbeResult logistic_probe(const DenseMatrix& h, const LabeledSplit& split, const ProbeConfig& cfg) {
    if (h.rows() != split.num_nodes())
        throw ShapeError("logistic_probe: " + std::to_string(h.rows()) + " embeddings for " +
                         std::to_string(split.num_nodes()) + " labelled nodes");
    if (split.train.empty()) throw InvalidArgument("logistic_probe: empty train split");
    if (split.test.empty()) throw InvalidArgument("logistic_probe: empty test split");
    if (!(cfg.lr > 0.0)) throw ConfigError("probe lr must be > 0");
    const std::size_t classes = split.num_classes;
    const std::size_t n = split.train.size();

    const DenseMatrix64 x = gather(h, split.train);
    DenseMatrix64 w = init_probe_weights(h.cols(), classes, cfg.seed);
    DenseMatrix64 b(1, classes);
    const AdamOptions opts{cfg.lr, 0.9, 0.999, 1e-8, cfg.l2_weight};
    AdamState<double> sw(w.rows(), w.cols(), opts);
    AdamState<double> sb(1, classes, opts);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        DenseMatrix64 g = logits(x, w, b);
        for (std::size_t i = 0; i < n; ++i) {
            auto r = g.row(i);
            const double mx = *std::max_element(r.begin(), r.end());
            double s = 0.0;
            for (double& v : r) {
                v = std::exp(v - mx);
                s += v;
            }
            for (double& v : r) v /= s;
            r[static_cast<std::size_t>(split.labels[split.train[i]])] -= 1.0;
            for (double& v : r) v /= static_cast<double>(n);
        }
        const DenseMatrix64 gw = matmul_tn(x, g);
        const DenseMatrix64 gb = column_sums(g);
        adam_step(sw, w, gw);
        adam_step(sb, b, gb);
    }
    return {accuracy(h, split.train, split, w, b), accuracy(h, split.val, split, w, b),
            accuracy(h, split.test, split, w, b)};
}

void write_probe_csv(const ProbeResult& r, std::ostream& out) {
    out << "split,accuracy\n" << std::setprecision(6) << std::fixed;
    out << "train," << r.train << '\n' << "val," << r.val << '\n' << "test," << r.test << '\n';
    out << std::defaultfloat;
}

SummaryStats summary_stats(const CsrGraph& g_norm, const NodeFeatures& z, const EncoderParams<float>& params,
                           Activation activation, SummaryOuter outer) {
    if (params.conv.empty()) throw ShapeError("summary_stats: encoder has no conv layer");
    const auto& layer = params.conv.front();
    const DenseMatrix v = spmm(g_norm, z);
    const DenseMatrix h = activate(matmul(v, layer.weight), activation, layer.slope);
    const DenseMatrix s = column_sums(h);
    const double inv_n = 1.0 / static_cast<double>(std::max<std::size_t>(1, h.rows()));
    std::vector<double> vals(s.cols());
    for (std::size_t k = 0; k < s.cols(); ++k) {
        const double sk = static_cast<double>(s(0, k)) * inv_n;
        vals[k] = outer == SummaryOuter::sigmoid ? stable_sigmoid(sk) : sk;
    }
    SummaryStats st;
    if (vals.empty()) return st;
    double sum = 0.0;
    for (double x : vals) sum += x;
    st.mean = sum / static_cast<double>(vals.size());
    double ss = 0.0;
    for (double x : vals) ss += (x - st.mean) * (x - st.mean);
    st.std = std::sqrt(ss / static_cast<double>(vals.size()));
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    st.range = *hi - *lo;
    return st;
}

void write_summary_stats(const SummaryStats& s, std::ostream& out) {
    out << std::setprecision(6) << "mean=" << s.mean << "\nstd=" << s.std << "\nrange=" << s.range << '\n';
}

}  // namespace ggd
