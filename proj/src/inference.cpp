#include "ggd/inference.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <limits>
#include <map>
#include <string>

#include "ggd/synthetic.hpp"
#include "ggd/tensor_ops.hpp"

namespace ggd {

DenseMatrix encode_frozen(const CsrGraph& g_norm, const NodeFeatures& z, const EncoderParams<float>& params) {
    params.validate();
    return encode(g_norm, z, params);
}

DenseMatrix graph_power(const CsrGraph& g_norm, const DenseMatrix& h, std::size_t n) {
    DenseMatrix cur = h;
    DenseMatrix next;
    for (std::size_t k = 0; k < n; ++k) {
        spmm_into(g_norm.view(), cur, next);
        std::swap(cur, next);
    }
    return cur;
}

DenseMatrix reinforce(const DenseMatrix& h_local, const DenseMatrix& h_global) {
    if (!h_local.same_shape(h_global))
        throw ShapeError("reinforce: " + shape_str(h_local) + " vs " + shape_str(h_global));
    return add(h_global, h_local);
}

EmbeddingSet embed(const CsrGraph& g, const NodeFeatures& z, const EncoderParams<float>& params, std::size_t power,
                   EmbeddingMeta meta) {
    const CsrGraph g_norm = normalized_adjacency(g);
    DenseMatrix local = encode_frozen(g_norm, z, params);
    DenseMatrix global = graph_power(g_norm, local, power);
    meta.power = power;
    meta.graph_checksum = g.checksum();
    return {reinforce(local, global), meta};
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingSet& emb) {
    save_features(path, emb.h);
    auto meta_path = path;
    meta_path += ".meta";
    std::ofstream out(meta_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + meta_path.string());
    out << "rows=" << emb.h.rows() << '\n'
        << "cols=" << emb.h.cols() << '\n'
        << "seed=" << emb.meta.seed << '\n'
        << "power=" << emb.meta.power << '\n'
        << "config_hash=" << emb.meta.config_hash << '\n'
        << "graph_checksum=" << emb.meta.graph_checksum << '\n';
    if (!out) throw IoError("write failed: " + meta_path.string());
}

EmbeddingSet load_embeddings(const std::filesystem::path& path) {
    EmbeddingSet emb;
    emb.h = load_features(path);
    auto meta_path = path;
    meta_path += ".meta";
    std::ifstream in(meta_path);
    if (!in) return emb;
    std::map<std::string, std::uint64_t> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::uint64_t v = 0;
        const auto val = line.substr(eq + 1);
        std::from_chars(val.data(), val.data() + val.size(), v);
        kv[line.substr(0, eq)] = v;
    }
    emb.meta.seed = kv["seed"];
    emb.meta.power = kv["power"];
    emb.meta.config_hash = kv["config_hash"];
    emb.meta.graph_checksum = kv["graph_checksum"];
    return emb;
}

std::vector<GraphPowerTiming> bench_graph_power(std::span<const std::size_t> sizes, std::size_t n, std::size_t hidden,
                                                double avg_degree, std::uint64_t seed, std::size_t repeats) {
    std::vector<GraphPowerTiming> rows;
    for (std::size_t nodes : sizes) {
        Rng rng(seed ^ nodes, streams::data);
        const CsrGraph g = random_graph(nodes, avg_degree, rng);
        const CsrGraph g_norm = normalized_adjacency(g);
        DenseMatrix h(nodes, hidden);
        for (float& v : h.values()) v = rng.uniform_float() - 0.5f;
        (void)graph_power(g_norm, h, n);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < std::max<std::size_t>(1, repeats); ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            auto out = graph_power(g_norm, h, n);
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        rows.push_back({nodes, g.num_edges(), best});
    }
    return rows;
}

}  // namespace ggd
