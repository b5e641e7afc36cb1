#include "ggd/encoder.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "ggd/graph_store.hpp"
#include "le_io.hpp"

namespace ggd {

template <typename T>
std::size_t EncoderParams<T>::input_dim() const {
    if (!conv.empty()) return conv.front().weight.rows();
    if (!proj.empty()) return proj.front().weight.rows();
    return 0;
}

template <typename T>
std::size_t EncoderParams<T>::output_dim() const {
    if (!proj.empty()) return proj.back().weight.cols();
    if (!conv.empty()) return conv.back().weight.cols();
    return 0;
}

template <typename T>
void EncoderParams<T>::validate() const {
    if (conv.empty()) throw ShapeError("encoder: at least one conv layer is required");
    std::size_t d = conv.front().weight.rows();
    auto finite = [](const Matrix<T>& m) {
        for (T v : m.values()) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    };
    for (std::size_t l = 0; l < conv.size(); ++l) {
        if (conv[l].weight.rows() != d) throw ShapeError("encoder: conv layer " + std::to_string(l) + " input mismatch");
        if (!finite(conv[l].weight) || !std::isfinite(static_cast<double>(conv[l].slope)))
            throw NumericError("encoder: non-finite conv parameter");
        d = conv[l].weight.cols();
    }
    for (std::size_t l = 0; l < proj.size(); ++l) {
        const auto& p = proj[l];
        if (p.weight.rows() != d) throw ShapeError("encoder: projector layer " + std::to_string(l) + " input mismatch");
        if (p.bias.rows() != 1 || p.bias.cols() != p.weight.cols())
            throw ShapeError("encoder: projector bias must be 1 x " + std::to_string(p.weight.cols()));
        if (!finite(p.weight) || !finite(p.bias) || !std::isfinite(static_cast<double>(p.slope)))
            throw NumericError("encoder: non-finite projector parameter");
        d = p.weight.cols();
    }
    if (!agg_weight.empty() && (agg_weight.rows() != 1 || agg_weight.cols() != d))
        throw ShapeError("encoder: aggregation weight must be 1 x " + std::to_string(d));
    if (!finite(agg_weight)) throw NumericError("encoder: non-finite aggregation weight");
}

EncoderParams<float> init_encoder(const EncoderShape& shape, Rng& rng) {
    if (shape.in_dim == 0 || shape.hidden == 0) throw InvalidArgument("init_encoder: dimensions must be >= 1");
    if (shape.num_conv == 0) throw InvalidArgument("init_encoder: num_conv must be >= 1");
    EncoderParams<float> p;
    p.activation = shape.activation;
    std::size_t d = shape.in_dim;
    for (std::size_t l = 0; l < shape.num_conv; ++l) {
        p.conv.push_back({xavier_uniform(d, shape.hidden, rng), kInitialPreluSlope});
        d = shape.hidden;
    }
    for (std::size_t l = 0; l < shape.num_proj; ++l) {
        p.proj.push_back({xavier_uniform(d, shape.hidden, rng), DenseMatrix(1, shape.hidden), kInitialPreluSlope});
    }
    if (shape.linear_aggregation) p.agg_weight = transpose(xavier_uniform(shape.hidden, 1, rng));
    return p;
}

template <typename T>
EncoderParams<T> zeros_like(const EncoderParams<T>& p) {
    EncoderParams<T> z;
    z.activation = p.activation;
    for (const auto& c : p.conv) z.conv.push_back({Matrix<T>(c.weight.rows(), c.weight.cols()), T{}});
    for (const auto& l : p.proj)
        z.proj.push_back({Matrix<T>(l.weight.rows(), l.weight.cols()), Matrix<T>(1, l.bias.cols()), T{}});
    z.agg_weight = Matrix<T>(p.agg_weight.rows(), p.agg_weight.cols());
    return z;
}

template <typename T>
void for_each_parameter(EncoderParams<T>& p, const std::function<void(std::string_view, std::span<T>)>& fn) {
    const bool learn_slope = p.activation == Activation::prelu;
    for (std::size_t l = 0; l < p.conv.size(); ++l) {
        fn("conv" + std::to_string(l) + ".weight", p.conv[l].weight.values());
        if (learn_slope) fn("conv" + std::to_string(l) + ".slope", std::span<T>(&p.conv[l].slope, 1));
    }
    for (std::size_t l = 0; l < p.proj.size(); ++l) {
        fn("proj" + std::to_string(l) + ".weight", p.proj[l].weight.values());
        fn("proj" + std::to_string(l) + ".bias", p.proj[l].bias.values());
        if (learn_slope && l + 1 < p.proj.size())
            fn("proj" + std::to_string(l) + ".slope", std::span<T>(&p.proj[l].slope, 1));
    }
    if (!p.agg_weight.empty()) fn("agg.weight", p.agg_weight.values());
}

template <typename T>
std::vector<std::span<T>> parameter_spans(EncoderParams<T>& p) {
    std::vector<std::span<T>> out;
    for_each_parameter<T>(p, [&](std::string_view, std::span<T> s) { out.push_back(s); });
    return out;
}

namespace {

template <typename T>
Matrix<T> forward_impl(std::span<const CsrView> ops, bool symmetric, const Matrix<T>& z, const EncoderParams<T>& params,
                       ForwardCache<T>* cache) {
    if (ops.size() != params.conv.size())
        throw ShapeError("encode_forward: " + std::to_string(ops.size()) + " operators for " +
                         std::to_string(params.conv.size()) + " conv layers");
    if (params.conv.empty()) throw ShapeError("encode_forward: no conv layers");
    if (z.cols() != params.input_dim())
        throw ShapeError("encode_forward: features have " + std::to_string(z.cols()) + " columns, encoder expects " +
                         std::to_string(params.input_dim()));
    if (cache) {
        cache->ops.assign(ops.begin(), ops.end());
        cache->symmetric = symmetric;
        cache->conv_agg.clear();
        cache->conv_pre.clear();
        cache->conv_out.clear();
        cache->proj_pre.clear();
        cache->proj_out.clear();
    }
    Matrix<T> h;
    const Matrix<T>* cur = &z;
    for (std::size_t l = 0; l < params.conv.size(); ++l) {
        const auto& layer = params.conv[l];
        if (ops[l].cols != cur->rows())
            throw ShapeError("encode_forward: operator " + std::to_string(l) + " expects " + std::to_string(ops[l].cols) +
                             " input rows, got " + std::to_string(cur->rows()));
        Matrix<T> agg = spmm(ops[l], *cur);
        Matrix<T> pre = matmul(agg, layer.weight);
        h = activate(pre, params.activation, layer.slope);
        if (cache) {
            cache->conv_agg.push_back(std::move(agg));
            cache->conv_pre.push_back(std::move(pre));
            cache->conv_out.push_back(h);
        }
        cur = &h;
    }
    for (std::size_t l = 0; l < params.proj.size(); ++l) {
        const auto& layer = params.proj[l];
        Matrix<T> pre = matmul(h, layer.weight);
        for (std::size_t i = 0; i < pre.rows(); ++i) {
            auto r = pre.row(i);
            for (std::size_t j = 0; j < r.size(); ++j) r[j] += layer.bias(0, j);
        }
        const bool last = l + 1 == params.proj.size();
        Matrix<T> out = last ? pre : activate(pre, params.activation, layer.slope);
        if (cache) {
            cache->proj_pre.push_back(std::move(pre));
            cache->proj_out.push_back(out);
        }
        h = std::move(out);
    }
    return h;
}

}  // namespace

template <typename T>
ForwardResult<T> encode_forward(std::span<const CsrView> ops, bool symmetric, const Matrix<T>& z,
                                const EncoderParams<T>& params) {
    ForwardResult<T> r;
    r.output = forward_impl(ops, symmetric, z, params, &r.cache);
    return r;
}

template <typename T>
ForwardResult<T> encode_forward(const CsrGraph& g_norm, const Matrix<T>& z, const EncoderParams<T>& params) {
    std::vector<CsrView> ops(params.conv.size(), g_norm.view());
    return encode_forward<T>(std::span<const CsrView>(ops), true, z, params);
}

template <typename T>
Matrix<T> encode(const CsrGraph& g_norm, const Matrix<T>& z, const EncoderParams<T>& params) {
    std::vector<CsrView> ops(params.conv.size(), g_norm.view());
    return forward_impl<T>(ops, true, z, params, nullptr);
}

template <typename T>
ParamGrads<T> encode_backward(const Matrix<T>& grad_out, const ForwardCache<T>& cache, const EncoderParams<T>& params) {
    const std::size_t nc = params.conv.size();
    const std::size_t np = params.proj.size();
    if (cache.conv_pre.size() != nc || cache.proj_pre.size() != np || cache.ops.size() != nc)
        throw InvalidArgument("encode_backward: cache does not match parameter layout");
    for (std::size_t l = 0; l < nc; ++l) {
        if (cache.conv_agg[l].cols() != params.conv[l].weight.rows() ||
            cache.conv_pre[l].cols() != params.conv[l].weight.cols())
            throw InvalidArgument("encode_backward: stale cache for conv layer " + std::to_string(l));
    }
    for (std::size_t l = 0; l < np; ++l) {
        if (cache.proj_pre[l].cols() != params.proj[l].weight.cols())
            throw InvalidArgument("encode_backward: stale cache for projector layer " + std::to_string(l));
    }
    const Matrix<T>& final_out = np > 0 ? cache.proj_out.back() : cache.conv_out.back();
    if (!grad_out.same_shape(final_out))
        throw ShapeError("encode_backward: grad " + shape_str(grad_out) + " vs output " + shape_str(final_out));

    ParamGrads<T> grads = zeros_like(params);
    grads.agg_weight = Matrix<T>();
    Matrix<T> g = grad_out;
    for (std::size_t li = np; li-- > 0;) {
        const auto& layer = params.proj[li];
        if (li + 1 < np) {
            auto ag = activate_backward(g, cache.proj_pre[li], cache.proj_out[li], params.activation, layer.slope);
            g = std::move(ag.grad_input);
            grads.proj[li].slope = ag.grad_slope;
        }
        const Matrix<T>& input = li > 0 ? cache.proj_out[li - 1] : cache.conv_out.back();
        grads.proj[li].weight = matmul_tn(input, g);
        grads.proj[li].bias = column_sums(g);
        g = matmul_nt(g, layer.weight);
    }
    for (std::size_t li = nc; li-- > 0;) {
        const auto& layer = params.conv[li];
        auto ag = activate_backward(g, cache.conv_pre[li], cache.conv_out[li], params.activation, layer.slope);
        grads.conv[li].slope = ag.grad_slope;
        grads.conv[li].weight = matmul_tn(cache.conv_agg[li], ag.grad_input);
        if (li == 0) break;
        Matrix<T> g_agg = matmul_nt(ag.grad_input, layer.weight);
        g = cache.symmetric ? spmm(cache.ops[li], g_agg) : spmm_transposed(cache.ops[li], g_agg);
    }
    return grads;
}

void check_permutation(std::span<const NodeId> perm, std::size_t n) {
    if (perm.size() != n) throw InvalidArgument("permutation has wrong length");
    std::vector<char> seen(n, 0);
    for (NodeId p : perm) {
        if (p >= n || seen[p]) throw InvalidArgument("invalid permutation");
        seen[p] = 1;
    }
}

template <typename T>
Matrix<T> permute_rows(const Matrix<T>& m, std::span<const NodeId> perm) {
    if (perm.size() != m.rows()) throw ShapeError("permute_rows: permutation length mismatch");
    Matrix<T> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        auto src = m.row(perm[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

std::pair<CsrGraph, DenseMatrix> permute_graph_and_features(const CsrGraph& g, const DenseMatrix& x,
                                                            std::span<const NodeId> perm) {
    const std::size_t n = g.num_nodes();
    check_permutation(perm, n);
    if (x.rows() != n) throw ShapeError("permute_graph_and_features: feature rows != nodes");
    std::vector<NodeId> inverse(n);
    for (std::size_t i = 0; i < n; ++i) inverse[perm[i]] = static_cast<NodeId>(i);
    std::vector<std::uint64_t> row_ptr(n + 1, 0);
    std::vector<NodeId> col_idx;
    std::vector<double> weights;
    col_idx.reserve(g.num_edges());
    for (std::size_t i = 0; i < n; ++i) {
        auto nb = g.neighbors(perm[i]);
        auto w = g.edge_weights(perm[i]);
        std::vector<std::pair<NodeId, double>> row;
        row.reserve(nb.size());
        for (std::size_t k = 0; k < nb.size(); ++k) row.emplace_back(inverse[nb[k]], w.empty() ? 1.0 : w[k]);
        std::sort(row.begin(), row.end());
        for (auto [j, wt] : row) {
            col_idx.push_back(j);
            if (g.weighted()) weights.push_back(wt);
        }
        row_ptr[i + 1] = col_idx.size();
    }
    return {CsrGraph(n, std::move(row_ptr), std::move(col_idx), std::move(weights)), permute_rows(x, perm)};
}

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::prelu: return "prelu";
        case Activation::relu: return "relu";
        case Activation::lrelu: return "lrelu";
        case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

Activation parse_activation(std::string_view s) {
    if (s == "prelu") return Activation::prelu;
    if (s == "relu") return Activation::relu;
    if (s == "lrelu") return Activation::lrelu;
    if (s == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation '" + std::string(s) + "'");
}

void write_checkpoint(std::ostream& out, const EncoderParams<float>& params) {
    params.validate();
    out.write("GGDP", 4);
    detail::put_le<std::uint32_t>(out, 1);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.conv.size()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.proj.size()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.activation));
    detail::put_le<std::uint32_t>(out, params.has_agg_weight() ? 1u : 0u);
    DenseMatrix slopes(1, params.conv.size() + params.proj.size());
    std::size_t k = 0;
    for (const auto& c : params.conv) {
        write_dense(out, c.weight);
        slopes(0, k++) = c.slope;
    }
    for (const auto& p : params.proj) {
        write_dense(out, p.weight);
        write_dense(out, p.bias);
        slopes(0, k++) = p.slope;
    }
    write_dense(out, slopes);
    if (params.has_agg_weight()) write_dense(out, params.agg_weight);
}

EncoderParams<float> read_checkpoint(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "GGDP") throw IoError("GGDP: bad magic");
    const auto version = detail::get_le<std::uint32_t>(in);
    if (version != 1) throw IoError("GGDP: unsupported version " + std::to_string(version));
    const auto nc = detail::get_le<std::uint32_t>(in);
    const auto np = detail::get_le<std::uint32_t>(in);
    const auto act = detail::get_le<std::uint32_t>(in);
    const auto has_agg = detail::get_le<std::uint32_t>(in);
    if (act > static_cast<std::uint32_t>(Activation::sigmoid)) throw IoError("GGDP: unknown activation code");
    if (nc > 1024 || np > 1024) throw IoError("GGDP: implausible layer counts");
    EncoderParams<float> p;
    p.activation = static_cast<Activation>(act);
    for (std::uint32_t l = 0; l < nc; ++l) p.conv.push_back({read_dense(in), 0.0f});
    for (std::uint32_t l = 0; l < np; ++l) {
        auto w = read_dense(in);
        auto b = read_dense(in);
        p.proj.push_back({std::move(w), std::move(b), 0.0f});
    }
    const auto slopes = read_dense(in);
    if (slopes.rows() != 1 || slopes.cols() != nc + np) throw IoError("GGDP: slope row has wrong shape");
    std::size_t k = 0;
    for (auto& c : p.conv) c.slope = slopes(0, k++);
    for (auto& l : p.proj) l.slope = slopes(0, k++);
    if (has_agg) p.agg_weight = read_dense(in);
    p.validate();
    return p;
}

void save_checkpoint(const std::filesystem::path& path, const EncoderParams<float>& params) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    write_checkpoint(out, params);
    if (!out) throw IoError("write failed: " + path.string());
}

EncoderParams<float> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_checkpoint(in);
}

#define GGD_INSTANTIATE(T)                                                                                      \
    template struct EncoderParams<T>;                                                                           \
    template EncoderParams<T> zeros_like<T>(const EncoderParams<T>&);                                           \
    template void for_each_parameter<T>(EncoderParams<T>&,                                                      \
                                        const std::function<void(std::string_view, std::span<T>)>&);            \
    template std::vector<std::span<T>> parameter_spans<T>(EncoderParams<T>&);                                   \
    template ForwardResult<T> encode_forward<T>(const CsrGraph&, const Matrix<T>&, const EncoderParams<T>&);    \
    template ForwardResult<T> encode_forward<T>(std::span<const CsrView>, bool, const Matrix<T>&,               \
                                                const EncoderParams<T>&);                                       \
    template Matrix<T> encode<T>(const CsrGraph&, const Matrix<T>&, const EncoderParams<T>&);                   \
    template ParamGrads<T> encode_backward<T>(const Matrix<T>&, const ForwardCache<T>&, const EncoderParams<T>&); \
    template Matrix<T> permute_rows<T>(const Matrix<T>&, std::span<const NodeId>);

GGD_INSTANTIATE(float)
GGD_INSTANTIATE(double)

#undef GGD_INSTANTIATE

}  // namespace ggd
