#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ggd/csr_graph.hpp"
#include "ggd/matrix.hpp"
#include "ggd/rng.hpp"
#include "ggd/tensor_ops.hpp"

namespace ggd {

struct EncoderShape {
    std::size_t in_dim = 0;
    std::size_t hidden = 512;
    std::size_t num_conv = 1;
    std::size_t num_proj = 1;
    Activation activation = Activation::prelu;
    /// Adds the 1 x hidden weight used by linear aggregation.
    bool linear_aggregation = false;
};

inline constexpr float kInitialPreluSlope = 0.25f;

template <typename T>
struct ConvLayer {
    Matrix<T> weight;  // d_in x d_out, no bias
    T slope{};
};

template <typename T>
struct ProjLayer {
    Matrix<T> weight;  // d_in x d_out
    Matrix<T> bias;    // 1 x d_out
    T slope{};         // unused on the last projector layer
};

/// GCN stack g followed by the projector f. Gradients reuse this layout.
template <typename T>
struct EncoderParams {
    Activation activation = Activation::prelu;
    std::vector<ConvLayer<T>> conv;
    std::vector<ProjLayer<T>> proj;
    /// 1 x hidden; empty unless linear aggregation is configured.
    Matrix<T> agg_weight;

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    bool has_agg_weight() const noexcept { return !agg_weight.empty(); }
    /// Dimension chain and finiteness. Throws ShapeError / NumericError.
    void validate() const;

    template <typename U>
    EncoderParams<U> cast() const {
        EncoderParams<U> out;
        out.activation = activation;
        for (const auto& c : conv) out.conv.push_back({c.weight.template cast<U>(), static_cast<U>(c.slope)});
        for (const auto& p : proj)
            out.proj.push_back({p.weight.template cast<U>(), p.bias.template cast<U>(), static_cast<U>(p.slope)});
        out.agg_weight = agg_weight.template cast<U>();
        return out;
    }

    friend bool operator==(const EncoderParams& a, const EncoderParams& b) {
        if (a.activation != b.activation || a.conv.size() != b.conv.size() || a.proj.size() != b.proj.size() ||
            !(a.agg_weight == b.agg_weight))
            return false;
        for (std::size_t i = 0; i < a.conv.size(); ++i) {
            if (!(a.conv[i].weight == b.conv[i].weight) || a.conv[i].slope != b.conv[i].slope) return false;
        }
        for (std::size_t i = 0; i < a.proj.size(); ++i) {
            if (!(a.proj[i].weight == b.proj[i].weight) || !(a.proj[i].bias == b.proj[i].bias) ||
                a.proj[i].slope != b.proj[i].slope)
                return false;
        }
        return true;
    }
};

template <typename T>
using ParamGrads = EncoderParams<T>;

/// Xavier-uniform weights, zero biases, PReLU slopes at 0.25.
EncoderParams<float> init_encoder(const EncoderShape& shape, Rng& rng);

template <typename T>
EncoderParams<T> zeros_like(const EncoderParams<T>& p);

/// Every trainable tensor, in a fixed order. PReLU slopes are included only for
/// Activation::prelu (and never for the last projector layer).
template <typename T>
void for_each_parameter(EncoderParams<T>& p, const std::function<void(std::string_view, std::span<T>)>& fn);

/// Flat views over the trainable tensors, same order as for_each_parameter.
template <typename T>
std::vector<std::span<T>> parameter_spans(EncoderParams<T>& p);

template <typename T>
struct ForwardCache {
    std::vector<CsrView> ops;  // one propagation operator per conv layer
    bool symmetric = true;     // adjoint(op) == op
    std::vector<Matrix<T>> conv_agg;
    std::vector<Matrix<T>> conv_pre;
    std::vector<Matrix<T>> conv_out;
    std::vector<Matrix<T>> proj_pre;
    std::vector<Matrix<T>> proj_out;
};

template <typename T>
struct ForwardResult {
    Matrix<T> output;
    ForwardCache<T> cache;
};

/// Full-graph forward with the symmetric normalised adjacency (self loops
/// included). Caches every activation for encode_backward.
template <typename T>
ForwardResult<T> encode_forward(const CsrGraph& g_norm, const Matrix<T>& z, const EncoderParams<T>& params);

/// Forward over one propagation operator per conv layer (sampled blocks).
/// ops[l] maps layer-l inputs (cols) to layer-l outputs (rows).
template <typename T>
ForwardResult<T> encode_forward(std::span<const CsrView> ops, bool symmetric, const Matrix<T>& z,
                                const EncoderParams<T>& params);

/// Forward pass without a cache.
template <typename T>
Matrix<T> encode(const CsrGraph& g_norm, const Matrix<T>& z, const EncoderParams<T>& params);

/// Exact gradients of <grad_out, H> with respect to every parameter.
/// agg_weight is left empty; aggregation gradients are added by the caller.
template <typename T>
ParamGrads<T> encode_backward(const Matrix<T>& grad_out, const ForwardCache<T>& cache, const EncoderParams<T>& params);

/// Validates that perm is a permutation of 0..n-1.
void check_permutation(std::span<const NodeId> perm, std::size_t n);

/// out[i,:] = m[perm[i],:]
template <typename T>
Matrix<T> permute_rows(const Matrix<T>& m, std::span<const NodeId> perm);

/// Relabels so that new node i is old node perm[i], in both graph and features.
std::pair<CsrGraph, DenseMatrix> permute_graph_and_features(const CsrGraph& g, const DenseMatrix& x,
                                                            std::span<const NodeId> perm);

// GGDP checkpoint: "GGDP", u32 version, u32 num_conv, u32 num_proj,
// u32 activation, u32 has_agg_weight, then GGDF blocks: conv weights,
// projector (weight, bias) pairs, a 1 x (num_conv + num_proj) slope row,
// and the aggregation weight when present.
void write_checkpoint(std::ostream& out, const EncoderParams<float>& params);
EncoderParams<float> read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const EncoderParams<float>& params);
EncoderParams<float> load_checkpoint(const std::filesystem::path& path);

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

}  // namespace ggd
