#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ggd/csr_graph.hpp"
#include "ggd/encoder.hpp"
#include "ggd/graph_store.hpp"
#include "ggd/perturb.hpp"

namespace ggd {

/// Per-node reduction of an embedding row to one logit.
enum class Aggregation { sum, mean, min, max, linear };

std::string_view to_string(Aggregation a);
Aggregation parse_aggregation(std::string_view s);

template <typename T>
std::vector<T> aggregate(const Matrix<T>& h, Aggregation mode, const Matrix<T>* linear_w = nullptr);

template <typename T>
struct AggregateGrad {
    Matrix<T> grad_h;
    Matrix<T> grad_w;  // 1 x cols for linear mode, empty otherwise
};

/// min/max route the gradient to the first arg-extremum of each row.
template <typename T>
AggregateGrad<T> aggregate_backward(const Matrix<T>& h, Aggregation mode, const Matrix<T>* linear_w,
                                    std::span<const T> grad_logits);

template <typename T>
struct GdLoss {
    double loss = 0.0;
    std::vector<T> grad_pos;
    std::vector<T> grad_neg;
};

/// BCE with logits over [pos ++ neg] with targets [1]^N ++ [0]^N, mean over 2N.
template <typename T>
GdLoss<T> gd_loss(std::span<const T> logits_pos, std::span<const T> logits_neg);

template <typename T>
struct GroupStep {
    double loss = 0.0;
    ParamGrads<T> grads;
};

/// One siamese evaluation: encode both groups with shared params, aggregate,
/// scale logits by `logit_scale`, take gd_loss and backpropagate. Branch
/// gradients are merged positive first, then negative.
template <typename T>
GroupStep<T> group_discrimination_step(std::span<const CsrView> ops, bool symmetric, const Matrix<T>& pos_x,
                                       const Matrix<T>& neg_x, const EncoderParams<T>& params, Aggregation mode,
                                       T logit_scale = T{1});

template <typename T>
GroupStep<T> group_discrimination_step(const CsrGraph& g_norm, const Matrix<T>& pos_x, const Matrix<T>& neg_x,
                                       const EncoderParams<T>& params, Aggregation mode, T logit_scale = T{1});

struct TrainConfig {
    double lr = 1e-3;
    std::size_t epochs = 500;
    /// Stop after this many epochs without a new best loss; nullopt trains
    /// every epoch and returns the final parameters.
    std::optional<std::size_t> patience = 20;
    std::size_t hidden = 512;
    std::size_t num_conv = 1;
    std::size_t num_proj = 1;
    Aggregation aggregation = Aggregation::sum;
    Activation activation = Activation::prelu;
    AugmentConfig augment;
    std::uint64_t seed = 0;
    double weight_decay = 0.0;

    /// Throws ConfigError naming the offending key.
    void validate() const;
    EncoderShape encoder_shape(std::size_t in_dim) const;
};

struct TrainTrace {
    std::vector<double> loss;
    std::vector<double> seconds;
    std::size_t best_epoch = 0;
    std::uint64_t optimizer_steps = 0;

    std::size_t epochs_run() const noexcept { return loss.size(); }
};

struct TrainResult {
    EncoderParams<float> params;
    TrainTrace trace;
};

/// Group Discrimination training. `g` is the raw canonical adjacency (self
/// loops are added by the normalisation pipeline) and `x` the row-normalised
/// features. Returns the best-loss parameters when patience is set, otherwise
/// the parameters after the final epoch.
TrainResult train(const CsrGraph& g, const NodeFeatures& x, const TrainConfig& cfg);

/// The simplified DGI objective with constant summary s = epsilon * 1: logits
/// are epsilon * sum(h_i). epsilon = 1 reproduces train() with sum aggregation.
TrainResult train_dgi_constant_summary(const CsrGraph& g, const NodeFeatures& x, const TrainConfig& cfg,
                                       double epsilon);

/// "epoch,loss,seconds" with a header row.
void write_trace_csv(const TrainTrace& trace, std::ostream& out);

}  // namespace ggd
