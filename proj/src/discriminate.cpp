#include "ggd/discriminate.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "ggd/adam.hpp"
#include "ggd/tensor_ops.hpp"

namespace ggd {

std::string_view to_string(Aggregation a) {
    switch (a) {
        case Aggregation::sum: return "sum";
        case Aggregation::mean: return "mean";
        case Aggregation::min: return "min";
        case Aggregation::max: return "max";
        case Aggregation::linear: return "linear";
    }
    return "?";
}

Aggregation parse_aggregation(std::string_view s) {
    if (s == "sum") return Aggregation::sum;
    if (s == "mean") return Aggregation::mean;
    if (s == "min") return Aggregation::min;
    if (s == "max") return Aggregation::max;
    if (s == "linear") return Aggregation::linear;
    throw ConfigError("unknown aggregation '" + std::string(s) + "'");
}

namespace {

template <typename T>
void require_linear_w(const Matrix<T>& h, Aggregation mode, const Matrix<T>* w) {
    if (mode != Aggregation::linear) return;
    if (w == nullptr || w->empty()) throw InvalidArgument("aggregate: linear mode needs a weight vector");
    if (w->size() != h.cols())
        throw ShapeError("aggregate: linear weight has " + std::to_string(w->size()) + " entries, rows have " +
                         std::to_string(h.cols()));
}

template <typename T>
std::size_t arg_extreme(std::span<const T> r, bool want_max) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j) {
        if (want_max ? r[j] > r[best] : r[j] < r[best]) best = j;
    }
    return best;
}

}  // namespace

template <typename T>
std::vector<T> aggregate(const Matrix<T>& h, Aggregation mode, const Matrix<T>* linear_w) {
    require_linear_w(h, mode, linear_w);
    if (h.cols() == 0) throw ShapeError("aggregate: embeddings have no columns");
    std::vector<T> out(h.rows());
    for (std::size_t i = 0; i < h.rows(); ++i) {
        auto r = h.row(i);
        double acc = 0.0;
        switch (mode) {
            case Aggregation::sum:
                for (T v : r) acc += v;
                break;
            case Aggregation::mean:
                for (T v : r) acc += v;
                acc /= static_cast<double>(r.size());
                break;
            case Aggregation::min: acc = r[arg_extreme(r, false)]; break;
            case Aggregation::max: acc = r[arg_extreme(r, true)]; break;
            case Aggregation::linear: {
                auto w = linear_w->values();
                for (std::size_t j = 0; j < r.size(); ++j) acc += static_cast<double>(r[j]) * static_cast<double>(w[j]);
                break;
            }
        }
        out[i] = static_cast<T>(acc);
    }
    return out;
}

template <typename T>
AggregateGrad<T> aggregate_backward(const Matrix<T>& h, Aggregation mode, const Matrix<T>* linear_w,
                                    std::span<const T> grad_logits) {
    require_linear_w(h, mode, linear_w);
    if (grad_logits.size() != h.rows()) throw ShapeError("aggregate_backward: one gradient per row expected");
    AggregateGrad<T> g{Matrix<T>(h.rows(), h.cols()), Matrix<T>()};
    std::vector<double> gw;
    if (mode == Aggregation::linear) gw.assign(h.cols(), 0.0);
    const T inv_cols = static_cast<T>(1.0 / static_cast<double>(h.cols()));
    for (std::size_t i = 0; i < h.rows(); ++i) {
        auto r = h.row(i);
        auto out = g.grad_h.row(i);
        const T gl = grad_logits[i];
        switch (mode) {
            case Aggregation::sum: std::fill(out.begin(), out.end(), gl); break;
            case Aggregation::mean: std::fill(out.begin(), out.end(), gl * inv_cols); break;
            case Aggregation::min: out[arg_extreme(r, false)] = gl; break;
            case Aggregation::max: out[arg_extreme(r, true)] = gl; break;
            case Aggregation::linear: {
                auto w = linear_w->values();
                for (std::size_t j = 0; j < r.size(); ++j) {
                    out[j] = gl * w[j];
                    gw[j] += static_cast<double>(gl) * static_cast<double>(r[j]);
                }
                break;
            }
        }
    }
    if (mode == Aggregation::linear) {
        g.grad_w = Matrix<T>(1, h.cols());
        for (std::size_t j = 0; j < gw.size(); ++j) g.grad_w(0, j) = static_cast<T>(gw[j]);
    }
    return g;
}

template <typename T>
GdLoss<T> gd_loss(std::span<const T> logits_pos, std::span<const T> logits_neg) {
    if (logits_pos.size() != logits_neg.size())
        throw ShapeError("gd_loss: " + std::to_string(logits_pos.size()) + " positive vs " +
                         std::to_string(logits_neg.size()) + " negative logits");
    const std::size_t n = logits_pos.size();
    std::vector<T> logits(logits_pos.begin(), logits_pos.end());
    logits.insert(logits.end(), logits_neg.begin(), logits_neg.end());
    std::vector<T> targets(2 * n, T{0});
    std::fill(targets.begin(), targets.begin() + static_cast<std::ptrdiff_t>(n), T{1});
    auto bce = bce_with_logits<T>(logits, targets);
    GdLoss<T> r;
    r.loss = bce.loss;
    r.grad_pos.assign(bce.grad_logits.begin(), bce.grad_logits.begin() + static_cast<std::ptrdiff_t>(n));
    r.grad_neg.assign(bce.grad_logits.begin() + static_cast<std::ptrdiff_t>(n), bce.grad_logits.end());
    return r;
}

namespace {

template <typename T>
void accumulate_into(ParamGrads<T>& into, const ParamGrads<T>& g) {
    for (std::size_t l = 0; l < into.conv.size(); ++l) {
        add_inplace(into.conv[l].weight, g.conv[l].weight);
        into.conv[l].slope += g.conv[l].slope;
    }
    for (std::size_t l = 0; l < into.proj.size(); ++l) {
        add_inplace(into.proj[l].weight, g.proj[l].weight);
        add_inplace(into.proj[l].bias, g.proj[l].bias);
        into.proj[l].slope += g.proj[l].slope;
    }
}

}  // namespace

template <typename T>
GroupStep<T> group_discrimination_step(std::span<const CsrView> ops, bool symmetric, const Matrix<T>& pos_x,
                                       const Matrix<T>& neg_x, const EncoderParams<T>& params, Aggregation mode,
                                       T logit_scale) {
    const Matrix<T>* w = params.has_agg_weight() ? &params.agg_weight : nullptr;
    auto pos = encode_forward(ops, symmetric, pos_x, params);
    auto neg = encode_forward(ops, symmetric, neg_x, params);
    auto lp = aggregate(pos.output, mode, w);
    auto ln = aggregate(neg.output, mode, w);
    for (T& v : lp) v *= logit_scale;
    for (T& v : ln) v *= logit_scale;
    auto loss = gd_loss<T>(lp, ln);
    for (T& v : loss.grad_pos) v *= logit_scale;
    for (T& v : loss.grad_neg) v *= logit_scale;
    auto agp = aggregate_backward<T>(pos.output, mode, w, loss.grad_pos);
    auto agn = aggregate_backward<T>(neg.output, mode, w, loss.grad_neg);

    GroupStep<T> step;
    step.loss = loss.loss;
    step.grads = encode_backward(agp.grad_h, pos.cache, params);
    accumulate_into(step.grads, encode_backward(agn.grad_h, neg.cache, params));
    if (params.has_agg_weight()) {
        step.grads.agg_weight = Matrix<T>(1, params.agg_weight.cols());
        if (mode == Aggregation::linear) {
            step.grads.agg_weight = agp.grad_w;
            add_inplace(step.grads.agg_weight, agn.grad_w);
        }
    }
    return step;
}

template <typename T>
GroupStep<T> group_discrimination_step(const CsrGraph& g_norm, const Matrix<T>& pos_x, const Matrix<T>& neg_x,
                                       const EncoderParams<T>& params, Aggregation mode, T logit_scale) {
    std::vector<CsrView> ops(params.conv.size(), g_norm.view());
    return group_discrimination_step<T>(std::span<const CsrView>(ops), true, pos_x, neg_x, params, mode, logit_scale);
}

void TrainConfig::validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be > 0");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
    if (num_conv < 1) throw ConfigError("num_conv must be >= 1");
    if (patience && *patience < 1) throw ConfigError("patience must be >= 1");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
    augment.validate();
}

EncoderShape TrainConfig::encoder_shape(std::size_t in_dim) const {
    EncoderShape s;
    s.in_dim = in_dim;
    s.hidden = hidden;
    s.num_conv = num_conv;
    s.num_proj = num_proj;
    s.activation = activation;
    s.linear_aggregation = aggregation == Aggregation::linear;
    return s;
}

namespace {

double grad_norm(ParamGrads<float>& g) {
    double s = 0.0;
    for (auto span : parameter_spans(g)) {
        for (float v : span) s += static_cast<double>(v) * v;
    }
    return std::sqrt(s);
}

TrainResult train_impl(const CsrGraph& g, const NodeFeatures& x, const TrainConfig& cfg, Aggregation mode,
                       float logit_scale) {
    cfg.validate();
    if (x.rows() != g.num_nodes())
        throw ShapeError("train: " + std::to_string(x.rows()) + " feature rows for " + std::to_string(g.num_nodes()) +
                         " nodes");
    Rng init_rng(cfg.seed, streams::init);
    Rng corrupt_rng(cfg.seed, streams::corrupt);
    Rng dropout_rng(cfg.seed, streams::dropout);

    auto params = init_encoder(cfg.encoder_shape(x.cols()), init_rng);
    auto spans = parameter_spans(params);
    MultiAdam<float> opt(spans, AdamOptions{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});

    const CsrGraph g_norm_fixed = cfg.augment.enabled ? CsrGraph() : normalized_adjacency(g);

    TrainResult result;
    auto& trace = result.trace;
    EncoderParams<float> best = params;
    double best_loss = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        CsrGraph g_aug;
        NodeFeatures x_aug;
        if (cfg.augment.enabled) {
            g_aug = normalized_adjacency(drop_edges(g, cfg.augment.drop_edge_p, dropout_rng));
            x_aug = drop_feature_dims(x, cfg.augment.drop_feat_p, dropout_rng);
        }
        const CsrGraph& g_norm = cfg.augment.enabled ? g_aug : g_norm_fixed;
        const NodeFeatures& pos_x = cfg.augment.enabled ? x_aug : x;
        const auto neg = shuffle_features(pos_x, corrupt_rng);

        auto step = group_discrimination_step<float>(g_norm, pos_x, neg.features, params, mode, logit_scale);
        if (!std::isfinite(step.loss)) {
            std::ostringstream msg;
            msg << "train: non-finite loss " << step.loss << " at epoch " << epoch
                << " (grad norm " << grad_norm(step.grads) << ")";
            throw NumericError(msg.str());
        }
        trace.loss.push_back(step.loss);
        if (step.loss < best_loss) {
            best_loss = step.loss;
            trace.best_epoch = epoch;
            best = params;
        }
        opt.step(spans, parameter_spans(step.grads));
        trace.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        if (cfg.patience && epoch - trace.best_epoch >= *cfg.patience) break;
    }
    trace.optimizer_steps = opt.steps();
    result.params = cfg.patience ? std::move(best) : std::move(params);
    return result;
}

}  // namespace

TrainResult train(const CsrGraph& g, const NodeFeatures& x, const TrainConfig& cfg) {
    return train_impl(g, x, cfg, cfg.aggregation, 1.0f);
}

TrainResult train_dgi_constant_summary(const CsrGraph& g, const NodeFeatures& x, const TrainConfig& cfg,
                                       double epsilon) {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be finite and >= 0");
    TrainConfig c = cfg;
    c.aggregation = Aggregation::sum;
    return train_impl(g, x, c, Aggregation::sum, static_cast<float>(epsilon));
}

void write_trace_csv(const TrainTrace& trace, std::ostream& out) {
    out << "epoch,loss,seconds\n";
    out << std::setprecision(9);
    for (std::size_t e = 0; e < trace.loss.size(); ++e) {
        out << e << ',' << trace.loss[e] << ',' << (e < trace.seconds.size() ? trace.seconds[e] : 0.0) << '\n';
    }
}

#define GGD_INSTANTIATE(T)                                                                                         \
    template std::vector<T> aggregate<T>(const Matrix<T>&, Aggregation, const Matrix<T>*);                         \
    template AggregateGrad<T> aggregate_backward<T>(const Matrix<T>&, Aggregation, const Matrix<T>*,               \
                                                    std::span<const T>);                                           \
    template GdLoss<T> gd_loss<T>(std::span<const T>, std::span<const T>);                                         \
    template GroupStep<T> group_discrimination_step<T>(std::span<const CsrView>, bool, const Matrix<T>&,           \
                                                       const Matrix<T>&, const EncoderParams<T>&, Aggregation, T); \
    template GroupStep<T> group_discrimination_step<T>(const CsrGraph&, const Matrix<T>&, const Matrix<T>&,        \
                                                       const EncoderParams<T>&, Aggregation, T);

GGD_INSTANTIATE(float)
GGD_INSTANTIATE(double)

#undef GGD_INSTANTIATE

}  // namespace ggd
