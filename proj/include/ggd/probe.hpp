#pragma once

#include <cstdint>
#include <iosfwd>

#include "ggd/csr_graph.hpp"
#include "ggd/encoder.hpp"
#include "ggd/graph_store.hpp"

namespace ggd {

struct ProbeConfig {
    double lr = 1e-2;
    std::size_t epochs = 300;
    double l2_weight = 1e-5;
    std::uint64_t seed = 0;
};

struct ProbeResult {
    double train = 0.0;
    double val = 0.0;  // NaN when the validation split is empty
    double test = 0.0;
};

/// Initial softmax-regression weights: dim x classes Xavier-uniform from the
/// probe stream of `seed`.
DenseMatrix64 init_probe_weights(std::size_t dim, std::size_t classes, std::uint64_t seed);

/// Multinomial logistic regression on frozen embeddings, trained full-batch
/// with Adam on the train split (float64 throughout). Accuracy is the fraction
/// of nodes whose first arg-max class matches the label.
ProbeResult logistic_probe(const DenseMatrix& h, const LabeledSplit& split, const ProbeConfig& cfg = {});

/// "split,accuracy" with a header row.
void write_probe_csv(const ProbeResult& r, std::ostream& out);

enum class SummaryOuter { none, sigmoid };

struct SummaryStats {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    double range = 0.0;
};

/// Statistics of the summary vector s (column mean of a one-layer GCN output
/// using the first conv weight of `params`, no projector), optionally passed
/// through a sigmoid first.
SummaryStats summary_stats(const CsrGraph& g_norm, const NodeFeatures& z, const EncoderParams<float>& params,
                           Activation activation, SummaryOuter outer);

void write_summary_stats(const SummaryStats& s, std::ostream& out);

}  // namespace ggd
