#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ggd/discriminate.hpp"

namespace ggd {

struct BenchConfig {
    std::vector<std::size_t> sizes{1024, 2048, 4096, 8192};
    double avg_degree = 5.0;
    std::size_t feat_dim = 500;
    double feat_density = 0.02;
    std::size_t hidden = 256;
    std::size_t num_proj = 0;
    double temperature = 0.5;
    std::size_t gd_repeats = 7;
    std::size_t pairwise_repeats = 1;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::string method;  // "gd" or "pairwise"
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double seconds = 0.0;
};

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least-squares fit of log(y) = slope * log(x) + intercept.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Pairwise InfoNCE loss between two embedding views (cosine similarity,
/// temperature tau, intra- and inter-view negatives, symmetric over views).
/// Rows are processed in blocks so memory stays O(block * N).
double pairwise_infonce(const DenseMatrix& z1, const DenseMatrix& z2, double tau);

/// Seconds for one full GD epoch (both siamese branches, backward, Adam
/// step), best of `repeats` after one warm-up epoch.
double time_gd_epoch(const CsrGraph& g_norm, const NodeFeatures& x, const TrainConfig& cfg, std::size_t repeats);

/// Seconds for one pairwise reference pass: encode two views, then the
/// N x N InfoNCE loss. Best of `repeats` after one warm-up pass.
double time_pairwise_pass(const CsrGraph& g_norm, const NodeFeatures& x, const TrainConfig& cfg, double tau,
                          std::size_t repeats);

/// Times both methods at every size on random graphs with fixed average degree.
std::vector<BenchRow> run_scaling_bench(const BenchConfig& cfg);

/// "method,nodes,edges,seconds"
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);
/// "method,slope,r2", one log-log fit per method.
void write_fit_csv(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace ggd
