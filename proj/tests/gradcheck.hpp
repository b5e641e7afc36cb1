#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ggd/discriminate.hpp"
#include "ggd/encoder.hpp"

namespace gradcheck {

struct Report {
    double max_rel = 0.0;
    std::size_t checked = 0;
    std::string worst;
};

inline double rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

/// Central differences of the full group-discrimination loss with respect to
/// every trainable scalar, compared against group_discrimination_step's
/// analytic gradients. Runs entirely in double.
inline Report check_group_step(const ggd::CsrGraph& g_norm, const ggd::DenseMatrix64& pos,
                               const ggd::DenseMatrix64& neg, ggd::EncoderParams<double> params,
                               ggd::Aggregation mode, double h = 1e-6) {
    const auto step = ggd::group_discrimination_step<double>(g_norm, pos, neg, params, mode);
    auto grads = step.grads;
    auto analytic = ggd::parameter_spans(grads);
    std::vector<std::string> names;
    ggd::for_each_parameter<double>(params, [&](std::string_view name, std::span<double>) {
        names.emplace_back(name);
    });
    auto spans = ggd::parameter_spans(params);
    Report r;
    for (std::size_t k = 0; k < spans.size(); ++k) {
        for (std::size_t i = 0; i < spans[k].size(); ++i) {
            const double keep = spans[k][i];
            spans[k][i] = keep + h;
            const double up = ggd::group_discrimination_step<double>(g_norm, pos, neg, params, mode).loss;
            spans[k][i] = keep - h;
            const double down = ggd::group_discrimination_step<double>(g_norm, pos, neg, params, mode).loss;
            spans[k][i] = keep;
            const double numeric = (up - down) / (2 * h);
            const double e = rel_err(analytic[k][i], numeric);
            ++r.checked;
            if (e > r.max_rel) {
                r.max_rel = e;
                r.worst = names[k] + "[" + std::to_string(i) + "]";
            }
        }
    }
    return r;
}

}  // namespace gradcheck
