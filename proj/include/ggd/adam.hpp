#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ggd/matrix.hpp"

namespace ggd {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    /// L2 penalty folded into the gradient (grad += weight_decay * param).
    double weight_decay = 0.0;
};

/// Moment estimates for one parameter tensor.
template <typename T>
struct AdamState {
    AdamOptions options;
    Matrix<T> m;
    Matrix<T> v;
    std::uint64_t t = 0;

    AdamState() = default;
    AdamState(std::size_t rows, std::size_t cols, AdamOptions opts = {})
        : options(opts), m(rows, cols), v(rows, cols) {}
};

/// One bias-corrected Adam update of `param` in place. Increments state.t.
template <typename T>
void adam_step(AdamState<T>& state, Matrix<T>& param, const Matrix<T>& grad);

/// Same update over flat views; state.m / state.v must hold param.size() values.
template <typename T>
void adam_step(AdamState<T>& state, std::span<T> param, std::span<const T> grad);

/// Adam over a fixed list of parameter views that all step together.
template <typename T>
class MultiAdam {
public:
    MultiAdam() = default;
    MultiAdam(const std::vector<std::span<T>>& params, AdamOptions opts);

    /// params[i] -= update(grads[i]); sizes must match the construction layout.
    void step(const std::vector<std::span<T>>& params, const std::vector<std::span<T>>& grads);
    std::uint64_t steps() const noexcept { return steps_; }

private:
    std::vector<AdamState<T>> states_;
    std::uint64_t steps_ = 0;
};

}  // namespace ggd
