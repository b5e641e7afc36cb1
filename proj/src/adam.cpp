#include "ggd/adam.hpp"

#include <cmath>
#include <string>

namespace ggd {

template <typename T>
void adam_step(AdamState<T>& state, std::span<T> p, std::span<const T> g) {
    if (p.size() != g.size() || state.m.size() != p.size() || state.v.size() != p.size())
        throw ShapeError("adam_step: param has " + std::to_string(p.size()) + " values, grad " +
                         std::to_string(g.size()) + ", state " + std::to_string(state.m.size()));
    const auto& o = state.options;
    ++state.t;
    const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));
    auto m = state.m.values();
    auto v = state.v.values();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = static_cast<double>(g[i]) + o.weight_decay * static_cast<double>(p[i]);
        const double mi = o.beta1 * static_cast<double>(m[i]) + (1.0 - o.beta1) * gi;
        const double vi = o.beta2 * static_cast<double>(v[i]) + (1.0 - o.beta2) * gi * gi;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double step = o.lr * (mi / c1) / (std::sqrt(vi / c2) + o.eps);
        p[i] = static_cast<T>(static_cast<double>(p[i]) - step);
    }
}

template <typename T>
void adam_step(AdamState<T>& state, Matrix<T>& param, const Matrix<T>& grad) {
    if (!param.same_shape(grad) || !state.m.same_shape(param))
        throw ShapeError("adam_step: param " + shape_str(param) + ", grad " + shape_str(grad) + ", state " +
                         shape_str(state.m));
    adam_step(state, param.values(), grad.values());
}

template <typename T>
MultiAdam<T>::MultiAdam(const std::vector<std::span<T>>& params, AdamOptions opts) {
    states_.reserve(params.size());
    for (const auto& p : params) states_.emplace_back(1, p.size(), opts);
}

template <typename T>
void MultiAdam<T>::step(const std::vector<std::span<T>>& params, const std::vector<std::span<T>>& grads) {
    if (params.size() != states_.size() || grads.size() != states_.size())
        throw ShapeError("MultiAdam::step: parameter layout changed");
    for (std::size_t i = 0; i < params.size(); ++i)
        adam_step(states_[i], params[i], std::span<const T>(grads[i].data(), grads[i].size()));
    ++steps_;
}

template void adam_step<float>(AdamState<float>&, std::span<float>, std::span<const float>);
template void adam_step<double>(AdamState<double>&, std::span<double>, std::span<const double>);
template void adam_step<float>(AdamState<float>&, Matrix<float>&, const Matrix<float>&);
template void adam_step<double>(AdamState<double>&, Matrix<double>&, const Matrix<double>&);
template class MultiAdam<float>;
template class MultiAdam<double>;

}  // namespace ggd
