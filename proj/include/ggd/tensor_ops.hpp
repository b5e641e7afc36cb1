#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ggd/csr_graph.hpp"
#include "ggd/matrix.hpp"
#include "ggd/rng.hpp"

namespace ggd {

// Dense kernels. Every dot product accumulates in double and narrows once per
// output entry; the summation order is fixed (ascending inner index), so the
// row-parallel paths are bitwise identical to the sequential one.

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);
/// a^T * b
template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b);
/// a * b^T
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b);

template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b);
template <typename T>
Matrix<T> sub(const Matrix<T>& a, const Matrix<T>& b);
template <typename T>
Matrix<T> scale(const Matrix<T>& a, T s);
template <typename T>
Matrix<T> transpose(const Matrix<T>& a);
/// In-place a += b.
template <typename T>
void add_inplace(Matrix<T>& a, const Matrix<T>& b);
/// 1 x cols row of column sums.
template <typename T>
Matrix<T> column_sums(const Matrix<T>& a);

/// out[i,:] = sum_e w_e * m[col_e,:] over row i of the sparse operand.
template <typename T>
Matrix<T> spmm(const CsrView& s, const Matrix<T>& m);
/// spmm writing into `out`, reusing its storage when the shape already fits.
/// `out` must not alias `m`.
template <typename T>
void spmm_into(const CsrView& s, const Matrix<T>& m, Matrix<T>& out);
/// s^T * m for a rectangular operand; output has s.cols rows.
template <typename T>
Matrix<T> spmm_transposed(const CsrView& s, const Matrix<T>& m);

template <typename T>
Matrix<T> spmm(const CsrGraph& g, const Matrix<T>& m) {
    return spmm(g.view(), m);
}

/// a = gain * sqrt(6 / (fan_in + fan_out)).
double xavier_bound(std::size_t fan_in, std::size_t fan_out, double gain = 1.0);
/// fan_in x fan_out matrix with entries drawn from U(-a, a).
DenseMatrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

enum class Activation { prelu, relu, lrelu, sigmoid };

/// Negative-side slope: learned for PReLU, 0 for ReLU, 0.01 for leaky ReLU.
/// Meaningless for sigmoid.
template <typename T>
T negative_slope(Activation act, T learned) {
    switch (act) {
        case Activation::prelu: return learned;
        case Activation::relu: return T{0};
        case Activation::lrelu: return T(0.01);
        case Activation::sigmoid: return T{0};
    }
    return learned;
}

template <typename T>
Matrix<T> prelu(const Matrix<T>& x, T slope);

template <typename T>
struct PreluGrad {
    Matrix<T> grad_input;
    /// sum over entries of min(0, x) * grad
    T grad_slope{};
};

template <typename T>
PreluGrad<T> prelu_backward(const Matrix<T>& grad, const Matrix<T>& cached_input, T slope);

template <typename T>
Matrix<T> sigmoid(const Matrix<T>& x);

/// Applies the activation; `slope` is the learned PReLU slope.
template <typename T>
Matrix<T> activate(const Matrix<T>& pre, Activation act, T slope);

/// Backward of activate. `post` is the forward output (used by sigmoid).
template <typename T>
PreluGrad<T> activate_backward(const Matrix<T>& grad, const Matrix<T>& pre, const Matrix<T>& post,
                               Activation act, T slope);

double stable_sigmoid(double x);

template <typename T>
struct BceResult {
    double loss = 0.0;
    std::vector<T> grad_logits;
};

/// Mean sigmoid cross entropy, via max(x,0) - x*y + log(1 + exp(-|x|)).
/// grad = (sigmoid(x) - y) / n.
template <typename T>
BceResult<T> bce_with_logits(std::span<const T> logits, std::span<const T> targets);

}  // namespace ggd
