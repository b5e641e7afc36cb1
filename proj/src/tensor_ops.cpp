#include "ggd/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ggd/parallel.hpp"

namespace ggd {

namespace {

template <typename T>
void require_same_shape(const Matrix<T>& a, const Matrix<T>& b, const char* op) {
    if (!a.same_shape(b)) throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

// acc[0..n) += a * b[0..n)
template <typename T>
inline void axpy_acc(double* __restrict acc, double a, const T* __restrict b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) acc[j] += a * static_cast<double>(b[j]);
}

template <typename T>
inline void narrow(T* __restrict out, const double* __restrict acc, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) out[j] = static_cast<T>(acc[j]);
}

}  // namespace

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: " + shape_str(a) + " x " + shape_str(b));
    Matrix<T> out(a.rows(), b.cols());
    const std::size_t k = a.cols();
    const std::size_t m = b.cols();
    parallel_rows(a.rows(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(m);
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            const T* ar = a.data() + i * k;
            for (std::size_t p = 0; p < k; ++p) {
                if (ar[p] == T{0}) continue;
                axpy_acc(acc.data(), static_cast<double>(ar[p]), b.data() + p * m, m);
            }
            narrow(out.data() + i * m, acc.data(), m);
        }
    });
    return out;
}

template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows()) throw ShapeError("matmul_tn: " + shape_str(a) + "^T x " + shape_str(b));
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    const std::size_t m = b.cols();
    Matrix<T> out(k, m);
    // Each worker owns a contiguous range of output rows and sweeps the inputs
    // in ascending row order, so every entry sums in the same order.
    parallel_rows(k, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc((end - begin) * m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const T* ar = a.data() + i * k;
            const T* br = b.data() + i * m;
            for (std::size_t p = begin; p < end; ++p) {
                if (ar[p] == T{0}) continue;
                axpy_acc(acc.data() + (p - begin) * m, static_cast<double>(ar[p]), br, m);
            }
        }
        narrow(out.data() + begin * m, acc.data(), (end - begin) * m);
    });
    return out;
}

template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.cols()) throw ShapeError("matmul_nt: " + shape_str(a) + " x " + shape_str(b) + "^T");
    return matmul(a, transpose(b));
}

template <typename T>
Matrix<T> add(const Matrix<T>& a, const Matrix<T>& b) {
    require_same_shape(a, b, "add");
    Matrix<T> out = a;
    add_inplace(out, b);
    return out;
}

template <typename T>
Matrix<T> sub(const Matrix<T>& a, const Matrix<T>& b) {
    require_same_shape(a, b, "sub");
    Matrix<T> out = a;
    auto o = out.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
    return out;
}

template <typename T>
void add_inplace(Matrix<T>& a, const Matrix<T>& b) {
    require_same_shape(a, b, "add_inplace");
    auto o = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
}

template <typename T>
Matrix<T> scale(const Matrix<T>& a, T s) {
    Matrix<T> out = a;
    for (T& v : out.values()) v *= s;
    return out;
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& a) {
    Matrix<T> out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    }
    return out;
}

template <typename T>
Matrix<T> column_sums(const Matrix<T>& a) {
    std::vector<double> acc(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) axpy_acc(acc.data(), 1.0, a.data() + i * a.cols(), a.cols());
    Matrix<T> out(1, a.cols());
    narrow(out.data(), acc.data(), a.cols());
    return out;
}

template <typename T>
void spmm_into(const CsrView& s, const Matrix<T>& m, Matrix<T>& out) {
    if (s.cols != m.rows())
        throw ShapeError("spmm: sparse " + shape_str(s.rows, s.cols) + " x dense " + shape_str(m));
    if (&out == &m) throw InvalidArgument("spmm_into: output aliases the input");
    const std::size_t d = m.cols();
    if (out.rows() != s.rows || out.cols() != d) out = Matrix<T>(s.rows, d);
    parallel_rows(s.rows, [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc(d);
        for (std::size_t i = begin; i < end; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (auto e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e) {
                const double w = s.weighted() ? s.weights[e] : 1.0;
                axpy_acc(acc.data(), w, m.data() + static_cast<std::size_t>(s.col_idx[e]) * d, d);
            }
            narrow(out.data() + i * d, acc.data(), d);
        }
    });
}

template <typename T>
Matrix<T> spmm(const CsrView& s, const Matrix<T>& m) {
    Matrix<T> out;
    spmm_into(s, m, out);
    return out;
}

template <typename T>
Matrix<T> spmm_transposed(const CsrView& s, const Matrix<T>& m) {
    if (s.rows != m.rows())
        throw ShapeError("spmm_transposed: sparse " + shape_str(s.rows, s.cols) + "^T x dense " + shape_str(m));
    const std::size_t d = m.cols();
    std::vector<double> acc(s.cols * d, 0.0);
    for (std::size_t i = 0; i < s.rows; ++i) {
        const T* mr = m.data() + i * d;
        for (auto e = s.row_ptr[i]; e < s.row_ptr[i + 1]; ++e) {
            const double w = s.weighted() ? s.weights[e] : 1.0;
            axpy_acc(acc.data() + static_cast<std::size_t>(s.col_idx[e]) * d, w, mr, d);
        }
    }
    Matrix<T> out(s.cols, d);
    narrow(out.data(), acc.data(), acc.size());
    return out;
}

double xavier_bound(std::size_t fan_in, std::size_t fan_out, double gain) {
    return gain * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

DenseMatrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    if (fan_in == 0 || fan_out == 0) throw InvalidArgument("xavier_uniform: fans must be >= 1");
    const double a = xavier_bound(fan_in, fan_out);
    DenseMatrix w(fan_in, fan_out);
    for (float& v : w.values()) {
        // Map [0,1) to (-a, a); the float cast is clamped so |v| < a holds exactly.
        const double u = (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
        float x = static_cast<float>((2.0 * u - 1.0) * a);
        if (std::abs(static_cast<double>(x)) >= a) x = std::nextafter(x, 0.0f);
        v = x;
    }
    return w;
}

template <typename T>
Matrix<T> prelu(const Matrix<T>& x, T slope) {
    Matrix<T> out = x;
    for (T& v : out.values()) v = v > T{0} ? v : slope * v;
    return out;
}

template <typename T>
PreluGrad<T> prelu_backward(const Matrix<T>& grad, const Matrix<T>& cached_input, T slope) {
    require_same_shape(grad, cached_input, "prelu_backward");
    PreluGrad<T> r{Matrix<T>(grad.rows(), grad.cols()), T{}};
    auto g = grad.values();
    auto x = cached_input.values();
    auto gi = r.grad_input.values();
    double gs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (x[i] > T{0}) {
            gi[i] = g[i];
        } else {
            gi[i] = slope * g[i];
            gs += static_cast<double>(x[i]) * static_cast<double>(g[i]);
        }
    }
    r.grad_slope = static_cast<T>(gs);
    return r;
}

double stable_sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

template <typename T>
Matrix<T> sigmoid(const Matrix<T>& x) {
    Matrix<T> out = x;
    for (T& v : out.values()) v = static_cast<T>(stable_sigmoid(static_cast<double>(v)));
    return out;
}

template <typename T>
Matrix<T> activate(const Matrix<T>& pre, Activation act, T slope) {
    if (act == Activation::sigmoid) return sigmoid(pre);
    return prelu(pre, negative_slope(act, slope));
}

template <typename T>
PreluGrad<T> activate_backward(const Matrix<T>& grad, const Matrix<T>& pre, const Matrix<T>& post, Activation act,
                               T slope) {
    if (act == Activation::sigmoid) {
        require_same_shape(grad, post, "activate_backward");
        PreluGrad<T> r{Matrix<T>(grad.rows(), grad.cols()), T{}};
        auto g = grad.values();
        auto y = post.values();
        auto gi = r.grad_input.values();
        for (std::size_t i = 0; i < g.size(); ++i) gi[i] = g[i] * y[i] * (T{1} - y[i]);
        return r;
    }
    auto r = prelu_backward(grad, pre, negative_slope(act, slope));
    if (act != Activation::prelu) r.grad_slope = T{};
    return r;
}

template <typename T>
BceResult<T> bce_with_logits(std::span<const T> logits, std::span<const T> targets) {
    if (logits.size() != targets.size()) throw ShapeError("bce_with_logits: length mismatch");
    BceResult<T> r;
    r.grad_logits.resize(logits.size());
    if (logits.empty()) return r;
    const double n = static_cast<double>(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double x = static_cast<double>(logits[i]);
        const double y = static_cast<double>(targets[i]);
        total += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
        r.grad_logits[i] = static_cast<T>((stable_sigmoid(x) - y) / n);
    }
    r.loss = total / n;
    return r;
}

#define GGD_INSTANTIATE(T)                                                                                     \
    template Matrix<T> matmul<T>(const Matrix<T>&, const Matrix<T>&);                                          \
    template Matrix<T> matmul_tn<T>(const Matrix<T>&, const Matrix<T>&);                                       \
    template Matrix<T> matmul_nt<T>(const Matrix<T>&, const Matrix<T>&);                                       \
    template Matrix<T> add<T>(const Matrix<T>&, const Matrix<T>&);                                             \
    template Matrix<T> sub<T>(const Matrix<T>&, const Matrix<T>&);                                             \
    template void add_inplace<T>(Matrix<T>&, const Matrix<T>&);                                                \
    template Matrix<T> scale<T>(const Matrix<T>&, T);                                                          \
    template Matrix<T> transpose<T>(const Matrix<T>&);                                                         \
    template Matrix<T> column_sums<T>(const Matrix<T>&);                                                       \
    template Matrix<T> spmm<T>(const CsrView&, const Matrix<T>&);                                              \
    template void spmm_into<T>(const CsrView&, const Matrix<T>&, Matrix<T>&);                                  \
    template Matrix<T> spmm_transposed<T>(const CsrView&, const Matrix<T>&);                                   \
    template Matrix<T> prelu<T>(const Matrix<T>&, T);                                                          \
    template PreluGrad<T> prelu_backward<T>(const Matrix<T>&, const Matrix<T>&, T);                            \
    template Matrix<T> sigmoid<T>(const Matrix<T>&);                                                           \
    template Matrix<T> activate<T>(const Matrix<T>&, Activation, T);                                           \
    template PreluGrad<T> activate_backward<T>(const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, Activation, \
                                               T);                                                             \
    template BceResult<T> bce_with_logits<T>(std::span<const T>, std::span<const T>);

GGD_INSTANTIATE(float)
GGD_INSTANTIATE(double)

#undef GGD_INSTANTIATE

}  // namespace ggd
