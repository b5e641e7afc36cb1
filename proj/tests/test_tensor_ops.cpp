#include <cmath>
#include <random>

#include "doctest.h"
#include "ggd/adam.hpp"
#include "ggd/error.hpp"
#include "ggd/graph_store.hpp"
#include "ggd/parallel.hpp"
#include "ggd/rng.hpp"
#include "ggd/tensor_ops.hpp"
#include "oracles.hpp"

using namespace ggd;

TEST_CASE("rng streams are reproducible and independent") {
    Rng a(7, streams::init), b(7, streams::init), c(7, streams::corrupt), d(8, streams::init);
    bool differs_stream = false, differs_seed = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs_stream |= x != c.next_u64();
        differs_seed |= x != d.next_u64();
    }
    CHECK(differs_stream);
    CHECK(differs_seed);
    CHECK(a.counter() == 100);

    Rng u(1, streams::data);
    for (int i = 0; i < 10000; ++i) {
        const double v = u.uniform();
        CHECK((v >= 0.0 && v < 1.0));
        CHECK(u.below(7) < 7);
    }
    // first SplitMix64 output for state 0 is a published constant
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("xavier_uniform bounds") {
    CHECK(xavier_bound(3, 3) == doctest::Approx(1.0));
    CHECK(xavier_bound(1433, 512) == doctest::Approx(std::sqrt(6.0 / 1945.0)).epsilon(1e-12));
    CHECK(xavier_bound(1433, 512) == doctest::Approx(0.05554).epsilon(1e-3));

    Rng rng(3, streams::init);
    const auto w = xavier_uniform(3, 3, rng);
    for (float v : w.values()) CHECK(std::abs(v) < 1.0f);

    Rng r2(4, streams::init);
    const auto big = xavier_uniform(100, 100, r2);
    const double a = xavier_bound(100, 100);
    double s = 0, ss = 0;
    for (float v : big.values()) {
        CHECK(std::abs(v) < a);
        s += v;
        ss += static_cast<double>(v) * v;
    }
    const double n = static_cast<double>(big.size());
    const double mean = s / n;
    const double sd = std::sqrt(ss / n - mean * mean);
    CHECK(std::abs(mean) < 0.02 * a);
    CHECK(std::abs(sd - a / std::sqrt(3.0)) <= 0.1 * a / std::sqrt(3.0));

    Rng r3(4, streams::init);
    CHECK(xavier_uniform(100, 100, r3) == big);
}

TEST_CASE("matmul and friends") {
    const auto eye = DenseMatrix::identity(3);
    std::mt19937_64 gen(1);
    const auto m = oracle::random_matrix<float>(3, 4, gen);
    CHECK(matmul(eye, m) == m);
    const auto diff = add(m, scale(m, -1.0f));
    for (float v : diff.values()) CHECK(v == 0.0f);
    CHECK(transpose(transpose(m)) == m);
    CHECK_THROWS_AS(matmul(m, m), ShapeError);
    CHECK_THROWS_AS(add(m, eye), ShapeError);

    for (int trial = 0; trial < 20; ++trial) {
        const auto a = oracle::random_matrix<float>(17, 13, gen);
        const auto b = oracle::random_matrix<float>(13, 5, gen);
        const auto want = oracle::matmul(oracle::from(a), oracle::from(b));
        CHECK(oracle::max_rel(oracle::from(matmul(a, b)), want) <= 1e-5);
        const auto at = transpose(a);
        CHECK(oracle::max_rel(oracle::from(matmul_tn(at, b)), want) <= 1e-5);
        const auto bt = transpose(b);
        CHECK(oracle::max_rel(oracle::from(matmul_nt(a, bt)), want) <= 1e-5);
    }
}

TEST_CASE("column_sums") {
    DenseMatrix m{{1, 2}, {3, 4}, {5, 6}};
    const auto s = column_sums(m);
    CHECK(s.rows() == 1);
    CHECK(s(0, 0) == 9.0f);
    CHECK(s(0, 1) == 12.0f);
}

TEST_CASE("spmm small cases") {
    const auto loops = add_self_loops(CsrGraph::from_edges(4, {}, false));
    std::mt19937_64 gen(2);
    const auto m = oracle::random_matrix<float>(4, 3, gen);
    CHECK(spmm(loops, m) == m);

    const auto k3 = normalized_adjacency(CsrGraph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}}, true));
    const auto out = spmm(k3, DenseMatrix{{3}, {3}, {3}});
    for (float v : out.values()) CHECK(v == doctest::Approx(3.0f).epsilon(1e-6));
    CHECK_THROWS_AS(spmm(k3, m), ShapeError);
}

TEST_CASE("spmm matches the dense oracle on random graphs") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 1 + gen() % 64;
        const std::size_t d = 1 + gen() % 16;
        const auto g = normalized_adjacency(oracle::to_graph(oracle::random_edges(n, 0.1, gen)));
        const auto m = oracle::random_matrix<float>(n, d, gen);
        const auto want = oracle::matmul(oracle::from_graph(g), oracle::from(m));
        CHECK(oracle::max_rel(oracle::from(spmm(g, m)), want) <= 1e-5);
        const auto want_t = oracle::matmul(oracle::transpose(oracle::from_graph(g)), oracle::from(m));
        CHECK(oracle::max_rel(oracle::from(spmm_transposed(g.view(), m)), want_t) <= 1e-5);
    }
}

TEST_CASE("row-parallel kernels are bitwise identical to sequential") {
    std::mt19937_64 gen(5);
    const auto g = normalized_adjacency(oracle::to_graph(oracle::random_edges(600, 0.02, gen)));
    const auto m = oracle::random_matrix<float>(600, 40, gen);
    const auto w = oracle::random_matrix<float>(40, 30, gen);
    set_num_workers(1);
    const auto s1 = spmm(g, m);
    const auto p1 = matmul(m, w);
    const auto t1 = matmul_tn(m, p1);
    set_num_workers(4);
    CHECK(spmm(g, m) == s1);
    CHECK(matmul(m, w) == p1);
    CHECK(matmul_tn(m, p1) == t1);
    set_num_workers(1);
}

TEST_CASE("prelu forward and backward") {
    DenseMatrix x{{-1, 2}};
    const auto r = prelu(x, 0.0f);
    CHECK(r(0, 0) == 0.0f);
    CHECK(r(0, 1) == 2.0f);
    CHECK(prelu(x, 1.0f) == x);

    std::mt19937_64 gen(6);
    const auto in = oracle::random_matrix<double>(5, 4, gen);
    const auto g = oracle::random_matrix<double>(5, 4, gen);
    const double slope = 0.25, h = 1e-6;
    auto loss = [&](const DenseMatrix64& z, double s) {
        const auto y = prelu(z, s);
        double acc = 0;
        for (std::size_t i = 0; i < y.size(); ++i) acc += y.values()[i] * g.values()[i];
        return acc;
    };
    const auto back = prelu_backward(g, in, slope);
    const double fd_slope = (loss(in, slope + h) - loss(in, slope - h)) / (2 * h);
    CHECK(std::abs(back.grad_slope - fd_slope) <= 1e-4 * std::max(1.0, std::abs(fd_slope)));
    for (std::size_t i = 0; i < in.size(); ++i) {
        auto plus = in, minus = in;
        plus.values()[i] += h;
        minus.values()[i] -= h;
        const double fd = (loss(plus, slope) - loss(minus, slope)) / (2 * h);
        CHECK(std::abs(back.grad_input.values()[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("sigmoid activation backward") {
    std::mt19937_64 gen(7);
    const auto in = oracle::random_matrix<double>(3, 3, gen, -3, 3);
    const auto g = oracle::random_matrix<double>(3, 3, gen);
    const auto post = activate(in, Activation::sigmoid, 0.0);
    const auto back = activate_backward(g, in, post, Activation::sigmoid, 0.0);
    CHECK(back.grad_slope == 0.0);
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-in.values()[i]));
        CHECK(back.grad_input.values()[i] == doctest::Approx(g.values()[i] * s * (1 - s)).epsilon(1e-12));
    }
    const auto relu_back = activate_backward(g, in, activate(in, Activation::relu, 0.7), Activation::relu, 0.7);
    CHECK(relu_back.grad_slope == 0.0);
}

TEST_CASE("bce_with_logits") {
    const std::vector<double> zero{0.0}, one{1.0};
    CHECK(bce_with_logits<double>(zero, one).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    const std::vector<double> fifty{50.0};
    CHECK(bce_with_logits<double>(fifty, one).loss < 1e-20);

    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-20, 20);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(31), y(31);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = u(gen);
            y[i] = (gen() & 1) ? 1.0 : 0.0;
        }
        const auto r = bce_with_logits<double>(x, y);
        long double want = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const long double p = 1.0L / (1.0L + std::exp(-static_cast<long double>(x[i])));
            want -= y[i] ? std::log(p) : std::log1p(-p);
            const long double g = (p - y[i]) / x.size();
            CHECK(std::abs(r.grad_logits[i] - static_cast<double>(g)) <= 1e-6);
        }
        want /= x.size();
        CHECK(std::abs(r.loss - static_cast<double>(want)) <= 1e-6);
    }

    std::vector<float> extreme{-1e4f, 1e4f, -1e4f, 1e4f};
    std::vector<float> t{1, 0, 0, 1};
    const auto e = bce_with_logits<float>(extreme, t);
    CHECK(std::isfinite(e.loss));
    for (float g : e.grad_logits) CHECK(std::isfinite(g));
}

TEST_CASE("adam") {
    AdamOptions o;
    o.lr = 0.01;
    {
        AdamState<double> st(1, 2, o);
        DenseMatrix64 p{{1.0, -1.0}};
        adam_step(st, p, DenseMatrix64{{3.0, -0.5}});
        CHECK(p(0, 0) == doctest::Approx(1.0 - 0.01).epsilon(1e-9));
        CHECK(p(0, 1) == doctest::Approx(-1.0 + 0.01).epsilon(1e-9));
        CHECK(st.t == 1);
    }
    {
        AdamState<double> st(1, 1, o);
        DenseMatrix64 p{{2.0}};
        adam_step(st, p, DenseMatrix64{{0.0}});
        CHECK(p(0, 0) == 2.0);
        CHECK(st.t == 1);
    }
    {
        // three steps by hand
        AdamState<double> st(1, 1, o);
        DenseMatrix64 p{{0.5}};
        const double grads[3] = {0.2, -0.1, 0.4};
        double x = 0.5, m = 0, v = 0;
        for (int t = 1; t <= 3; ++t) {
            adam_step(st, p, DenseMatrix64{{grads[t - 1]}});
            m = 0.9 * m + 0.1 * grads[t - 1];
            v = 0.999 * v + 0.001 * grads[t - 1] * grads[t - 1];
            const double mh = m / (1 - std::pow(0.9, t));
            const double vh = v / (1 - std::pow(0.999, t));
            x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
            CHECK(std::abs(p(0, 0) - x) <= 1e-10);
        }
    }
    AdamState<double> st(1, 1, o);
    DenseMatrix64 p{{1.0, 2.0}};
    CHECK_THROWS_AS(adam_step(st, p, DenseMatrix64{{1.0, 2.0}}), ShapeError);
}
