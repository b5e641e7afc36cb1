#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ggd/encoder.hpp"
#include "ggd/error.hpp"
#include "ggd/graph_store.hpp"
#include "ggd/perturb.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace ggd;

namespace {

EncoderParams<float> make(std::size_t in, std::size_t hidden, std::size_t nc, std::size_t np, std::uint64_t seed,
                          Activation act = Activation::prelu, bool linear = false) {
    EncoderShape s;
    s.in_dim = in;
    s.hidden = hidden;
    s.num_conv = nc;
    s.num_proj = np;
    s.activation = act;
    s.linear_aggregation = linear;
    Rng rng(seed, streams::init);
    return init_encoder(s, rng);
}

oracle::Dense prelu_dense(oracle::Dense m, double slope) {
    for (auto& r : m)
        for (double& v : r)
            if (v <= 0) v *= slope;
    return m;
}

}  // namespace

TEST_CASE("init layout") {
    const auto p = make(10, 6, 2, 2, 1, Activation::prelu, true);
    REQUIRE(p.conv.size() == 2);
    REQUIRE(p.proj.size() == 2);
    CHECK(p.conv[0].weight.rows() == 10);
    CHECK(p.conv[1].weight.rows() == 6);
    CHECK(p.proj[1].weight.cols() == 6);
    CHECK(p.proj[0].bias.cols() == 6);
    for (float b : p.proj[0].bias.values()) CHECK(b == 0.0f);
    CHECK(p.conv[0].slope == kInitialPreluSlope);
    CHECK(p.agg_weight.cols() == 6);
    CHECK(p.input_dim() == 10);
    CHECK(p.output_dim() == 6);
    CHECK_NOTHROW(p.validate());
    CHECK(make(10, 6, 2, 2, 1, Activation::prelu, true) == p);
}

TEST_CASE("single node identity pipeline") {
    const auto g = normalized_adjacency(CsrGraph::from_edges(1, {}, false));
    EncoderParams<float> p;
    p.conv.push_back({DenseMatrix::identity(3), 1.0f});
    DenseMatrix z{{0.5f, -2.0f, 3.0f}};
    CHECK(encode_forward(g, z, p).output == z);
}

TEST_CASE("K3 with constant rows gives identical outputs") {
    const auto g = normalized_adjacency(CsrGraph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}}, true));
    const auto p = make(4, 5, 1, 1, 2);
    DenseMatrix z{{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}};
    const auto h = encode(g, z, p);
    for (std::size_t i = 1; i < 3; ++i)
        for (std::size_t j = 0; j < h.cols(); ++j) CHECK(h(i, j) == doctest::Approx(h(0, j)).epsilon(1e-6));
}

TEST_CASE("forward matches a hand-composed dense oracle") {
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = normalized_adjacency(oracle::to_graph(oracle::random_edges(12, 0.3, gen)));
        const auto z = oracle::random_matrix<float>(12, 7, gen);
        auto p = make(7, 5, 1, 1, static_cast<std::uint64_t>(trial));
        p.proj[0].bias = oracle::random_matrix<float>(1, 5, gen);
        const auto v = oracle::matmul(oracle::from_graph(g), oracle::from(z));
        const auto h = prelu_dense(oracle::matmul(v, oracle::from(p.conv[0].weight)), p.conv[0].slope);
        auto out = oracle::matmul(h, oracle::from(p.proj[0].weight));
        for (auto& r : out)
            for (std::size_t j = 0; j < r.size(); ++j) r[j] += p.proj[0].bias(0, j);
        CHECK(oracle::max_abs(oracle::from(encode(g, z, p)), out) <= 1e-6);
        CHECK(encode(g, z, p) == encode_forward(g, z, p).output);
    }
}

TEST_CASE("dimension chain errors") {
    const auto g = normalized_adjacency(CsrGraph::from_edges(3, {{0, 1}}, true));
    const auto p = make(4, 5, 1, 1, 3);
    CHECK_THROWS_AS(encode(g, DenseMatrix(3, 6), p), ShapeError);
    auto broken = p;
    broken.proj[0].weight = DenseMatrix(4, 5);
    CHECK_THROWS_AS(broken.validate(), ShapeError);
    auto nan = p;
    nan.conv[0].weight(0, 0) = NAN;
    CHECK_THROWS_AS(nan.validate(), NumericError);
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
    std::mt19937_64 gen(13);
    const auto g = normalized_adjacency(oracle::to_graph(oracle::random_edges(9, 0.3, gen)));
    const auto z = oracle::random_matrix<float>(9, 4, gen);
    auto p = make(4, 3, 2, 2, 4);
    const auto f = encode_forward(g, z, p);
    auto grads = encode_backward(DenseMatrix(f.output.rows(), f.output.cols()), f.cache, p);
    for (auto s : parameter_spans(grads))
        for (float v : s) CHECK(v == 0.0f);
}

TEST_CASE("scalar network matches the hand chain rule") {
    // one node, weight w, prelu slope a, projector weight u and bias b: y = u * act(z w) + b
    const auto g = normalized_adjacency(CsrGraph::from_edges(1, {}, false));
    EncoderParams<double> p;
    p.conv.push_back({DenseMatrix64{{-0.7}}, 0.25});
    p.proj.push_back({DenseMatrix64{{1.5}}, DenseMatrix64{{0.1}}, 0.0});
    const DenseMatrix64 z{{2.0}};
    const auto f = encode_forward(g, z, p);
    const double pre = 2.0 * -0.7;
    CHECK(f.output(0, 0) == doctest::Approx(1.5 * 0.25 * pre + 0.1));
    const auto gr = encode_backward(DenseMatrix64{{1.0}}, f.cache, p);
    CHECK(gr.proj[0].weight(0, 0) == doctest::Approx(0.25 * pre));
    CHECK(gr.proj[0].bias(0, 0) == doctest::Approx(1.0));
    CHECK(gr.conv[0].slope == doctest::Approx(1.5 * pre));
    CHECK(gr.conv[0].weight(0, 0) == doctest::Approx(1.5 * 0.25 * 2.0));
}

TEST_CASE("encoder gradients match central differences") {
    std::mt19937_64 gen(14);
    for (auto act : {Activation::prelu, Activation::relu, Activation::lrelu, Activation::sigmoid}) {
        const auto g = normalized_adjacency(oracle::to_graph(oracle::random_edges(10, 0.3, gen)));
        const auto z = oracle::random_matrix<double>(10, 5, gen);
        auto p = make(5, 4, 2, 2, 5, act).cast<double>();
        for (auto& l : p.proj) l.bias = oracle::random_matrix<double>(1, l.bias.cols(), gen, -0.1, 0.1);
        const auto dir = oracle::random_matrix<double>(10, 4, gen);
        auto loss = [&](const EncoderParams<double>& q) {
            const auto h = encode(g, z, q);
            double s = 0;
            for (std::size_t i = 0; i < h.size(); ++i) s += h.values()[i] * dir.values()[i];
            return s;
        };
        const auto f = encode_forward(g, z, p);
        auto grads = encode_backward(dir, f.cache, p);
        auto ga = parameter_spans(grads);
        auto ps = parameter_spans(p);
        double worst = 0;
        for (std::size_t k = 0; k < ps.size(); ++k)
            for (std::size_t i = 0; i < ps[k].size(); ++i) {
                const double keep = ps[k][i];
                ps[k][i] = keep + 1e-6;
                const double up = loss(p);
                ps[k][i] = keep - 1e-6;
                const double down = loss(p);
                ps[k][i] = keep;
                worst = std::max(worst, gradcheck::rel_err(ga[k][i], (up - down) / 2e-6));
            }
        CHECK(worst <= 1e-3);
    }
}

TEST_CASE("stale cache is rejected") {
    const auto g = normalized_adjacency(CsrGraph::from_edges(4, {{0, 1}, {2, 3}}, true));
    const auto z = DenseMatrix(4, 3, 0.5f);
    const auto p1 = make(3, 4, 1, 1, 6);
    const auto p2 = make(3, 4, 2, 1, 6);
    const auto p3 = make(3, 5, 1, 1, 6);
    const auto f = encode_forward(g, z, p1);
    CHECK_THROWS_AS(encode_backward(f.output, f.cache, p2), InvalidArgument);
    CHECK_THROWS_AS(encode_backward(f.output, f.cache, p3), InvalidArgument);
    CHECK_THROWS_AS(encode_backward(DenseMatrix(4, 2), f.cache, p1), ShapeError);
}

TEST_CASE("permutations") {
    std::mt19937_64 gen(15);
    const auto g = oracle::to_graph(oracle::random_edges(20, 0.2, gen));
    const auto x = oracle::random_matrix<float>(20, 6, gen);
    std::vector<NodeId> ident(20), rev(20);
    for (NodeId i = 0; i < 20; ++i) {
        ident[i] = i;
        rev[i] = 19 - i;
    }
    const auto same = permute_graph_and_features(g, x, ident);
    CHECK(same.first == g);
    CHECK(same.second == x);
    const auto once = permute_graph_and_features(g, x, rev);
    const auto twice = permute_graph_and_features(once.first, once.second, rev);
    CHECK(twice.first == g);
    CHECK(twice.second == x);
    CHECK_THROWS_AS(permute_graph_and_features(g, x, std::vector<NodeId>(20, 0)), InvalidArgument);

    const auto p = make(6, 8, 2, 1, 7);
    for (int trial = 0; trial < 10; ++trial) {
        Rng rng(static_cast<std::uint64_t>(trial), streams::data);
        const auto perm = random_permutation(20, rng);
        const auto [g2, x2] = permute_graph_and_features(g, x, perm);
        const auto h = encode(normalized_adjacency(g), x, p);
        const auto h2 = encode(normalized_adjacency(g2), x2, p);
        CHECK(oracle::max_abs(oracle::from(h2), oracle::from(permute_rows(h, perm))) <= 1e-5);
    }
}

TEST_CASE("output magnitude bound at init") {
    Rng rng(16, streams::data);
    std::mt19937_64 gen(16);
    const auto g = normalized_adjacency(oracle::to_graph(oracle::random_edges(200, 0.03, gen)));
    const auto z = row_normalize(oracle::random_matrix<float>(200, 50, gen, 0.0, 1.0));
    for (auto act : {Activation::relu, Activation::lrelu, Activation::prelu}) {
        const auto p = make(50, 32, 1, 0, 17, act);
        const auto h = encode(g, z, p);
        const auto v = oracle::matmul(oracle::from_graph(g), oracle::from(z));
        double max_l1 = 0;
        for (const auto& r : v) {
            double s = 0;
            for (double e : r) s += std::abs(e);
            max_l1 = std::max(max_l1, s);
        }
        const double a = xavier_bound(50, 32);
        for (float e : h.values()) CHECK(std::abs(e) <= a * max_l1 * (1 + 1e-6));
    }
}

TEST_CASE("checkpoint round trip") {
    for (bool linear : {false, true}) {
        const auto p = make(9, 4, 2, 3, 8, Activation::lrelu, linear);
        std::stringstream buf;
        write_checkpoint(buf, p);
        const std::string bytes = buf.str();
        CHECK(bytes.substr(0, 4) == "GGDP");
        CHECK(bytes[4] == 1);
        const auto back = read_checkpoint(buf);
        CHECK(back == p);
        std::stringstream again;
        write_checkpoint(again, back);
        CHECK(again.str() == bytes);
    }
    std::stringstream bad("GGDX\x01\0\0\0");
    CHECK_THROWS_AS(read_checkpoint(bad), IoError);
    CHECK_THROWS_AS(load_checkpoint("/nonexistent/model.ggdp"), IoError);
    CHECK(parse_activation("lrelu") == Activation::lrelu);
    CHECK_THROWS_AS(parse_activation("tanh"), ConfigError);
}
