#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ggd/error.hpp"
#include "ggd/graph_store.hpp"
#include "oracles.hpp"

using namespace ggd;

namespace {

std::vector<std::size_t> degrees(const CsrGraph& g) {
    std::vector<std::size_t> d;
    for (NodeId i = 0; i < g.num_nodes(); ++i) d.push_back(g.degree(i));
    return d;
}

EdgeList parse(const std::string& text, EdgeListOptions opts = {}) {
    std::istringstream in(text);
    return parse_edge_list(in, opts);
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ggd_test_gs_" + name);
}

}  // namespace

TEST_CASE("path graph P3 from an edge list") {
    const auto el = parse("0 1\n1 2\n");
    CHECK(el.graph.num_nodes() == 3);
    CHECK(degrees(el.graph) == std::vector<std::size_t>{1, 2, 1});
    CHECK(el.graph.is_symmetric());
}

TEST_CASE("empty edge list gives the empty graph") {
    const auto el = parse("");
    CHECK(el.graph.num_nodes() == 0);
    CHECK(el.graph.num_edges() == 0);
}

TEST_CASE("comments and blank lines are skipped") {
    const auto el = parse("# header\n\n0 1\n  # indented comment\n1 2\n");
    CHECK(el.graph.num_edges() == 4);
}

TEST_CASE("duplicate edges match a set-based dedup oracle") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> id(0, 9);
        std::ostringstream text;
        std::set<std::pair<int, int>> expect;
        for (int e = 0; e < 40; ++e) {
            const int u = id(gen), v = id(gen);
            text << u << ' ' << v << '\n';
            expect.insert({u, v});
            expect.insert({v, u});
        }
        EdgeListOptions opts;
        opts.num_nodes = 10;
        const auto el = parse(text.str(), opts);
        std::set<std::pair<int, int>> got;
        for (NodeId i = 0; i < el.graph.num_nodes(); ++i)
            for (NodeId j : el.graph.neighbors(i)) got.insert({static_cast<int>(i), static_cast<int>(j)});
        CHECK(got == expect);
    }
    CHECK(parse("0 1\n0 1\n").graph.num_edges() == 2);
}

TEST_CASE("malformed lines report their line number") {
    try {
        parse("0 1\n1 2 3\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse("0 x\n"), ParseError);
    CHECK_THROWS_AS(parse("7\n"), ParseError);
}

TEST_CASE("id overflow is a range error") {
    CHECK_THROWS_AS(parse("0 99999999999999999999999\n"), RangeError);
    EdgeListOptions opts;
    opts.num_nodes = 3;
    CHECK_THROWS_AS(parse("0 5\n", opts), RangeError);
}

TEST_CASE("sparse ids are remapped densely with the mapping kept") {
    const auto el = parse("100 7\n7 42\n");
    CHECK(el.graph.num_nodes() == 3);
    CHECK(el.original_ids == std::vector<std::int64_t>{7, 42, 100});
    CHECK(el.graph.has_edge(0, 2));
    CHECK(el.graph.has_edge(0, 1));
}

TEST_CASE("directed loading keeps orientation") {
    EdgeListOptions opts;
    opts.symmetrize = false;
    const auto el = parse("0 1\n", opts);
    CHECK(el.graph.has_edge(0, 1));
    CHECK_FALSE(el.graph.has_edge(1, 0));
}

TEST_CASE("edge list round trip preserves the edge set") {
    std::mt19937_64 gen(5);
    const auto g = oracle::to_graph(oracle::random_edges(30, 0.15, gen));
    std::ostringstream out;
    write_edge_list(g, out);
    EdgeListOptions opts;
    opts.num_nodes = g.num_nodes();
    CHECK(parse(out.str(), opts).graph == g);
}

TEST_CASE("CSR invariants are validated") {
    CHECK_THROWS(CsrGraph(2, {0, 1}, {1}));
    CHECK_THROWS(CsrGraph(2, {0, 2, 2}, {1, 1}));
    CHECK_THROWS(CsrGraph(2, {0, 1, 2}, {1, 5}));
    CHECK_THROWS(CsrGraph(2, {0, 1, 2}, {1, 0}, {1.0, NAN}));
    CHECK_NOTHROW(CsrGraph(2, {0, 1, 2}, {1, 0}, {0.5, 0.5}));
}

TEST_CASE("add_self_loops") {
    const auto p3 = parse("0 1\n1 2\n").graph;
    CHECK(degrees(add_self_loops(p3)) == std::vector<std::size_t>{2, 3, 2});

    const auto looped = CsrGraph::from_edges(2, {{0, 0}, {0, 1}}, true);
    const auto once = add_self_loops(looped);
    auto nb = once.neighbors(0);
    CHECK(std::count(nb.begin(), nb.end(), 0u) == 1);
    CHECK(add_self_loops(once) == once);

    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto es = oracle::random_edges(50, 0.08, gen, true);
        const auto g = oracle::to_graph(es);
        auto with = es.edges;
        for (NodeId i = 0; i < 50; ++i) with.insert({i, i});
        CHECK(add_self_loops(g).num_edges() == with.size());
    }
}

TEST_CASE("sym_normalize on small graphs") {
    const auto k3 = add_self_loops(CsrGraph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}}, true));
    const auto k3n = sym_normalize(k3);
    for (double w : k3n.weights()) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    const auto single = add_self_loops(CsrGraph::from_edges(1, {}, false));
    CHECK(sym_normalize(single).weights() == std::vector<double>{1.0});

    CHECK_THROWS_AS(sym_normalize(CsrGraph::from_edges(2, {{0, 1}}, false)), NumericError);
}

TEST_CASE("normalized adjacency equals the dense oracle within 1e-12") {
    std::mt19937_64 gen(2024);
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t n = 1 + gen() % 50;
        const double p = std::uniform_real_distribution<double>(0.0, 0.4)(gen);
        const auto es = oracle::random_edges(n, p, gen);
        const auto g = oracle::to_graph(es);
        const auto got = oracle::from_graph(normalized_adjacency(g));
        const auto want = oracle::sym_norm_with_loops(oracle::from_graph(g));
        CHECK(oracle::max_abs(got, want) <= 1e-12);
        CHECK(normalized_adjacency(g).is_symmetric());
    }
}

TEST_CASE("row_normalize") {
    DenseMatrix x{{2, 2}, {0, 0}};
    const auto z = row_normalize(x);
    CHECK(z(0, 0) == 0.5f);
    CHECK(z(0, 1) == 0.5f);
    CHECK(z(1, 0) == 0.0f);
    CHECK(z(1, 1) == 0.0f);

    std::mt19937_64 gen(8);
    auto m = oracle::random_matrix<float>(10, 5, gen, 0.0, 3.0);
    for (std::size_t j = 0; j < 5; ++j) m(3, j) = 0.0f;
    const auto r = row_normalize(m);
    for (std::size_t i = 0; i < 10; ++i) {
        double s = 0;
        for (float v : r.row(i)) s += v;
        if (i == 3) CHECK(s == 0.0);
        else CHECK(std::abs(s - 1.0) <= 1e-6);
    }
}

TEST_CASE("feature files") {
    const auto path = temp_path("features.ggdf");
    DenseMatrix x{{1, 2}, {3, 4}, {5, 6}};
    save_features(path, x);
    const auto back = load_features(path);
    CHECK(back.rows() == 3);
    CHECK(back.cols() == 2);
    CHECK(back == x);
    CHECK_THROWS_AS(load_features(path, 4), ShapeError);

    std::mt19937_64 gen(1);
    const auto big = oracle::random_matrix<float>(17, 9, gen, -1e6, 1e6);
    save_features(path, big);
    CHECK(load_features(path) == big);
    CHECK(load_features(path).values().size() == 17 * 9);

    // exact byte layout: magic, version, rows, cols, then f32 LE
    std::ostringstream bytes;
    write_dense(bytes, DenseMatrix{{1.0f}});
    const std::string s = bytes.str();
    REQUIRE(s.size() == 4 + 4 + 8 + 8 + 4);
    CHECK(s.substr(0, 4) == "GGDF");
    CHECK(s[4] == 1);
    CHECK(s[8] == 1);
    CHECK(s[16] == 1);
    CHECK(static_cast<unsigned char>(s[27]) == 0x3f);
    CHECK(static_cast<unsigned char>(s[26]) == 0x80);

    // header says three rows, only two present
    std::string truncated;
    {
        std::ostringstream o;
        write_dense(o, x);
        truncated = o.str().substr(0, o.str().size() - 8);
    }
    std::istringstream tin(truncated);
    CHECK_THROWS_AS(read_dense(tin), ShapeError);

    std::istringstream bad("NOPE");
    CHECK_THROWS_AS(read_dense(bad), IoError);
    std::filesystem::remove(path);
}

TEST_CASE("label files") {
    std::istringstream in("0 1 train\n1 0 val\n2 1 test\n3 0 none\n");
    const auto split = parse_labels(in, 5);
    CHECK(split.num_classes == 2);
    CHECK(split.labels == std::vector<std::int32_t>{1, 0, 1, 0, -1});
    CHECK(split.train == std::vector<NodeId>{0});
    CHECK(split.val == std::vector<NodeId>{1});
    CHECK(split.test == std::vector<NodeId>{2});

    std::ostringstream out;
    write_labels(split, out);
    std::istringstream again(out.str());
    const auto back = parse_labels(again, 5);
    CHECK(back.labels == split.labels);
    CHECK(back.test == split.test);

    std::istringstream oob("9 0 train\n");
    CHECK_THROWS(parse_labels(oob, 5));
    std::istringstream bad_split("0 0 holdout\n");
    CHECK_THROWS_AS(parse_labels(bad_split, 5), ParseError);
    std::istringstream twice("0 0 train\n0 0 test\n");
    CHECK_THROWS(parse_labels(twice, 5));
}

TEST_CASE("checksums change with the bytes") {
    const auto path = temp_path("sum.txt");
    { std::ofstream(path) << "0 1\n"; }
    const auto a = file_checksum(path);
    CHECK(file_checksum(path) == a);
    { std::ofstream(path) << "0 2\n"; }
    CHECK(file_checksum(path) != a);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(file_checksum(path), IoError);
}
