#include "ggd/graph_store.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "ggd/rng.hpp"
#include "le_io.hpp"

namespace ggd {

using detail::get_le;
using detail::put_le;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n\v\f");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n\v\f");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::int64_t parse_int(std::string_view tok, std::size_t line) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec == std::errc::result_out_of_range)
        throw RangeError("line " + std::to_string(line) + ": integer out of range: " + std::string(tok));
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError("expected integer, got '" + std::string(tok) + "'", line);
    return v;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace

EdgeList parse_edge_list(std::istream& in, const EdgeListOptions& opts) {
    std::vector<std::pair<std::int64_t, std::int64_t>> raw;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        auto toks = split_ws(s);
        if (toks.size() != 2) throw ParseError("expected 'src dst', got '" + std::string(s) + "'", lineno);
        const auto u = parse_int(toks[0], lineno);
        const auto v = parse_int(toks[1], lineno);
        if (opts.num_nodes) {
            const auto n = static_cast<std::int64_t>(*opts.num_nodes);
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw RangeError("line " + std::to_string(lineno) + ": node id outside [0, " + std::to_string(n) + ")");
        }
        raw.emplace_back(u, v);
    }

    EdgeList result;
    if (opts.num_nodes) {
        result.original_ids.resize(*opts.num_nodes);
        for (std::size_t i = 0; i < result.original_ids.size(); ++i) result.original_ids[i] = static_cast<std::int64_t>(i);
    } else {
        auto& ids = result.original_ids;
        ids.reserve(raw.size() * 2);
        for (auto [u, v] : raw) {
            ids.push_back(u);
            ids.push_back(v);
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }
    const auto& ids = result.original_ids;
    if (ids.size() > std::numeric_limits<NodeId>::max()) throw RangeError("edge list: too many distinct node ids");

    auto dense = [&](std::int64_t id) -> NodeId {
        if (opts.num_nodes) return static_cast<NodeId>(id);
        return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
    };
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(raw.size());
    for (auto [u, v] : raw) edges.emplace_back(dense(u), dense(v));
    result.graph = CsrGraph::from_edges(ids.size(), std::move(edges), opts.symmetrize);
    return result;
}

EdgeList load_edge_list(const std::filesystem::path& path, const EdgeListOptions& opts) {
    auto in = open_in(path);
    return parse_edge_list(in, opts);
}

void write_edge_list(const CsrGraph& g, std::ostream& out) {
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
        for (NodeId j : g.neighbors(i)) out << i << ' ' << j << '\n';
    }
}

void save_edge_list(const CsrGraph& g, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_edge_list(g, out);
    if (!out) throw IoError("write failed: " + path.string());
}

CsrGraph add_self_loops(const CsrGraph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<std::uint64_t> row_ptr(n + 1, 0);
    std::vector<NodeId> col_idx;
    std::vector<double> weights;
    col_idx.reserve(g.num_edges() + n);
    if (g.weighted()) weights.reserve(g.num_edges() + n);
    for (NodeId i = 0; i < n; ++i) {
        auto nb = g.neighbors(i);
        auto w = g.edge_weights(i);
        bool placed = false;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (!placed && nb[k] >= i) {
                if (nb[k] != i) {
                    col_idx.push_back(i);
                    if (g.weighted()) weights.push_back(1.0);
                }
                placed = true;
            }
            col_idx.push_back(nb[k]);
            if (g.weighted()) weights.push_back(w[k]);
        }
        if (!placed) {
            col_idx.push_back(i);
            if (g.weighted()) weights.push_back(1.0);
        }
        row_ptr[i + 1] = col_idx.size();
    }
    return CsrGraph(n, std::move(row_ptr), std::move(col_idx), std::move(weights));
}

CsrGraph sym_normalize(const CsrGraph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<double> inv_sqrt(n);
    for (NodeId i = 0; i < n; ++i) {
        double d = 0.0;
        if (g.weighted()) {
            for (double w : g.edge_weights(i)) d += w;
        } else {
            d = static_cast<double>(g.degree(i));
        }
        if (!(d > 0.0))
            throw NumericError("sym_normalize: node " + std::to_string(i) + " has non-positive degree (missing self loop?)");
        inv_sqrt[i] = 1.0 / std::sqrt(d);
    }
    std::vector<double> weights(g.num_edges());
    for (NodeId i = 0; i < n; ++i) {
        auto nb = g.neighbors(i);
        auto w = g.edge_weights(i);
        const auto base = g.row_ptr()[i];
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const double a = w.empty() ? 1.0 : w[k];
            weights[base + k] = a * inv_sqrt[i] * inv_sqrt[nb[k]];
        }
    }
    return CsrGraph(n, g.row_ptr(), g.col_idx(), std::move(weights));
}

CsrGraph normalized_adjacency(const CsrGraph& g) { return sym_normalize(add_self_loops(g)); }

NodeFeatures row_normalize(const NodeFeatures& x) {
    NodeFeatures out = x;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto r = out.row(i);
        double s = 0.0;
        for (float v : r) s += v;
        if (s == 0.0) continue;
        for (float& v : r) v = static_cast<float>(v / s);
    }
    return out;
}

void write_dense(std::ostream& out, const DenseMatrix& m) {
    out.write("GGDF", 4);
    put_le<std::uint32_t>(out, 1);
    put_le<std::uint64_t>(out, m.rows());
    put_le<std::uint64_t>(out, m.cols());
    for (float v : m.values()) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        put_le<std::uint32_t>(out, bits);
    }
}

DenseMatrix read_dense(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "GGDF") throw IoError("GGDF: bad magic");
    const auto version = get_le<std::uint32_t>(in);
    if (version != 1) throw IoError("GGDF: unsupported version " + std::to_string(version));
    const auto rows = get_le<std::uint64_t>(in);
    const auto cols = get_le<std::uint64_t>(in);
    if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) throw IoError("GGDF: implausible shape");
    std::vector<unsigned char> raw(rows * cols * 4);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != raw.size())
        throw ShapeError("GGDF: header declares " + std::to_string(rows) + " rows of " + std::to_string(cols) +
                         " values but only " + std::to_string(cols ? got / 4 / cols : 0) + " complete rows present");
    DenseMatrix m(rows, cols);
    float* data = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) {
        const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                                   static_cast<std::uint32_t>(raw[4 * i + 1]) << 8 |
                                   static_cast<std::uint32_t>(raw[4 * i + 2]) << 16 |
                                   static_cast<std::uint32_t>(raw[4 * i + 3]) << 24;
        std::memcpy(&data[i], &bits, sizeof bits);
    }
    return m;
}

void save_features(const std::filesystem::path& path, const NodeFeatures& x) {
    auto out = open_out(path, std::ios::binary);
    write_dense(out, x);
    if (!out) throw IoError("write failed: " + path.string());
}

NodeFeatures load_features(const std::filesystem::path& path) {
    auto in = open_in(path, std::ios::binary);
    NodeFeatures x = read_dense(in);
    for (float v : x.values()) {
        if (!std::isfinite(v)) throw NumericError("features contain non-finite values: " + path.string());
    }
    return x;
}

NodeFeatures load_features(const std::filesystem::path& path, std::size_t expected_rows) {
    auto x = load_features(path);
    if (x.rows() != expected_rows)
        throw ShapeError("features have " + std::to_string(x.rows()) + " rows, graph has " +
                         std::to_string(expected_rows) + " nodes");
    return x;
}

void LabeledSplit::validate() const {
    std::vector<char> seen(labels.size(), 0);
    for (auto l : labels) {
        if (l >= 0 && static_cast<std::size_t>(l) >= num_classes) throw RangeError("label exceeds num_classes");
    }
    for (const auto* part : {&train, &val, &test}) {
        for (NodeId id : *part) {
            if (id >= labels.size()) throw RangeError("split id " + std::to_string(id) + " out of range");
            if (labels[id] < 0) throw InvalidArgument("split references unlabeled node " + std::to_string(id));
            if (seen[id]++) throw InvalidArgument("node " + std::to_string(id) + " appears in more than one split");
        }
    }
}

LabeledSplit parse_labels(std::istream& in, std::size_t num_nodes) {
    LabeledSplit split;
    split.labels.assign(num_nodes, -1);
    std::string line;
    std::size_t lineno = 0;
    std::int32_t max_label = -1;
    while (std::getline(in, line)) {
        ++lineno;
        auto s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        auto toks = split_ws(s);
        if (toks.size() != 3) throw ParseError("expected 'node_id class_id split'", lineno);
        const auto id = parse_int(toks[0], lineno);
        const auto cls = parse_int(toks[1], lineno);
        if (id < 0 || static_cast<std::size_t>(id) >= num_nodes)
            throw RangeError("line " + std::to_string(lineno) + ": node id out of range");
        if (cls < 0 || cls > std::numeric_limits<std::int32_t>::max())
            throw RangeError("line " + std::to_string(lineno) + ": class id out of range");
        if (split.labels[id] >= 0) throw ParseError("duplicate node id " + std::to_string(id), lineno);
        split.labels[id] = static_cast<std::int32_t>(cls);
        max_label = std::max(max_label, static_cast<std::int32_t>(cls));
        const auto part = toks[2];
        const auto nid = static_cast<NodeId>(id);
        if (part == "train") {
            split.train.push_back(nid);
        } else if (part == "val") {
            split.val.push_back(nid);
        } else if (part == "test") {
            split.test.push_back(nid);
        } else if (part != "none") {
            throw ParseError("unknown split '" + std::string(part) + "'", lineno);
        }
    }
    split.num_classes = static_cast<std::size_t>(max_label + 1);
    split.validate();
    return split;
}

LabeledSplit load_labels(const std::filesystem::path& path, std::size_t num_nodes) {
    auto in = open_in(path);
    return parse_labels(in, num_nodes);
}

void write_labels(const LabeledSplit& split, std::ostream& out) {
    std::vector<const char*> part(split.labels.size(), "none");
    for (NodeId id : split.train) part[id] = "train";
    for (NodeId id : split.val) part[id] = "val";
    for (NodeId id : split.test) part[id] = "test";
    for (std::size_t i = 0; i < split.labels.size(); ++i) {
        if (split.labels[i] < 0) continue;
        out << i << ' ' << split.labels[i] << ' ' << part[i] << '\n';
    }
}

void save_labels(const LabeledSplit& split, const std::filesystem::path& path) {
    auto out = open_out(path);
    write_labels(split, out);
    if (!out) throw IoError("write failed: " + path.string());
}

std::uint64_t file_checksum(const std::filesystem::path& path) {
    auto in = open_in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64(ss.str());
}

}  // namespace ggd
