#include "ggd/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "json.hpp"

#if defined(__unix__)
#include <sys/resource.h>
#endif

#include "ggd/error.hpp"
#include "ggd/graph_store.hpp"
#include "ggd/rng.hpp"

namespace ggd {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string key_error(std::string_view key, std::string_view value, std::string_view want) {
    return "config key '" + std::string(key) + "': expected " + std::string(want) + ", got '" + std::string(value) +
           "'";
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty())
        throw ConfigError(key_error(key, v, "a non-negative integer"));
    return out;
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty() || !std::isfinite(out))
        throw ConfigError(key_error(key, v, "a finite number"));
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key_error(key, v, "true/false"));
}

/// Shortest text that parses back to exactly v.
std::string fmt(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
    const std::string_view v = trim(raw);
    try {
        if (key == "lr") train.lr = to_double(key, v);
        else if (key == "epochs") train.epochs = to_u64(key, v);
        else if (key == "patience") {
            if (v == "none") train.patience.reset();
            else train.patience = to_u64(key, v);
        }
        else if (key == "hidden") train.hidden = to_u64(key, v);
        else if (key == "num_conv") train.num_conv = to_u64(key, v);
        else if (key == "num_proj") train.num_proj = to_u64(key, v);
        else if (key == "aggregation") train.aggregation = parse_aggregation(v);
        else if (key == "activation") train.activation = parse_activation(v);
        else if (key == "augment") train.augment.enabled = to_bool(key, v);
        else if (key == "drop_edge_p") train.augment.drop_edge_p = to_double(key, v);
        else if (key == "drop_feat_p") train.augment.drop_feat_p = to_double(key, v);
        else if (key == "seed") {
            train.seed = to_u64(key, v);
            probe.seed = train.seed;
        }
        else if (key == "weight_decay") train.weight_decay = to_double(key, v);
        else if (key == "probe_lr") probe.lr = to_double(key, v);
        else if (key == "probe_epochs") probe.epochs = to_u64(key, v);
        else if (key == "probe_l2") probe.l2_weight = to_double(key, v);
        else if (key == "power") power = to_u64(key, v);
        else if (key == "minibatch") minibatch = to_bool(key, v);
        else if (key == "batch_size") mb.batch_size = to_u64(key, v);
        else if (key == "fanouts") {
            std::vector<std::size_t> f;
            std::string_view rest = v;
            while (!rest.empty()) {
                const auto comma = rest.find(',');
                f.push_back(to_u64(key, trim(rest.substr(0, comma))));
                if (comma == std::string_view::npos) break;
                rest = rest.substr(comma + 1);
            }
            if (f.empty()) throw ConfigError(key_error(key, v, "a comma-separated list"));
            mb.fanouts = std::move(f);
        }
        else if (key == "workers") workers = to_u64(key, v);
        else throw ConfigError("unknown config key '" + std::string(key) + "'");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        if (what.find(std::string(key)) != std::string::npos) throw;
        throw ConfigError("config key '" + std::string(key) + "': " + what);
    }
}

void RunConfig::validate() const {
    train.validate();
    if (!(probe.lr > 0.0)) throw ConfigError("config key 'probe_lr': must be > 0");
    if (probe.l2_weight < 0.0) throw ConfigError("config key 'probe_l2': must be >= 0");
    if (workers < 1) throw ConfigError("config key 'workers': must be >= 1");
    if (minibatch) mb.validate(train.num_conv);
}

std::vector<std::string> RunConfig::resolved_lines() const {
    std::map<std::string, std::string> kv;
    kv["lr"] = fmt(train.lr);
    kv["epochs"] = std::to_string(train.epochs);
    kv["patience"] = train.patience ? std::to_string(*train.patience) : "none";
    kv["hidden"] = std::to_string(train.hidden);
    kv["num_conv"] = std::to_string(train.num_conv);
    kv["num_proj"] = std::to_string(train.num_proj);
    kv["aggregation"] = std::string(to_string(train.aggregation));
    kv["activation"] = std::string(to_string(train.activation));
    kv["augment"] = train.augment.enabled ? "true" : "false";
    kv["drop_edge_p"] = fmt(train.augment.drop_edge_p);
    kv["drop_feat_p"] = fmt(train.augment.drop_feat_p);
    kv["seed"] = std::to_string(train.seed);
    kv["weight_decay"] = fmt(train.weight_decay);
    kv["probe_lr"] = fmt(probe.lr);
    kv["probe_epochs"] = std::to_string(probe.epochs);
    kv["probe_l2"] = fmt(probe.l2_weight);
    kv["power"] = std::to_string(power);
    kv["minibatch"] = minibatch ? "true" : "false";
    kv["batch_size"] = std::to_string(mb.batch_size);
    std::string f;
    for (std::size_t i = 0; i < mb.fanouts.size(); ++i) f += (i ? "," : "") + std::to_string(mb.fanouts[i]);
    kv["fanouts"] = f;
    std::vector<std::string> out;
    for (const auto& [k, val] : kv) out.push_back(k + " = " + val);
    return out;
}

std::uint64_t RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& line : resolved_lines()) {
        h = fnv1a64(line, h);
        h = fnv1a64("\n", h);
    }
    return h;
}

std::map<std::string, std::string> parse_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", lineno);
        const auto key = trim(s.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", lineno);
        out[std::string(key)] = std::string(trim(s.substr(eq + 1)));
    }
    return out;
}

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    return parse_config(in);
}

RunConfig resolve_config(const std::map<std::string, std::string>& file_values,
                         const std::map<std::string, std::string>& overrides) {
    RunConfig cfg;
    for (const auto* src : {&file_values, &overrides}) {
        for (const auto& [k, v] : *src) cfg.set(k, v);
    }
    cfg.validate();
    return cfg;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    nlohmann::ordered_json c = nlohmann::ordered_json::object();
    for (const auto& line : config.resolved_lines()) {
        const auto eq = line.find(" = ");
        c[line.substr(0, eq)] = line.substr(eq + 3);
    }
    j["config"] = c;
    j["config_hash"] = hex64(config.hash());
    j["seed"] = config.train.seed;
    j["workers"] = config.workers;
    j["inputs"] = input_checksums;
    j["artifacts"] = artifacts;
    j["wall_seconds"] = wall_seconds;
    j["peak_rss_bytes"] = peak_rss_bytes;
    return j.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& path) const { write_file_atomic(path, to_json()); }

std::uint64_t peak_rss_bytes() {
#if defined(__unix__)
    rusage u{};
    if (getrusage(RUSAGE_SELF, &u) == 0) return static_cast<std::uint64_t>(u.ru_maxrss) * 1024;  // kB on Linux
#endif
    return 0;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace ggd
