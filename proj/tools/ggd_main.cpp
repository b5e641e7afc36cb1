#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ggd/bench.hpp"
#include "ggd/config.hpp"
#include "ggd/discriminate.hpp"
#include "ggd/encoder.hpp"
#include "ggd/error.hpp"
#include "ggd/graph_store.hpp"
#include "ggd/inference.hpp"
#include "ggd/parallel.hpp"
#include "ggd/probe.hpp"
#include "ggd/sampler.hpp"
#include "ggd/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ggd;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::string manifest;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("-c,--config", o.config_path, "key = value config file");
    cmd->add_option("--set", o.sets, "override one config key (key=value), repeatable");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--workers", o.workers, "kernel worker threads");
    cmd->add_option("--manifest", o.manifest, "run manifest path (JSON)");
}

/// Precedence: defaults < config file < --set < dedicated flags.
RunConfig resolve(const CommonOpts& o, std::map<std::string, std::string> flags = {}) {
    std::map<std::string, std::string> file;
    if (!o.config_path.empty()) file = load_config_file(o.config_path);
    std::map<std::string, std::string> over;
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        over[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (o.seed) flags["seed"] = std::to_string(*o.seed);
    if (o.workers) flags["workers"] = std::to_string(*o.workers);
    for (auto& [k, v] : flags) over[k] = v;
    RunConfig cfg = resolve_config(file, over);
    set_num_workers(cfg.workers);
    return cfg;
}

struct Dataset {
    CsrGraph graph;
    NodeFeatures features;
    std::optional<LabeledSplit> split;
    std::map<std::string, std::string> checksums;
};

struct DataOpts {
    std::string graph;
    std::string features;
    std::string labels;
    std::string synthetic;
    std::uint64_t data_seed = 0;
};

void add_data(CLI::App* cmd, DataOpts& d, bool allow_synthetic) {
    cmd->add_option("-g,--graph", d.graph, "edge list");
    cmd->add_option("-x,--features", d.features, "GGDF feature matrix");
    cmd->add_option("-l,--labels", d.labels, "label/split file");
    if (allow_synthetic) {
        cmd->add_option("--synthetic", d.synthetic, "generate data instead: sbm | cora-shape")
            ->check(CLI::IsMember({"sbm", "cora-shape"}));
        cmd->add_option("--data-seed", d.data_seed, "seed for --synthetic");
    }
}

Dataset load_dataset(const DataOpts& d, bool need_labels) {
    Dataset ds;
    if (!d.synthetic.empty()) {
        Rng rng(d.data_seed, streams::data);
        if (d.synthetic == "sbm") {
            auto s = sbm_generate(SbmConfig{}, rng);
            ds.graph = std::move(s.graph);
            ds.features = std::move(s.features);
            ds.split = std::move(s.split);
        } else {
            auto c = cora_shape(rng);
            ds.graph = std::move(c.graph);
            ds.features = std::move(c.features);
        }
    } else {
        if (d.graph.empty() || d.features.empty()) throw ConfigError("--graph and --features are required");
        ds.features = load_features(d.features);
        EdgeListOptions opts;
        opts.num_nodes = ds.features.rows();
        ds.graph = load_edge_list(d.graph, opts).graph;
        ds.checksums[d.graph] = hex64(file_checksum(d.graph));
        ds.checksums[d.features] = hex64(file_checksum(d.features));
        if (!d.labels.empty()) {
            ds.split = load_labels(d.labels, ds.features.rows());
            ds.checksums[d.labels] = hex64(file_checksum(d.labels));
        }
    }
    if (need_labels && !ds.split) throw ConfigError("--labels is required for this command");
    return ds;
}

TrainResult run_training(const Dataset& ds, const RunConfig& cfg) {
    if (cfg.minibatch) return minibatch_train(ds.graph, ds.features, cfg.train, cfg.mb);
    return train(ds.graph, ds.features, cfg.train);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

void finish_manifest(const std::string& path, const std::string& command, const RunConfig& cfg,
                     std::map<std::string, std::string> inputs, std::vector<std::string> artifacts,
                     std::chrono::steady_clock::time_point t0) {
    if (path.empty()) return;
    RunManifest m;
    m.command = command;
    m.config = cfg;
    m.input_checksums = std::move(inputs);
    m.artifacts = std::move(artifacts);
    m.wall_seconds = seconds_since(t0);
    m.peak_rss_bytes = peak_rss_bytes();
    m.write(path);
}

std::string format_acc(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << v;
    return s.str();
}

int run(int argc, char** argv) {
    CLI::App app{"Group Discrimination graph representation learning"};
    app.require_subcommand(1);
    const auto t0 = std::chrono::steady_clock::now();

    // gen
    auto* gen = app.add_subcommand("gen", "write an SBM fixture (edges, features, labels)");
    SbmConfig sbm;
    std::string gen_dir;
    std::uint64_t gen_seed = 0;
    gen->add_option("-o,--out-dir", gen_dir, "output directory")->required();
    gen->add_option("--nodes", sbm.n, "number of nodes");
    gen->add_option("--classes", sbm.k, "number of blocks");
    gen->add_option("--p-in", sbm.p_in, "intra-block edge probability");
    gen->add_option("--p-out", sbm.p_out, "inter-block edge probability");
    gen->add_option("--feat-dim", sbm.feat_dim, "feature dimension");
    gen->add_option("--noise", sbm.noise, "bit-flip probability");
    gen->add_option("--density", sbm.prototype_density, "prototype density");
    gen->add_option("--seed", gen_seed, "random seed");

    // train
    auto* tr = app.add_subcommand("train", "train an encoder");
    CommonOpts tr_o;
    DataOpts tr_d;
    std::string tr_ckpt = "model.ggdp", tr_trace;
    std::optional<std::size_t> tr_epochs, tr_batch;
    std::string tr_fanouts;
    bool tr_minibatch = false;
    add_common(tr, tr_o);
    add_data(tr, tr_d, false);
    tr->add_option("-o,--out", tr_ckpt, "checkpoint path");
    tr->add_option("--trace", tr_trace, "loss trace CSV path");
    tr->add_option("--epochs", tr_epochs, "training epochs");
    tr->add_flag("--minibatch", tr_minibatch, "sampled mini-batch training");
    tr->add_option("--batch-size", tr_batch, "mini-batch size");
    tr->add_option("--fanouts", tr_fanouts, "comma separated fanouts, one per conv layer");

    // embed
    auto* em = app.add_subcommand("embed", "embed nodes with a trained encoder");
    CommonOpts em_o;
    DataOpts em_d;
    std::string em_ckpt, em_out = "embeddings.ggdf";
    std::optional<std::size_t> em_power;
    add_common(em, em_o);
    add_data(em, em_d, false);
    em->add_option("--checkpoint", em_ckpt, "trained checkpoint")->required();
    em->add_option("-o,--out", em_out, "embedding output (GGDF, plus .meta sidecar)");
    em->add_option("--power", em_power, "graph power n");

    // probe
    auto* pr = app.add_subcommand("probe", "linear probe on embeddings");
    CommonOpts pr_o;
    std::string pr_emb, pr_labels, pr_out;
    add_common(pr, pr_o);
    pr->add_option("-e,--embeddings", pr_emb, "embedding file")->required();
    pr->add_option("-l,--labels", pr_labels, "label/split file")->required();
    pr->add_option("-o,--out", pr_out, "accuracy CSV (stdout if omitted)");

    // diagnose
    auto* dg = app.add_subcommand("diagnose", "summary-vector statistics and constant-summary sweep");
    CommonOpts dg_o;
    DataOpts dg_d;
    std::string dg_stats = "summary_stats.csv", dg_sweep = "eps_sweep.csv";
    add_common(dg, dg_o);
    add_data(dg, dg_d, true);
    dg->add_option("--stats-out", dg_stats, "summary statistics CSV");
    dg->add_option("--sweep-out", dg_sweep, "epsilon sweep CSV");

    // ablate
    auto* ab = app.add_subcommand("ablate", "probe accuracy per aggregation function");
    CommonOpts ab_o;
    DataOpts ab_d;
    std::string ab_out = "ablation.csv";
    add_common(ab, ab_o);
    add_data(ab, ab_d, true);
    ab->add_option("-o,--out", ab_out, "ablation CSV");

    // bench
    auto* bn = app.add_subcommand("bench", "scaling benchmark against a pairwise reference");
    BenchConfig bc;
    std::string bn_out = "bench.csv", bn_fit = "bench_fit.csv", bn_power_out;
    std::size_t bn_workers = 1, bn_power = 10;
    bn->add_option("--sizes", bc.sizes, "node counts");
    bn->add_option("--hidden", bc.hidden, "hidden size");
    bn->add_option("--num-proj", bc.num_proj, "projector layers");
    bn->add_option("--feat-dim", bc.feat_dim, "feature dimension");
    bn->add_option("--avg-degree", bc.avg_degree, "average degree");
    bn->add_option("--gd-repeats", bc.gd_repeats, "timed GD epochs after warm-up");
    bn->add_option("--pairwise-repeats", bc.pairwise_repeats, "timed pairwise passes after warm-up");
    bn->add_option("--seed", bc.seed, "random seed");
    bn->add_option("--workers", bn_workers, "kernel worker threads");
    bn->add_option("-o,--out", bn_out, "timing CSV");
    bn->add_option("--fit-out", bn_fit, "log-log fit CSV");
    bn->add_option("--power-out", bn_power_out, "also time graph power and write this CSV");
    bn->add_option("--power", bn_power, "graph power n for --power-out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    if (*gen) {
        Rng rng(gen_seed, streams::data);
        const auto ds = sbm_generate(sbm, rng);
        fs::create_directories(gen_dir);
        save_edge_list(ds.graph, fs::path(gen_dir) / "graph.edges");
        save_features(fs::path(gen_dir) / "features.ggdf", ds.features);
        save_labels(ds.split, fs::path(gen_dir) / "labels.txt");
        std::cout << "wrote " << ds.graph.num_nodes() << " nodes, " << ds.graph.num_edges() << " directed edges to "
                  << gen_dir << '\n';
        return 0;
    }

    if (*tr) {
        std::map<std::string, std::string> flags;
        if (tr_epochs) flags["epochs"] = std::to_string(*tr_epochs);
        if (tr_minibatch) flags["minibatch"] = "true";
        if (tr_batch) flags["batch_size"] = std::to_string(*tr_batch);
        if (!tr_fanouts.empty()) flags["fanouts"] = tr_fanouts;
        const RunConfig cfg = resolve(tr_o, flags);
        const Dataset ds = load_dataset(tr_d, false);
        const auto result = run_training(ds, cfg);
        save_checkpoint(tr_ckpt, result.params);
        std::vector<std::string> artifacts{tr_ckpt};
        if (!tr_trace.empty()) {
            std::ostringstream s;
            write_trace_csv(result.trace, s);
            write_text(tr_trace, s.str());
            artifacts.push_back(tr_trace);
        }
        std::cout << "epochs=" << result.trace.epochs_run() << " final_loss=" << result.trace.loss.back()
                  << " best_epoch=" << result.trace.best_epoch << '\n';
        finish_manifest(tr_o.manifest, "train", cfg, ds.checksums, artifacts, t0);
        return 0;
    }

    if (*em) {
        std::map<std::string, std::string> flags;
        if (em_power) flags["power"] = std::to_string(*em_power);
        const RunConfig cfg = resolve(em_o, flags);
        Dataset ds = load_dataset(em_d, false);
        const auto params = load_checkpoint(em_ckpt);
        if (params.input_dim() != ds.features.cols())
            throw ShapeError("checkpoint expects " + std::to_string(params.input_dim()) + " feature columns, data has " +
                             std::to_string(ds.features.cols()));
        ds.checksums[em_ckpt] = hex64(file_checksum(em_ckpt));
        EmbeddingMeta meta;
        meta.config_hash = cfg.hash();
        meta.seed = cfg.train.seed;
        meta.graph_checksum = ds.graph.checksum();
        const auto emb = embed(ds.graph, ds.features, params, cfg.power, meta);
        save_embeddings(em_out, emb);
        std::cout << "embedded " << emb.h.rows() << " x " << emb.h.cols() << " (power " << cfg.power << ")\n";
        finish_manifest(em_o.manifest, "embed", cfg, ds.checksums, {em_out, em_out + ".meta"}, t0);
        return 0;
    }

    if (*pr) {
        const RunConfig cfg = resolve(pr_o);
        const auto emb = load_embeddings(pr_emb);
        const auto split = load_labels(pr_labels, emb.h.rows());
        const auto res = logistic_probe(emb.h, split, cfg.probe);
        std::ostringstream s;
        write_probe_csv(res, s);
        if (pr_out.empty()) {
            std::cout << s.str();
        } else {
            write_text(pr_out, s.str());
        }
        finish_manifest(pr_o.manifest, "probe", cfg,
                        {{pr_emb, hex64(file_checksum(pr_emb))}, {pr_labels, hex64(file_checksum(pr_labels))}},
                        pr_out.empty() ? std::vector<std::string>{} : std::vector<std::string>{pr_out}, t0);
        return 0;
    }

    if (*dg) {
        const RunConfig cfg = resolve(dg_o);
        const Dataset ds = load_dataset(dg_d, false);
        const CsrGraph g_norm = normalized_adjacency(ds.graph);
        std::ostringstream stats;
        stats << "activation,outer,mean,std,range\n" << std::setprecision(6);
        for (Activation act : {Activation::relu, Activation::lrelu, Activation::prelu, Activation::sigmoid}) {
            TrainConfig tc = cfg.train;
            tc.activation = act;
            tc.num_proj = 0;
            Rng rng(cfg.train.seed, streams::init);
            const auto params = init_encoder(tc.encoder_shape(ds.features.cols()), rng);
            const auto st = summary_stats(g_norm, ds.features, params, act, SummaryOuter::sigmoid);
            stats << to_string(act) << ",sigmoid," << st.mean << ',' << st.std << ',' << st.range << '\n';
        }
        write_text(dg_stats, stats.str());
        std::cout << stats.str();
        std::vector<std::string> artifacts{dg_stats};
        if (ds.split) {
            std::vector<std::pair<double, double>> rows;
            for (int i = 0; i <= 5; ++i) {
                const double eps = 0.2 * i;
                const auto r = train_dgi_constant_summary(ds.graph, ds.features, cfg.train, eps);
                const auto h = encode_frozen(g_norm, ds.features, r.params);
                rows.emplace_back(eps, logistic_probe(h, *ds.split, cfg.probe).test);
            }
            double others = 0.0;
            for (std::size_t i = 1; i < rows.size(); ++i) others += rows[i].second;
            others /= static_cast<double>(rows.size() - 1);
            std::ostringstream sweep;
            sweep << "epsilon,test_accuracy,collapsed\n";
            for (const auto& [eps, acc] : rows) {
                const bool collapsed = eps == 0.0 && acc < others - 0.05;
                sweep << std::setprecision(2) << std::fixed << eps << ',' << format_acc(acc) << ','
                      << (collapsed ? "true" : "false") << '\n';
            }
            write_text(dg_sweep, sweep.str());
            std::cout << sweep.str();
            artifacts.push_back(dg_sweep);
        }
        finish_manifest(dg_o.manifest, "diagnose", cfg, ds.checksums, artifacts, t0);
        return 0;
    }

    if (*ab) {
        const RunConfig cfg = resolve(ab_o);
        const Dataset ds = load_dataset(ab_d, true);
        std::ostringstream out;
        out << "aggregation,final_loss,test_accuracy\n";
        for (Aggregation mode :
             {Aggregation::sum, Aggregation::mean, Aggregation::min, Aggregation::max, Aggregation::linear}) {
            RunConfig c = cfg;
            c.train.aggregation = mode;
            const auto r = run_training(ds, c);
            const auto emb = embed(ds.graph, ds.features, r.params, c.power);
            const auto acc = logistic_probe(emb.h, *ds.split, c.probe).test;
            out << to_string(mode) << ',' << std::setprecision(6) << r.trace.loss.back() << ',' << format_acc(acc)
                << '\n';
        }
        write_text(ab_out, out.str());
        std::cout << out.str();
        finish_manifest(ab_o.manifest, "ablate", cfg, ds.checksums, {ab_out}, t0);
        return 0;
    }

    if (*bn) {
        set_num_workers(bn_workers);
        const auto rows = run_scaling_bench(bc);
        std::ostringstream t, f;
        write_bench_csv(rows, t);
        write_fit_csv(rows, f);
        write_text(bn_out, t.str());
        write_text(bn_fit, f.str());
        std::cout << t.str() << f.str();
        if (!bn_power_out.empty()) {
            const auto timings = bench_graph_power(bc.sizes, bn_power, bc.hidden, bc.avg_degree, bc.seed);
            std::ostringstream p;
            p << "nodes,edges,seconds\n" << std::setprecision(6);
            for (const auto& r : timings) p << r.nodes << ',' << r.edges << ',' << r.seconds << '\n';
            write_text(bn_power_out, p.str());
            std::cout << p.str();
        }
        std::cout << "peak_rss_mb=" << static_cast<double>(peak_rss_bytes()) / (1 << 20) << '\n';
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
