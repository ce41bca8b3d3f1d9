// Command-line front end: corpus generation, graph construction, the four
// linkers, evaluation, threshold sweeps, and the scaling benchmark.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nastylink/baselines.hpp"
#include "nastylink/hnsw.hpp"
#include "nastylink/io.hpp"
#include "nastylink/knn.hpp"
#include "nastylink/metrics.hpp"
#include "nastylink/nasty.hpp"
#include "nastylink/synthetic.hpp"

namespace {

using namespace nastylink;

// Exit codes: 0 ok, 64 usage, 65 bad data, 70 internal, 74 I/O.
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitRuntime = 70;
constexpr int kExitIo = 74;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct CommonOptions {
    std::string mentions_path = "mentions.jsonl";
    std::string entities_path = "entities.jsonl";
    std::string algorithm = "nasty";
    std::string backend = "exact";
    std::string edges_path;  // bypass embeddings when set
    int k = 4;
    Thresholds thresholds;
    double majority_threshold = 0.7;
    double bottomup_tau = 0.85;
    unsigned workers = default_workers();
    std::uint64_t seed = 42;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_algorithm) {
    cmd->add_option("--mentions", opt.mentions_path, "Mentions file (JSON lines)");
    cmd->add_option("--entities", opt.entities_path, "Entity catalog file (JSON lines)");
    if (with_algorithm) {
        cmd->add_option("--algorithm", opt.algorithm, "Linker to run")
            ->check(CLI::IsMember({"nasty", "majority", "bottomup", "exactmatch"}));
    }
    cmd->add_option("--backend", opt.backend, "Nearest-neighbor backend")
        ->check(CLI::IsMember({"exact", "hnsw"}));
    cmd->add_option("--edges", opt.edges_path,
                    "Load the affinity graph from this edge file instead of embeddings");
    cmd->add_option("--k", opt.k, "Candidates per mention")->check(CLI::PositiveNumber);
    cmd->add_option("--tau-m", opt.thresholds.tau_m, "Mention-mention threshold")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--tau-e", opt.thresholds.tau_e, "Mention-entity threshold")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--tau-a", opt.thresholds.tau_a, "Transitive-affinity threshold")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--majority-threshold", opt.majority_threshold,
                    "Cluster agreement fraction for the majority linker")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--tau", opt.bottomup_tau, "Minimum edge affinity for the bottom-up linker")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--workers", opt.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opt.seed, "Seed for all randomness");
}

AffinityGraph build_affinity_graph(const CommonOptions& opt, std::span<const Mention> mentions,
                                   std::span<const Entity> entities) {
    if (!opt.edges_path.empty()) {
        std::vector<MentionId> mention_ids;
        for (const auto& m : mentions) mention_ids.push_back(m.id);
        std::vector<EntityId> entity_ids;
        for (const auto& e : entities) entity_ids.push_back(e.id);
        return AffinityGraph::from_edges(read_edges(opt.edges_path), opt.k, mention_ids,
                                         entity_ids);
    }
    IndexConfig config{opt.k, opt.workers};
    if (opt.backend == "hnsw") {
        HnswParams params;
        params.level_seed = opt.seed;
        return build_graph_hnsw(mentions, entities, config, params);
    }
    return build_graph(mentions, entities, config);
}

struct LinkOutcome {
    Clustering clustering;
    ResolutionTrace trace;
    double graph_seconds = 0.0;
    double clustering_seconds = 0.0;
    double resolution_seconds = 0.0;
};

LinkOutcome run_linker(const CommonOptions& opt, std::span<const Mention> mentions,
                       std::span<const Entity> entities) {
    LinkOutcome out;
    if (opt.algorithm == "exactmatch") {
        Stopwatch cluster_timer;
        out.clustering = exact_match(mentions, entities);
        out.clustering_seconds = cluster_timer.seconds();
        return out;
    }

    Stopwatch graph_timer;
    const AffinityGraph graph = build_affinity_graph(opt, mentions, entities);
    out.graph_seconds = graph_timer.seconds();

    if (opt.algorithm == "nasty") {
        Stopwatch cluster_timer;
        Clustering initial = init_clusters(graph, opt.thresholds);
        out.clustering_seconds = cluster_timer.seconds();
        Stopwatch resolve_timer;
        LinkResult result = resolve_conflicts(initial, graph, opt.thresholds, opt.workers);
        out.resolution_seconds = resolve_timer.seconds();
        out.clustering = std::move(result.clustering);
        out.trace = std::move(result.trace);
    } else if (opt.algorithm == "majority") {
        Stopwatch cluster_timer;
        MajorityConfig config{opt.thresholds.tau_m, opt.thresholds.tau_e,
                              opt.majority_threshold};
        out.clustering = majority_clustering(graph, config);
        out.clustering_seconds = cluster_timer.seconds();
    } else {  // bottomup
        Stopwatch cluster_timer;
        out.clustering = bottom_up_clustering(graph, BottomUpConfig{opt.bottomup_tau});
        out.clustering_seconds = cluster_timer.seconds();
    }
    return out;
}

int cmd_generate(const SyntheticConfig& config, const std::string& out_dir) {
    const SyntheticCorpus corpus = generate_synthetic(config);
    write_mentions(corpus.mentions, out_dir + "/mentions.jsonl");
    write_entities(corpus.entities, out_dir + "/entities.jsonl");
    write_clustering(corpus.gold, nullptr, out_dir + "/gold.tsv");
    std::cout << "mentions\t" << corpus.mentions.size() << "\n"
              << "entities\t" << corpus.entities.size() << "\n"
              << "gold_clusters\t" << corpus.gold.clusters.size() << "\n";
    return 0;
}

int cmd_link(const CommonOptions& opt, const std::string& out_path,
             const std::string& trace_path, bool verbose_trace) {
    Stopwatch total_timer;
    Stopwatch read_timer;
    const auto [mentions, entities] = read_corpus(opt.mentions_path, opt.entities_path);
    const double read_seconds = read_timer.seconds();

    if (opt.algorithm != "exactmatch" && opt.edges_path.empty()) {
        for (const auto& m : mentions) {
            if (!m.embedding.has_value()) {
                throw ConfigError("mention '" + m.id.value +
                                  "' has no embedding; provide --edges or embeddings");
            }
        }
    }

    const LinkOutcome outcome = run_linker(opt, mentions, entities);

    Stopwatch write_timer;
    write_clustering(outcome.clustering, &outcome.trace, out_path);
    if (verbose_trace) write_trace(outcome.trace, trace_path);
    const double write_seconds = write_timer.seconds();

    std::cout << "clusters\t" << outcome.clustering.clusters.size() << "\n"
              << "timing.read\t" << fmt(read_seconds) << "\n"
              << "timing.graph_build\t" << fmt(outcome.graph_seconds) << "\n"
              << "timing.clustering\t" << fmt(outcome.clustering_seconds) << "\n"
              << "timing.resolution\t" << fmt(outcome.resolution_seconds) << "\n"
              << "timing.write\t" << fmt(write_seconds) << "\n"
              << "timing.total\t" << fmt(total_timer.seconds()) << "\n";
    return 0;
}

int cmd_eval(const std::string& mentions_path, const std::string& clustering_path,
             const std::string& mode_name, const std::string& report_path) {
    const std::vector<Mention> mentions = read_mentions(mentions_path);
    const Clustering clustering = read_clustering(clustering_path);
    const EvalMode mode = mode_name == "pca" ? EvalMode::Pca : EvalMode::FullGold;
    const EvalReport report = evaluate(clustering, mentions, mode);
    for (const auto& [key, value] : report_lines(report)) {
        std::cout << key << '\t' << value << '\n';
    }
    if (!report_path.empty()) write_report(report, report_path);
    return 0;
}

int cmd_sweep(const CommonOptions& base, const std::string& mode_name,
              std::vector<double> grid_m, std::vector<double> grid_e, std::vector<double> grid_a,
              std::vector<double> grid_majority, std::vector<double> grid_tau) {
    const auto [mentions, entities] = read_corpus(base.mentions_path, base.entities_path);
    const EvalMode mode = mode_name == "pca" ? EvalMode::Pca : EvalMode::FullGold;

    std::optional<AffinityGraph> graph;
    if (base.algorithm != "exactmatch") {
        graph = build_affinity_graph(base, mentions, entities);
    }

    if (grid_m.empty()) grid_m = {base.thresholds.tau_m};
    if (grid_e.empty()) grid_e = {base.thresholds.tau_e};
    if (grid_a.empty()) grid_a = {base.thresholds.tau_a};
    if (grid_majority.empty()) grid_majority = {base.majority_threshold};
    if (grid_tau.empty()) grid_tau = {base.bottomup_tau};

    auto score = [&](const Clustering& clustering) {
        const EvalReport report = evaluate(clustering, mentions, mode);
        return std::array<double, 3>{report.micro.f1, report.known.f1, report.nil.f1};
    };
    auto emit = [&](std::initializer_list<double> thresholds,
                    const std::array<double, 3>& scores) {
        for (double t : thresholds) std::cout << fmt(t) << '\t';
        std::cout << fmt(scores[0]) << '\t' << fmt(scores[1]) << '\t' << fmt(scores[2]) << '\n';
    };

    if (base.algorithm == "nasty") {
        std::cout << "tau_m\ttau_e\ttau_a\tmicro_f1\tknown_f1\tnil_f1\n";
        for (double tm : grid_m) {
            for (double te : grid_e) {
                for (double ta : grid_a) {
                    const Thresholds t{tm, te, ta};
                    const Clustering initial = init_clusters(*graph, t);
                    emit({tm, te, ta},
                         score(resolve_conflicts(initial, *graph, t, base.workers).clustering));
                }
            }
        }
    } else if (base.algorithm == "majority") {
        std::cout << "tau_m\ttau_e\tmajority_threshold\tmicro_f1\tknown_f1\tnil_f1\n";
        for (double tm : grid_m) {
            for (double te : grid_e) {
                for (double mt : grid_majority) {
                    emit({tm, te, mt}, score(majority_clustering(*graph, {tm, te, mt})));
                }
            }
        }
    } else if (base.algorithm == "bottomup") {
        std::cout << "tau\tmicro_f1\tknown_f1\tnil_f1\n";
        for (double tau : grid_tau) {
            emit({tau}, score(bottom_up_clustering(*graph, BottomUpConfig{tau})));
        }
    } else {
        std::cout << "micro_f1\tknown_f1\tnil_f1\n";
        emit({}, score(exact_match(mentions, entities)));
    }
    return 0;
}

int cmd_bench(const CommonOptions& base, std::vector<std::size_t> sizes, std::size_t dim,
              double mean_mentions, double nil_fraction) {
    std::sort(sizes.begin(), sizes.end());
    if (sizes.empty()) throw ConfigError("--sizes must not be empty");
    const std::size_t max_size = sizes.back();

    // Generate one corpus large enough for the biggest sample; samples are
    // nested prefixes of the mention list over a fixed entity catalog.
    SyntheticConfig config;
    config.dim = dim;
    config.mean_mentions_per_entity = mean_mentions;
    config.nil_fraction = nil_fraction;
    config.seed = base.seed;
    config.noise_sigma = 0.08;
    config.n_entities =
        static_cast<std::size_t>(static_cast<double>(max_size) / mean_mentions * 1.25) + 16;
    SyntheticCorpus corpus = generate_synthetic(config);
    while (corpus.mentions.size() < max_size) {
        config.n_entities = config.n_entities * 3 / 2 + 16;
        corpus = generate_synthetic(config);
    }

    std::cout << "mentions\tgraph_build_s\tclustering_s\tresolution_s\ttotal_s\n";
    for (const std::size_t size : sizes) {
        const std::span<const Mention> sample(corpus.mentions.data(), size);

        Stopwatch graph_timer;
        const AffinityGraph graph = build_affinity_graph(base, sample, corpus.entities);
        const double graph_seconds = graph_timer.seconds();

        Stopwatch cluster_timer;
        const Clustering initial = init_clusters(graph, base.thresholds);
        const double clustering_seconds = cluster_timer.seconds();

        Stopwatch resolve_timer;
        const LinkResult result =
            resolve_conflicts(initial, graph, base.thresholds, base.workers);
        const double resolution_seconds = resolve_timer.seconds();
        (void)result;

        std::cout << size << '\t' << fmt(graph_seconds) << '\t' << fmt(clustering_seconds)
                  << '\t' << fmt(resolution_seconds) << '\t'
                  << fmt(graph_seconds + clustering_seconds + resolution_seconds) << '\n';
        std::cout.flush();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NIL-aware entity linking over top-k affinity graphs"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file; flags given on the command line win");

    // generate
    SyntheticConfig gen_config;
    std::string out_dir = ".";
    auto* generate = app.add_subcommand("generate", "Generate a synthetic corpus");
    generate->add_option("--out-dir", out_dir, "Output directory");
    generate->add_option("--n-entities", gen_config.n_entities, "Number of entity prototypes")
        ->check(CLI::PositiveNumber);
    generate->add_option("--nil-fraction", gen_config.nil_fraction,
                         "Fraction of entities withheld from the catalog")
        ->check(CLI::Range(0.0, 1.0));
    generate->add_option("--mentions-per-entity", gen_config.mean_mentions_per_entity,
                         "Mean of the geometric mentions-per-entity distribution")
        ->check(CLI::Range(1.0, 1e6));
    generate->add_option("--dim", gen_config.dim, "Embedding dimension")
        ->check(CLI::PositiveNumber);
    generate->add_option("--noise-sigma", gen_config.noise_sigma,
                         "Gaussian noise added to mention embeddings")
        ->check(CLI::NonNegativeNumber);
    generate->add_option("--seed", gen_config.seed, "Seed for all randomness");

    // link
    CommonOptions link_opt;
    std::string link_out = "clustering.tsv";
    std::string trace_out = "trace.tsv";
    bool verbose_trace = false;
    auto* link = app.add_subcommand("link", "Cluster and link a corpus");
    add_common(link, link_opt, true);
    link->add_option("--out", link_out, "Clustering output file");
    link->add_option("--trace-out", trace_out, "Resolution trace output file");
    link->add_flag("--verbose-trace", verbose_trace, "Also write the resolution trace");

    // eval
    std::string eval_mentions = "mentions.jsonl";
    std::string eval_clustering = "clustering.tsv";
    std::string eval_mode = "full-gold";
    std::string report_out;
    auto* eval = app.add_subcommand("eval", "Score a clustering against gold labels");
    eval->add_option("--mentions", eval_mentions, "Mentions file with gold labels");
    eval->add_option("--clustering", eval_clustering, "Predicted clustering file");
    eval->add_option("--mode", eval_mode, "Gold label mode")
        ->check(CLI::IsMember({"full-gold", "pca"}));
    eval->add_option("--report-out", report_out, "Also write the report to this file");

    // sweep
    CommonOptions sweep_opt;
    std::string sweep_mode = "full-gold";
    std::vector<double> grid_m, grid_e, grid_a, grid_majority, grid_tau;
    auto* sweep = app.add_subcommand("sweep", "Grid-search thresholds by micro F1");
    add_common(sweep, sweep_opt, true);
    sweep->add_option("--mode", sweep_mode, "Gold label mode")
        ->check(CLI::IsMember({"full-gold", "pca"}));
    sweep->add_option("--grid-tau-m", grid_m, "tau_m grid values");
    sweep->add_option("--grid-tau-e", grid_e, "tau_e grid values");
    sweep->add_option("--grid-tau-a", grid_a, "tau_a grid values");
    sweep->add_option("--grid-majority", grid_majority, "majority_threshold grid values");
    sweep->add_option("--grid-tau", grid_tau, "bottom-up tau grid values");

    // bench
    CommonOptions bench_opt;
    bench_opt.backend = "hnsw";
    std::vector<std::size_t> bench_sizes{10000, 20000, 40000, 80000};
    std::size_t bench_dim = 64;
    double bench_mentions_per_entity = 3.0;
    double bench_nil_fraction = 0.3;
    auto* bench = app.add_subcommand("bench", "Per-stage runtime over nested corpus samples");
    add_common(bench, bench_opt, false);
    bench->add_option("--sizes", bench_sizes, "Mention sample sizes");
    bench->add_option("--dim", bench_dim, "Embedding dimension")->check(CLI::PositiveNumber);
    bench->add_option("--mentions-per-entity", bench_mentions_per_entity,
                      "Mean mentions per entity")
        ->check(CLI::Range(1.0, 1e6));
    bench->add_option("--nil-fraction", bench_nil_fraction, "NIL entity fraction")
        ->check(CLI::Range(0.0, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen_config, out_dir);
        if (link->parsed()) return cmd_link(link_opt, link_out, trace_out, verbose_trace);
        if (eval->parsed()) return cmd_eval(eval_mentions, eval_clustering, eval_mode, report_out);
        if (sweep->parsed()) {
            return cmd_sweep(sweep_opt, sweep_mode, grid_m, grid_e, grid_a, grid_majority,
                             grid_tau);
        }
        if (bench->parsed()) {
            return cmd_bench(bench_opt, bench_sizes, bench_dim, bench_mentions_per_entity,
                             bench_nil_fraction);
        }
    } catch (const IngestError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const LookupError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
