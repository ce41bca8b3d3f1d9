// Integration tests driving the installed CLI binary end to end.

#include <catch2/catch.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "nastylink/io.hpp"

using namespace nastylink;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string command = std::string(NASTYLINK_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buffer{};
    RunResult result;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::size_t n = std::fread(buffer.data(), 1, buffer.size(), pipe)) {
        result.output.append(buffer.data(), n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double value_of(const std::string& report, const std::string& key) {
    std::istringstream in(report);
    std::string line;
    while (std::getline(in, line)) {
        const auto tab = line.find('\t');
        if (tab != std::string::npos && line.substr(0, tab) == key) {
            return std::stod(line.substr(tab + 1));
        }
    }
    FAIL("key not found in report: " << key);
    return 0.0;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("cli_work") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& file) const { return (path / file).string(); }
};

void generate_small(const TempDir& dir, const std::string& extra = "") {
    const auto result = run("generate --out-dir " + dir.path.string() +
                            " --n-entities 40 --dim 16 --noise-sigma 0.02 --seed 19 " + extra);
    REQUIRE(result.exit_code == 0);
}

}  // namespace

TEST_CASE("generate writes the three corpus files deterministically") {
    TempDir dir("gen");
    generate_small(dir);
    CHECK(fs::exists(dir / "mentions.jsonl"));
    CHECK(fs::exists(dir / "entities.jsonl"));
    CHECK(fs::exists(dir / "gold.tsv"));

    TempDir dir2("gen_again");
    generate_small(dir2);
    CHECK(slurp(dir / "mentions.jsonl") == slurp(dir2 / "mentions.jsonl"));
    CHECK(slurp(dir / "entities.jsonl") == slurp(dir2 / "entities.jsonl"));
    CHECK(slurp(dir / "gold.tsv") == slurp(dir2 / "gold.tsv"));
}

TEST_CASE("out-of-range options are usage errors") {
    CHECK(run("generate --nil-fraction 1.5").exit_code == 64);
    CHECK(run("link --algorithm nonsense").exit_code == 64);
    CHECK(run("frobnicate").exit_code == 64);
}

TEST_CASE("linking a generated corpus reports stage timings that sum to the total") {
    TempDir dir("link");
    generate_small(dir);
    const auto result =
        run("link --mentions " + (dir / "mentions.jsonl") + " --entities " +
            (dir / "entities.jsonl") + " --out " + (dir / "clustering.tsv") +
            " --algorithm nasty --workers 2");
    REQUIRE(result.exit_code == 0);
    CHECK(fs::exists(dir / "clustering.tsv"));

    const double total = value_of(result.output, "timing.total");
    const double parts = value_of(result.output, "timing.read") +
                         value_of(result.output, "timing.graph_build") +
                         value_of(result.output, "timing.clustering") +
                         value_of(result.output, "timing.resolution") +
                         value_of(result.output, "timing.write");
    CHECK(parts <= total + 1e-6);
    CHECK(total - parts <= 0.2 * total + 0.05);
}

TEST_CASE("a perfectly recovered corpus evaluates to all ones") {
    TempDir dir("evalperfect");
    generate_small(dir);
    REQUIRE(run("link --mentions " + (dir / "mentions.jsonl") + " --entities " +
                (dir / "entities.jsonl") + " --out " + (dir / "clustering.tsv"))
                .exit_code == 0);
    const auto result = run("eval --mentions " + (dir / "mentions.jsonl") + " --clustering " +
                            (dir / "clustering.tsv") + " --report-out " + (dir / "report.tsv"));
    REQUIRE(result.exit_code == 0);
    CHECK(value_of(result.output, "micro.f1") == 1.0);
    CHECK(fs::exists(dir / "report.tsv"));
}

TEST_CASE("evaluating the gold file against itself is perfect by construction") {
    TempDir dir("evalgold");
    generate_small(dir);
    const auto result = run("eval --mentions " + (dir / "mentions.jsonl") + " --clustering " +
                            (dir / "gold.tsv"));
    REQUIRE(result.exit_code == 0);
    CHECK(value_of(result.output, "micro.f1") == 1.0);
    CHECK(value_of(result.output, "known.f1") == 1.0);
    CHECK(value_of(result.output, "nil.f1") == 1.0);
}

TEST_CASE("exactmatch runs on a corpus without embeddings") {
    TempDir dir("exact");
    std::vector<Mention> mentions{{MentionId{"m1"}, "Ada Lovelace", {}, {}, {}},
                                  {MentionId{"m2"}, "unknown person", {}, {}, {}}};
    std::vector<Entity> entities{{EntityId{"e1"}, "ada-lovelace", {}, {}, 2}};
    write_mentions(mentions, dir / "mentions.jsonl");
    write_entities(entities, dir / "entities.jsonl");

    const auto result =
        run("link --algorithm exactmatch --mentions " + (dir / "mentions.jsonl") +
            " --entities " + (dir / "entities.jsonl") + " --out " + (dir / "clustering.tsv"));
    REQUIRE(result.exit_code == 0);
    const Clustering clustering = read_clustering(dir / "clustering.tsv");
    CHECK(clustering.clusters.size() == 2);
    CHECK(clustering.clusters[0].entity->value == "e1");

    // but embedding-based linkers refuse, naming the configuration problem
    const auto refused =
        run("link --algorithm nasty --mentions " + (dir / "mentions.jsonl") + " --entities " +
            (dir / "entities.jsonl") + " --out " + (dir / "x.tsv"));
    CHECK(refused.exit_code == 64);
}

TEST_CASE("bottom-up with tau 1 emits only singletons") {
    TempDir dir("singletons");
    generate_small(dir);
    REQUIRE(run("link --algorithm bottomup --tau 1.0 --mentions " + (dir / "mentions.jsonl") +
                " --entities " + (dir / "entities.jsonl") + " --out " + (dir / "clustering.tsv"))
                .exit_code == 0);
    const Clustering clustering = read_clustering(dir / "clustering.tsv");
    for (const auto& c : clustering.clusters) CHECK(c.mentions.size() == 1);
}

TEST_CASE("an edge file bypasses embeddings and reproduces the walkthrough") {
    TempDir dir("edges");
    const AffinityGraph g = fixtures::walkthrough_graph();
    write_edges(g, dir / "edges.tsv");

    std::vector<Mention> mentions;
    for (const auto& id : g.mentions()) mentions.push_back({id, id.value, {}, {}, {}});
    std::vector<Entity> entities;
    for (const auto& id : g.entities()) entities.push_back({id, id.value, {}, {}, 0});
    write_mentions(mentions, dir / "mentions.jsonl");
    write_entities(entities, dir / "entities.jsonl");

    const auto result =
        run("link --algorithm nasty --edges " + (dir / "edges.tsv") + " --mentions " +
            (dir / "mentions.jsonl") + " --entities " + (dir / "entities.jsonl") +
            " --tau-m 0.7 --tau-e 0.7 --tau-a 0.75 --out " + (dir / "clustering.tsv") +
            " --verbose-trace --trace-out " + (dir / "trace.tsv"));
    REQUIRE(result.exit_code == 0);

    const Clustering clustering = read_clustering(dir / "clustering.tsv");
    CHECK(clustering.clusters.size() == 5);
    const std::string trace = slurp(dir / "trace.tsv");
    CHECK(trace.find("m7 m6 e_b") != std::string::npos);
}

TEST_CASE("sweep emits one row per grid point with the best row on top of the field") {
    TempDir dir("sweep");
    generate_small(dir);
    const auto result = run("sweep --mentions " + (dir / "mentions.jsonl") + " --entities " +
                            (dir / "entities.jsonl") +
                            " --algorithm nasty --grid-tau-m 0.7 0.85 --grid-tau-e 0.8 0.9 "
                            "--grid-tau-a 0.75");
    REQUIRE(result.exit_code == 0);
    std::istringstream in(result.output);
    std::string line;
    std::getline(in, line);  // header
    CHECK(line == "tau_m\ttau_e\ttau_a\tmicro_f1\tknown_f1\tnil_f1");
    std::vector<double> micro;
    while (std::getline(in, line)) {
        const auto fields = io_detail::split_tabs(line);
        if (fields.size() == 6) micro.push_back(std::stod(fields[3]));
    }
    REQUIRE(micro.size() == 4);
    const double best = *std::max_element(micro.begin(), micro.end());
    for (const double f1 : micro) CHECK(best >= f1);
}

TEST_CASE("eval scores the walkthrough prediction against divergent gold by hand") {
    TempDir dir("evalhand");
    const AffinityGraph g = fixtures::walkthrough_graph();
    write_edges(g, dir / "edges.tsv");

    // gold disagrees with the prediction: all four group-1 mentions are e_a
    auto gold_of = [](const std::string& id) -> GoldLabel {
        if (id == "m1" || id == "m2" || id == "m3" || id == "m4") return GoldLabel::known("e_a");
        if (id == "m5") return GoldLabel::known("e_c");
        if (id == "m6" || id == "m7") return GoldLabel::known("e_b");
        return GoldLabel::nil("n2");
    };
    std::vector<Mention> mentions;
    for (const auto& id : g.mentions()) {
        mentions.push_back({id, id.value, {}, {}, gold_of(id.value)});
    }
    std::vector<Entity> entities;
    for (const auto& id : g.entities()) entities.push_back({id, id.value, {}, {}, 0});
    write_mentions(mentions, dir / "mentions.jsonl");
    write_entities(entities, dir / "entities.jsonl");

    REQUIRE(run("link --algorithm nasty --edges " + (dir / "edges.tsv") + " --mentions " +
                (dir / "mentions.jsonl") + " --entities " + (dir / "entities.jsonl") +
                " --tau-m 0.7 --tau-e 0.7 --tau-a 0.75 --out " + (dir / "clustering.tsv"))
                .exit_code == 0);
    const auto result = run("eval --mentions " + (dir / "mentions.jsonl") + " --clustering " +
                            (dir / "clustering.tsv"));
    REQUIRE(result.exit_code == 0);

    // prediction: 5 of 7 gold-known linked, all correctly; {m3,m4} is a
    // spurious NIL cluster; {m8,m9,m10} maps onto n2
    CHECK(value_of(result.output, "known.precision") == Approx(1.0));
    CHECK(value_of(result.output, "known.recall") == Approx(5.0 / 7.0));
    CHECK(value_of(result.output, "known.f1") == Approx(10.0 / 12.0));
    CHECK(value_of(result.output, "nil.precision") == Approx(3.0 / 5.0));
    CHECK(value_of(result.output, "nil.recall") == Approx(1.0));
    CHECK(value_of(result.output, "nil.f1") == Approx(0.75));
    CHECK(value_of(result.output, "micro.f1") == Approx(0.8));
}

TEST_CASE("sweeping tau_m on a conflicted corpus peaks in the default neighborhood") {
    TempDir dir("sweepneigh");
    REQUIRE(run("generate --out-dir " + dir.path.string() +
                " --n-entities 400 --dim 24 --noise-sigma 0.10 --seed 20")
                .exit_code == 0);
    const auto result = run("sweep --mentions " + (dir / "mentions.jsonl") + " --entities " +
                            (dir / "entities.jsonl") +
                            " --algorithm nasty --grid-tau-m 0.5 0.7 0.85 0.95 "
                            "--grid-tau-e 0.9 --grid-tau-a 0.75 0.85");
    REQUIRE(result.exit_code == 0);

    std::istringstream in(result.output);
    std::string line;
    std::getline(in, line);  // header
    double best_f1 = -1.0;
    double best_tau_m = 0.0;
    while (std::getline(in, line)) {
        const auto fields = io_detail::split_tabs(line);
        if (fields.size() != 6) continue;
        const double f1 = std::stod(fields[3]);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_tau_m = std::stod(fields[0]);
        }
    }
    // the mention threshold's known working range
    CHECK(best_tau_m >= 0.8);
    CHECK(best_tau_m <= 0.9);
}

TEST_CASE("bench prints one row per sample size with monotone totals") {
    const auto result = run("bench --sizes 1000 2000 4000 --backend hnsw --seed 11");
    REQUIRE(result.exit_code == 0);
    std::istringstream in(result.output);
    std::string line;
    std::getline(in, line);
    CHECK(line == "mentions\tgraph_build_s\tclustering_s\tresolution_s\ttotal_s");
    std::vector<std::size_t> sizes;
    while (std::getline(in, line)) {
        const auto fields = io_detail::split_tabs(line);
        if (fields.size() == 5) sizes.push_back(std::stoul(fields[0]));
    }
    CHECK(sizes == std::vector<std::size_t>{1000, 2000, 4000});
}

TEST_CASE("command-line flags override config file values") {
    TempDir dir("config");
    generate_small(dir);
    {
        std::ofstream config(dir / "run.toml");
        config << "[link]\n"
               << "mentions = \"" << (dir / "mentions.jsonl") << "\"\n"
               << "entities = \"" << (dir / "entities.jsonl") << "\"\n"
               << "algorithm = \"bottomup\"\n"
               << "tau = 1.0\n";
    }
    // config alone: bottom-up at tau 1.0 -> singletons
    REQUIRE(run("--config " + (dir / "run.toml") + " link --out " + (dir / "a.tsv"))
                .exit_code == 0);
    const Clustering from_config = read_clustering(dir / "a.tsv");
    for (const auto& c : from_config.clusters) CHECK(c.mentions.size() == 1);

    // a flag overrides the configured tau and clusters form again
    REQUIRE(run("--config " + (dir / "run.toml") + " link --tau 0.85 --out " + (dir / "b.tsv"))
                .exit_code == 0);
    const Clustering overridden = read_clustering(dir / "b.tsv");
    CHECK(overridden.clusters.size() < from_config.clusters.size());
}

TEST_CASE("missing input files exit with the io code") {
    CHECK(run("eval --mentions nope.jsonl --clustering nope.tsv").exit_code == 74);
}
