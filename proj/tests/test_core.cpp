#include <catch2/catch.hpp>

#include <cstdio>
#include <random>

#include "fixtures.hpp"
#include "nastylink/affinity_graph.hpp"
#include "nastylink/io.hpp"

using namespace nastylink;
using fixtures::e;
using fixtures::m;
using fixtures::me;
using fixtures::mm;

TEST_CASE("affinity returns stored scores and is symmetric for mentions") {
    const AffinityGraph g = fixtures::walkthrough_graph();
    CHECK(g.affinity(m("m6"), e("e_b")) == Approx(0.9));
    CHECK(g.affinity(m("m1"), m("m3")) == 0.8);
    CHECK(g.affinity(m("m3"), m("m1")) == 0.8);
}

TEST_CASE("affinity of an absent pair is zero") {
    const AffinityGraph g = fixtures::walkthrough_graph();
    CHECK(g.affinity(m("m1"), m("m8")) == 0.0);
    CHECK(g.affinity(m("m8"), e("e_a")) == 0.0);
}

TEST_CASE("self-loop affinity queries are rejected") {
    const AffinityGraph g = fixtures::walkthrough_graph();
    CHECK_THROWS_AS(g.affinity(m("m1"), m("m1")), ContractError);
}

TEST_CASE("unknown identifiers raise lookup errors naming the id") {
    const AffinityGraph g = fixtures::walkthrough_graph();
    CHECK_THROWS_WITH(g.affinity(m("mX"), m("m1")), Catch::Contains("mX"));
    CHECK_THROWS_WITH(g.affinity(m("m1"), e("eX")), Catch::Contains("eX"));
}

TEST_CASE("asymmetric mention scores are max-merged") {
    const auto edges = std::vector<AffinityEdge>{mm("a", "b", 0.4), mm("b", "a", 0.7)};
    const AffinityGraph g = AffinityGraph::from_edges(edges, 4);
    CHECK(g.affinity(m("a"), m("b")) == 0.7);
    CHECK(g.affinity(m("b"), m("a")) == 0.7);
}

TEST_CASE("scores outside (0,1] and self-loops are rejected at ingestion") {
    CHECK_THROWS_AS(AffinityGraph::from_edges({mm("a", "b", 0.0)}, 4), IngestError);
    CHECK_THROWS_AS(AffinityGraph::from_edges({mm("a", "b", 1.5)}, 4), IngestError);
    CHECK_THROWS_AS(AffinityGraph::from_edges({mm("a", "a", 0.5)}, 4), IngestError);
}

TEST_CASE("mention and entity namespaces must not collide") {
    CHECK_THROWS_AS(AffinityGraph::from_edges({mm("a", "b", 0.5), me("b", "a", 0.5)}, 4),
                    IngestError);
}

TEST_CASE("graphs serialize and load back edge-for-edge") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const auto edges = fixtures::random_edges(rng, 8, 3, 0.5);
        const AffinityGraph g = AffinityGraph::from_edges(edges, 3);

        const std::string path = "core_roundtrip.tsv";
        write_edges(g, path);
        const AffinityGraph back = AffinityGraph::from_edges(read_edges(path), 3);
        CHECK(g == back);
        std::remove(path.c_str());
    }
}

TEST_CASE("random graph construction keeps every stored score in (0,1]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const AffinityGraph g =
            AffinityGraph::from_edges(fixtures::random_edges(rng, 10, 4, 0.4), 4);
        for (const auto& edge : g.to_edges()) {
            CHECK(edge.score > 0.0);
            CHECK(edge.score <= 1.0);
        }
        for (std::uint32_t m = 0; m < g.mention_count(); ++m) {
            CHECK(g.sourced_mention_neighbors(m).size() <= 4);
            CHECK(g.sourced_entity_neighbors(m).size() <= 4);
        }
        for (const auto& mention : g.mentions()) {
            for (const auto& entity : g.entities()) {
                CHECK(mention.value != entity.value);
            }
        }
    }
}
