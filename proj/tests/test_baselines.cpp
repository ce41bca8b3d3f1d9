#include <catch2/catch.hpp>

#include <random>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "nastylink/baselines.hpp"
#include "nastylink/union_find.hpp"

using namespace nastylink;
using fixtures::e;
using fixtures::m;
using fixtures::me;
using fixtures::mm;

namespace {

Mention mk_mention(const std::string& id, const std::string& surface) {
    return {MentionId{id}, surface, {}, {}, {}};
}

Entity mk_entity(const std::string& id, const std::string& label, std::uint64_t popularity) {
    return {EntityId{id}, label, {}, {}, popularity};
}

const Cluster& cluster_of(const Clustering& clustering, const std::string& mention) {
    return clustering.clusters[clustering.assignment.at(MentionId{mention})];
}

}  // namespace

TEST_CASE("exact match links through lower-casing and special-character removal") {
    const std::vector<Mention> mentions{mk_mention("m0", "James Lake")};
    const std::vector<Entity> entities{mk_entity("e0", "james-lake!", 1)};
    const Clustering clustering = exact_match(mentions, entities);
    REQUIRE(clustering.clusters.size() == 1);
    REQUIRE(clustering.clusters[0].entity.has_value());
    CHECK(clustering.clusters[0].entity->value == "e0");
}

TEST_CASE("among identical labels the more popular entity wins") {
    const std::vector<Mention> mentions{mk_mention("m0", "ada")};
    const std::vector<Entity> entities{mk_entity("e0", "Ada", 3), mk_entity("e1", "ada", 10)};
    const Clustering clustering = exact_match(mentions, entities);
    CHECK(cluster_of(clustering, "m0").entity->value == "e1");

    // equal popularity: lowest id
    const std::vector<Entity> tied{mk_entity("e5", "ada", 7), mk_entity("e2", "Ada", 7)};
    CHECK(cluster_of(exact_match(mentions, tied), "m0").entity->value == "e2");
}

TEST_CASE("unmatched surfaces become singleton NIL clusters") {
    const std::vector<Mention> mentions{mk_mention("m0", "nowhere"), mk_mention("m1", "nowhere")};
    const std::vector<Entity> entities{mk_entity("e0", "somewhere", 1)};
    const Clustering clustering = exact_match(mentions, entities);
    CHECK(clustering.clusters.size() == 2);
    for (const auto& c : clustering.clusters) {
        CHECK(c.mentions.size() == 1);
        CHECK_FALSE(c.entity.has_value());
    }
}

TEST_CASE("mentions of the same matched entity share one cluster") {
    const std::vector<Mention> mentions{mk_mention("m0", "Ada"), mk_mention("m1", "ADA.")};
    const std::vector<Entity> entities{mk_entity("e0", "ada", 1)};
    const Clustering clustering = exact_match(mentions, entities);
    REQUIRE(clustering.clusters.size() == 1);
    CHECK(clustering.clusters[0].mentions.size() == 2);
}

TEST_CASE("label preprocessing is idempotent") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> ch(32, 126);
    std::uniform_int_distribution<int> len(0, 24);
    for (int trial = 0; trial < 300; ++trial) {
        std::string s;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) s.push_back(static_cast<char>(ch(rng)));
        const std::string once = preprocess_label(s);
        CHECK(preprocess_label(once) == once);
    }
}

namespace {

// Ten tightly connected mentions; `agree` of them point at e_t, the rest at
// distinct decoys.
AffinityGraph majority_fixture(int agree) {
    std::vector<AffinityEdge> edges;
    for (int i = 0; i < 10; ++i) {
        for (int j = i + 1; j < 10; ++j) {
            edges.push_back(mm("m" + std::to_string(i), "m" + std::to_string(j), 0.95));
        }
    }
    for (int i = 0; i < 10; ++i) {
        if (i < agree) {
            edges.push_back(me("m" + std::to_string(i), "e_t", 0.95));
        } else {
            edges.push_back(me("m" + std::to_string(i), "e_x" + std::to_string(i), 0.95));
        }
    }
    return AffinityGraph::from_edges(edges, 16);
}

}  // namespace

TEST_CASE("a 70 percent agreement assigns the entity to the whole cluster") {
    const Clustering clustering =
        majority_clustering(majority_fixture(7), {0.9, 0.9, 0.7});
    REQUIRE(clustering.clusters.size() == 1);
    REQUIRE(clustering.clusters[0].entity.has_value());
    CHECK(clustering.clusters[0].entity->value == "e_t");
    CHECK(clustering.clusters[0].mentions.size() == 10);
}

TEST_CASE("six of ten votes is below the default majority threshold") {
    const Clustering clustering =
        majority_clustering(majority_fixture(6), {0.9, 0.9, 0.7});
    REQUIRE(clustering.clusters.size() == 1);
    CHECK_FALSE(clustering.clusters[0].entity.has_value());
}

TEST_CASE("raising the majority threshold never assigns more clusters") {
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 20; ++trial) {
        const AffinityGraph g =
            AffinityGraph::from_edges(fixtures::random_edges(rng, 16, 5, 0.3), 6);
        std::size_t previous = std::numeric_limits<std::size_t>::max();
        for (const double threshold : {0.5, 0.6, 0.7, 0.8, 0.9}) {
            const Clustering clustering = majority_clustering(g, {0.6, 0.5, threshold});
            std::size_t assigned = 0;
            for (const auto& c : clustering.clusters) assigned += c.entity.has_value();
            CHECK(assigned <= previous);
            previous = assigned;
        }
    }
}

TEST_CASE("majority threshold 1 requires unanimity and epsilon acts as plurality") {
    CHECK(majority_clustering(majority_fixture(10), {0.9, 0.9, 1.0})
              .clusters[0]
              .entity.has_value());
    CHECK_FALSE(majority_clustering(majority_fixture(9), {0.9, 0.9, 1.0})
                    .clusters[0]
                    .entity.has_value());

    // vanishing threshold: the plurality entity wins even with 3/10 votes
    const Clustering plurality = majority_clustering(majority_fixture(3), {0.9, 0.9, 1e-9});
    REQUIRE(plurality.clusters[0].entity.has_value());
    CHECK(plurality.clusters[0].entity->value == "e_t");
}

TEST_CASE("bottom-up keeps the contested group apart once both entities are absorbed") {
    const AffinityGraph g = fixtures::walkthrough_graph();
    const Clustering clustering = bottom_up_clustering(g, {0.7});
    const Cluster& c7 = cluster_of(clustering, "m7");
    REQUIRE(c7.entity.has_value());
    CHECK(c7.entity->value == "e_b");
    const Cluster& c5 = cluster_of(clustering, "m5");
    REQUIRE(c5.entity.has_value());
    CHECK(c5.entity->value == "e_c");
    // the 0.8 edge m5--m7 was skipped: merging would join e_b and e_c
    CHECK(clustering.assignment.at(m("m5")) != clustering.assignment.at(m("m7")));
}

TEST_CASE("without entity edges bottom-up equals thresholded components") {
    std::mt19937_64 rng(89);
    for (int trial = 0; trial < 30; ++trial) {
        auto edges = fixtures::random_edges(rng, 12, 0, 0.3);
        const AffinityGraph g = AffinityGraph::from_edges(edges, 8);
        const double tau = 0.4;
        const Clustering bottom_up = bottom_up_clustering(g, {tau});
        const Clustering components = init_clusters(g, Thresholds{tau, 0.9, 0.5});
        REQUIRE(bottom_up.clusters.size() == components.clusters.size());
        for (std::size_t i = 0; i < bottom_up.clusters.size(); ++i) {
            CHECK(bottom_up.clusters[i].mentions == components.clusters[i].mentions);
        }
    }
}

TEST_CASE("bottom-up matches a step-by-step replay oracle") {
    std::mt19937_64 rng(97);
    for (int trial = 0; trial < 60; ++trial) {
        const auto edges = fixtures::random_edges(rng, 7, 3, 0.5);
        const AffinityGraph g = AffinityGraph::from_edges(edges, 16);
        const double tau = 0.2;
        const Clustering got = bottom_up_clustering(g, {tau});

        // oracle: replay the same order with naive set merging
        struct Item {
            double score;
            std::string a, b;
            bool to_entity;
        };
        std::vector<Item> items;
        for (std::uint32_t i = 0; i < g.mention_count(); ++i) {
            for (const auto& [j, s] : g.mention_neighbors(i)) {
                if (j > i && s > tau) {
                    items.push_back({s, g.mention_id(i).value, g.mention_id(j).value, false});
                }
            }
            for (const auto& [j, s] : g.entity_neighbors(i)) {
                if (s > tau) {
                    items.push_back({s, g.mention_id(i).value, g.entity_id(j).value, true});
                }
            }
        }
        std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
            if (x.score != y.score) return x.score > y.score;
            if (x.a != y.a) return x.a < y.a;
            return x.b < y.b;
        });
        std::vector<std::set<std::string>> groups;  // node names; entities prefixed "E:"
        auto group_of = [&](const std::string& name) -> std::size_t {
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                if (groups[gi].count(name)) return gi;
            }
            groups.push_back({name});
            return groups.size() - 1;
        };
        auto has_entity = [&](std::size_t gi) {
            for (const auto& name : groups[gi]) {
                if (name.rfind("E:", 0) == 0) return true;
            }
            return false;
        };
        for (const auto& item : items) {
            const std::size_t ga = group_of(item.a);
            const std::size_t gb = group_of(item.to_entity ? "E:" + item.b : item.b);
            if (ga == gb) continue;
            if (has_entity(ga) && has_entity(gb)) continue;
            groups[ga].insert(groups[gb].begin(), groups[gb].end());
            groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(gb));
        }

        for (std::uint32_t i = 0; i < g.mention_count(); ++i) {
            for (std::uint32_t j = 0; j < g.mention_count(); ++j) {
                const std::size_t ga = group_of(g.mention_id(i).value);
                const std::size_t gb = group_of(g.mention_id(j).value);
                const bool together = got.assignment.at(g.mention_id(i)) ==
                                      got.assignment.at(g.mention_id(j));
                CHECK(together == (ga == gb));
            }
            const Cluster& cluster = got.clusters[got.assignment.at(g.mention_id(i))];
            const std::size_t gi = group_of(g.mention_id(i).value);
            if (cluster.entity.has_value()) {
                CHECK(groups[gi].count("E:" + cluster.entity->value) == 1);
            } else {
                CHECK_FALSE(has_entity(gi));
            }
        }
    }
}

TEST_CASE("bottom-up with tau 1 yields singleton mention clusters") {
    const AffinityGraph g = fixtures::walkthrough_graph();
    const Clustering clustering = bottom_up_clustering(g, {1.0});
    CHECK(clustering.clusters.size() == g.mention_count());
    for (const auto& c : clustering.clusters) {
        CHECK(c.mentions.size() == 1);
        CHECK_FALSE(c.entity.has_value());
    }
}

TEST_CASE("all three baselines produce valid single-entity partitions") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        const AffinityGraph g =
            AffinityGraph::from_edges(fixtures::random_edges(rng, 12, 4, 0.4), 4);
        for (const Clustering& clustering :
             {majority_clustering(g, {0.5, 0.5, 0.7}), bottom_up_clustering(g, {0.5})}) {
            clustering.check_partition();
            CHECK(clustering.assignment.size() == g.mention_count());
        }
    }
}
