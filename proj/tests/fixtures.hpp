#pragma once

// Shared test fixtures: the ten-mention walkthrough graph used across the
// suites, plus small random generators for property tests.

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nastylink/affinity_graph.hpp"
#include "nastylink/types.hpp"

namespace fixtures {

using namespace nastylink;

inline MentionId m(const std::string& v) { return MentionId{v}; }
inline EntityId e(const std::string& v) { return EntityId{v}; }

inline AffinityEdge mm(const std::string& a, const std::string& b, double s) {
    return {MentionId{a}, NodeId{MentionId{b}}, s};
}
inline AffinityEdge me(const std::string& a, const std::string& b, double s) {
    return {MentionId{a}, NodeId{EntityId{b}}, s};
}

// Walkthrough graph: three mention groups, one with a single candidate
// entity, one contested between two entities, one with none.
//
//   group 1: m1--m2 (.9), m1--m3 (.8), m3--m4 (.9); m1,m2 -> e_a (.9)
//   group 2: m6--m7 (.9), m5--m7 (.8); m6 -> e_b (.9), m7 -> e_c (.8), m5 -> e_c (.9)
//   group 3: m8--m9 (.8), m9--m10 (.8)
inline std::vector<AffinityEdge> walkthrough_edges() {
    return {
        mm("m1", "m2", 0.9), mm("m1", "m3", 0.8), mm("m3", "m4", 0.9),
        me("m1", "e_a", 0.9), me("m2", "e_a", 0.9),
        mm("m6", "m7", 0.9), mm("m5", "m7", 0.8),
        me("m6", "e_b", 0.9), me("m7", "e_c", 0.8), me("m5", "e_c", 0.9),
        mm("m8", "m9", 0.8), mm("m9", "m10", 0.8),
    };
}

inline Thresholds walkthrough_thresholds() { return Thresholds{0.7, 0.7, 0.75}; }

inline AffinityGraph walkthrough_graph() {
    return AffinityGraph::from_edges(walkthrough_edges(), 4);
}

// Random edge list over n_mentions/n_entities with the given edge density;
// scores uniform in (0,1].
inline std::vector<AffinityEdge> random_edges(std::mt19937_64& rng, std::size_t n_mentions,
                                              std::size_t n_entities, double density) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto mention_name = [](std::size_t i) { return "m" + std::to_string(i); };
    auto entity_name = [](std::size_t i) { return "e" + std::to_string(i); };
    std::vector<AffinityEdge> edges;
    for (std::size_t i = 0; i < n_mentions; ++i) {
        for (std::size_t j = i + 1; j < n_mentions; ++j) {
            if (unit(rng) < density) {
                edges.push_back(mm(mention_name(i), mention_name(j), 1.0 - unit(rng)));
            }
        }
        for (std::size_t j = 0; j < n_entities; ++j) {
            if (unit(rng) < density) {
                edges.push_back(me(mention_name(i), entity_name(j), 1.0 - unit(rng)));
            }
        }
    }
    if (edges.empty()) edges.push_back(mm(mention_name(0), mention_name(1), 0.5));
    return edges;
}

// Random corpus with Gaussian embeddings (ids zero-padded so lexicographic
// order is numeric order).
inline std::pair<std::vector<Mention>, std::vector<Entity>> random_corpus(std::mt19937_64& rng,
                                                                          std::size_t n_mentions,
                                                                          std::size_t n_entities,
                                                                          std::size_t dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto padded = [](const char* prefix, std::size_t i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, i);
        return std::string(buf);
    };
    auto vec = [&] {
        Vec v(dim);
        for (double& x : v) x = gauss(rng);
        return v;
    };
    std::vector<Mention> mentions(n_mentions);
    for (std::size_t i = 0; i < n_mentions; ++i) {
        mentions[i].id = MentionId{padded("m", i)};
        mentions[i].surface = "mention " + std::to_string(i);
        mentions[i].embedding = vec();
    }
    std::vector<Entity> entities(n_entities);
    for (std::size_t i = 0; i < n_entities; ++i) {
        entities[i].id = EntityId{padded("e", i)};
        entities[i].label = "entity " + std::to_string(i);
        entities[i].embedding = vec();
    }
    return {std::move(mentions), std::move(entities)};
}

// Exhaustive max-product search over simple paths from a mention to an
// entity with mentions-only interiors, honoring the tau_a edge cut. The
// independent oracle for the Dijkstra-based computation.
inline double brute_force_transitive(const AffinityGraph& g,
                                     const std::vector<MentionId>& members,
                                     const MentionId& from, const EntityId& entity,
                                     double tau_a) {
    const std::size_t n = members.size();
    std::vector<std::vector<double>> mention_edge(n, std::vector<double>(n, 0.0));
    std::vector<double> entity_edge(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double phi = g.affinity(members[i], members[j]);
            if (phi > tau_a) mention_edge[i][j] = mention_edge[j][i] = phi;
        }
        const double phi = g.affinity(members[i], entity);
        if (phi > tau_a) entity_edge[i] = phi;
    }
    std::size_t start = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (members[i] == from) start = i;
    }
    if (start == n) return -1.0;

    double best = 0.0;
    std::vector<bool> visited(n, false);
    auto dfs = [&](auto&& self, std::size_t node, double product) -> void {
        if (entity_edge[node] > 0.0) best = std::max(best, product * entity_edge[node]);
        visited[node] = true;
        for (std::size_t next = 0; next < n; ++next) {
            if (!visited[next] && mention_edge[node][next] > 0.0) {
                self(self, next, product * mention_edge[node][next]);
            }
        }
        visited[node] = false;
    };
    dfs(dfs, start, 1.0);
    return best;
}

}  // namespace fixtures
