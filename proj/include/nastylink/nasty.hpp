#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "affinity_graph.hpp"
#include "clustering.hpp"
#include "parallel.hpp"
#include "types.hpp"
#include "union_find.hpp"

namespace nastylink {

// Greedy nearest-neighbour initialization: mentions sharing a path of
// mention-mention edges above tau_m form one cluster; each cluster collects
// the union of its members' single best entities above tau_e.
inline Clustering init_clusters(const AffinityGraph& graph, const Thresholds& thresholds) {
    thresholds.validate();
    const std::size_t n = graph.mention_count();
    UnionFind components(n);
    for (std::uint32_t u = 0; u < n; ++u) {
        for (const auto& [v, score] : graph.mention_neighbors(u)) {
            if (v > u && score > thresholds.tau_m) components.unite(u, v);
        }
    }

    std::unordered_map<std::uint32_t, std::size_t> root_to_cluster;
    Clustering clustering;
    for (std::uint32_t m = 0; m < n; ++m) {
        const std::uint32_t root = components.find(m);
        auto [it, inserted] = root_to_cluster.emplace(root, clustering.clusters.size());
        if (inserted) clustering.clusters.emplace_back();
        clustering.clusters[it->second].mentions.push_back(graph.mention_id(m));
    }

    // Candidates: per mention its single argmax entity (ties -> lowest id,
    // i.e. lowest index), kept only when its affinity clears tau_e.
    std::vector<std::vector<std::uint32_t>> candidate_sets(clustering.clusters.size());
    for (std::uint32_t m = 0; m < n; ++m) {
        double best = 0.0;
        std::uint32_t best_entity = 0;
        bool found = false;
        for (const auto& [e, score] : graph.entity_neighbors(m)) {
            if (score > best) {  // strictly greater keeps the lowest index on ties
                best = score;
                best_entity = e;
                found = true;
            }
        }
        if (found && best > thresholds.tau_e) {
            const std::size_t c = root_to_cluster.at(components.find(m));
            candidate_sets[c].push_back(best_entity);
        }
    }
    for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
        auto& set = candidate_sets[c];
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
        for (std::uint32_t e : set) clustering.clusters[c].candidates.push_back(graph.entity_id(e));
    }

    clustering.canonicalize();
    return clustering;
}

// Conflict-resolution view of one cluster: its mentions plus candidate
// entities, with only edges above tau_a. Local node indices are mentions
// first (cluster order), then entities.
struct ClusterGraph {
    std::vector<MentionId> mentions;
    std::vector<EntityId> entities;
    double tau_a = 0.0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adjacency;  // raw phi

    std::size_t node_count() const { return mentions.size() + entities.size(); }
    std::uint32_t entity_node(std::uint32_t entity_local) const {
        return static_cast<std::uint32_t>(mentions.size()) + entity_local;
    }
    bool is_entity_node(std::uint32_t node) const { return node >= mentions.size(); }

    std::string node_name(std::uint32_t node) const {
        return is_entity_node(node) ? entities[node - mentions.size()].value
                                    : mentions[node].value;
    }
};

inline ClusterGraph build_cluster_graph(const AffinityGraph& graph, const Cluster& cluster,
                                        double tau_a) {
    ClusterGraph cg;
    cg.tau_a = tau_a;
    cg.mentions = cluster.mentions;
    cg.entities = cluster.candidates;
    cg.adjacency.assign(cg.node_count(), {});

    std::unordered_map<std::uint32_t, std::uint32_t> mention_local;
    mention_local.reserve(cg.mentions.size());
    for (std::uint32_t i = 0; i < cg.mentions.size(); ++i) {
        mention_local.emplace(graph.mention_index(cg.mentions[i]), i);
    }
    std::unordered_map<std::uint32_t, std::uint32_t> entity_local;
    entity_local.reserve(cg.entities.size());
    for (std::uint32_t i = 0; i < cg.entities.size(); ++i) {
        entity_local.emplace(graph.entity_index(cg.entities[i]), i);
    }

    for (std::uint32_t i = 0; i < cg.mentions.size(); ++i) {
        const std::uint32_t gm = graph.mention_index(cg.mentions[i]);
        for (const auto& [v, score] : graph.mention_neighbors(gm)) {
            if (!(score > tau_a)) continue;
            auto it = mention_local.find(v);
            if (it == mention_local.end() || it->second <= i) continue;
            cg.adjacency[i].emplace_back(it->second, score);
            cg.adjacency[it->second].emplace_back(i, score);
        }
        for (const auto& [e, score] : graph.entity_neighbors(gm)) {
            if (!(score > tau_a)) continue;
            auto it = entity_local.find(e);
            if (it == entity_local.end()) continue;
            const std::uint32_t en = cg.entity_node(it->second);
            cg.adjacency[i].emplace_back(en, score);
            cg.adjacency[en].emplace_back(i, score);
        }
    }
    for (auto& adj : cg.adjacency) std::sort(adj.begin(), adj.end());
    return cg;
}

// Best-path tree from one entity over the cluster's mentions. Other entities
// are never traversed: entities are path endpoints only.
struct EntityPaths {
    std::vector<double> affinity;       // per mention node, product along best path (0 unreachable)
    std::vector<std::int32_t> parent;   // per node, predecessor toward the entity (-1 none)
};

inline EntityPaths best_paths_from_entity(const ClusterGraph& cg, std::uint32_t entity_local) {
    const std::size_t n = cg.node_count();
    const std::uint32_t source = cg.entity_node(entity_local);
    constexpr double inf = std::numeric_limits<double>::infinity();

    EntityPaths out;
    out.affinity.assign(cg.mentions.size(), 0.0);
    out.parent.assign(n, -1);

    // Dijkstra with edge weight -log(phi); phi = 1 gives weight exactly 0.
    std::vector<double> cost(n, inf);
    std::vector<double> product(n, 0.0);
    std::vector<bool> settled(n, false);
    using HeapItem = std::pair<double, std::uint32_t>;
    std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>> heap;

    cost[source] = 0.0;
    product[source] = 1.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [c, u] = heap.top();
        heap.pop();
        if (settled[u]) continue;
        settled[u] = true;
        if (cg.is_entity_node(u) && u != source) continue;  // endpoints only
        for (const auto& [v, phi] : cg.adjacency[u]) {
            if (settled[v]) continue;
            if (cg.is_entity_node(v) && v != source) continue;
            const double nc = c - std::log(phi);
            if (nc < cost[v]) {
                cost[v] = nc;
                product[v] = product[u] * phi;
                out.parent[v] = static_cast<std::int32_t>(u);
                heap.emplace(nc, v);
            }
        }
    }

    for (std::uint32_t m = 0; m < cg.mentions.size(); ++m) {
        if (cost[m] < inf) out.affinity[m] = product[m];
    }
    return out;
}

// Transitive affinity between a mention and an entity plus its witness path.
struct TransitiveAffinity {
    double value = 0.0;
    std::vector<std::string> path;  // node ids from the mention to the entity
};

inline std::vector<std::string> walk_path(const ClusterGraph& cg, const EntityPaths& paths,
                                          std::uint32_t mention_local) {
    std::vector<std::string> nodes;
    std::int32_t node = static_cast<std::int32_t>(mention_local);
    while (node >= 0) {
        nodes.push_back(cg.node_name(static_cast<std::uint32_t>(node)));
        node = paths.parent[static_cast<std::size_t>(node)];
    }
    return nodes;
}

inline TransitiveAffinity transitive_affinity(const ClusterGraph& cg, const MentionId& m,
                                              const EntityId& e) {
    const auto mit = std::find(cg.mentions.begin(), cg.mentions.end(), m);
    if (mit == cg.mentions.end()) {
        throw ContractError("mention '" + m.value + "' is not in the cluster");
    }
    const auto eit = std::find(cg.entities.begin(), cg.entities.end(), e);
    if (eit == cg.entities.end()) {
        throw ContractError("entity '" + e.value + "' is not a candidate of the cluster");
    }
    const auto mention_local = static_cast<std::uint32_t>(mit - cg.mentions.begin());
    const auto entity_local = static_cast<std::uint32_t>(eit - cg.entities.begin());

    const EntityPaths paths = best_paths_from_entity(cg, entity_local);
    TransitiveAffinity result;
    result.value = paths.affinity[mention_local];
    if (result.value > 0.0) result.path = walk_path(cg, paths, mention_local);
    return result;
}

struct TraceEntry {
    MentionId mention;
    std::optional<EntityId> assigned;     // nullopt -> NIL
    std::optional<EntityId> best_entity;  // argmax candidate, also for NIL rows
    double affinity = 0.0;                // transitive affinity to best_entity
    std::vector<std::string> path;        // witness path, mention ... entity
};

struct ResolutionTrace {
    std::vector<TraceEntry> entries;  // sorted by mention id
};

struct LinkResult {
    Clustering clustering;
    ResolutionTrace trace;
};

// Splits every initial cluster so that each final cluster holds at most one
// entity: mentions whose best transitive affinity clears tau_a join that
// entity's sub-cluster, the rest are re-clustered among themselves into NIL
// sub-clusters using tau_m. Clusters are processed independently (parallel).
inline LinkResult resolve_conflicts(const Clustering& initial, const AffinityGraph& graph,
                                    const Thresholds& thresholds, unsigned workers = 1) {
    thresholds.validate();
    struct ClusterOutput {
        std::vector<Cluster> clusters;
        std::vector<TraceEntry> trace;
    };
    std::vector<ClusterOutput> outputs(initial.clusters.size());

    parallel_for(initial.clusters.size(), workers, [&](std::size_t ci) {
        const Cluster& cluster = initial.clusters[ci];
        auto& out = outputs[ci];

        if (cluster.candidates.empty()) {
            // No conflict to resolve; the cluster passes through as NIL.
            out.clusters.push_back({cluster.mentions, {}, std::nullopt});
            for (const auto& m : cluster.mentions) {
                out.trace.push_back({m, std::nullopt, std::nullopt, 0.0, {}});
            }
            return;
        }

        const ClusterGraph cg = build_cluster_graph(graph, cluster, thresholds.tau_a);
        std::vector<EntityPaths> per_entity(cg.entities.size());
        for (std::uint32_t e = 0; e < cg.entities.size(); ++e) {
            per_entity[e] = best_paths_from_entity(cg, e);
        }

        const std::size_t n_mentions = cg.mentions.size();
        std::vector<double> best(n_mentions, 0.0);
        std::vector<std::int32_t> best_entity(n_mentions, -1);
        for (std::uint32_t e = 0; e < cg.entities.size(); ++e) {
            for (std::uint32_t m = 0; m < n_mentions; ++m) {
                // strictly greater keeps the lowest entity id on ties
                if (per_entity[e].affinity[m] > best[m]) {
                    best[m] = per_entity[e].affinity[m];
                    best_entity[m] = static_cast<std::int32_t>(e);
                }
            }
        }

        std::vector<std::uint32_t> nil_mentions;
        std::unordered_map<std::uint32_t, std::vector<MentionId>> entity_groups;
        for (std::uint32_t m = 0; m < n_mentions; ++m) {
            if (best[m] > thresholds.tau_a) {
                entity_groups[static_cast<std::uint32_t>(best_entity[m])]
                    .push_back(cg.mentions[m]);
            } else {
                nil_mentions.push_back(m);
            }
        }

        for (std::uint32_t e = 0; e < cg.entities.size(); ++e) {
            auto it = entity_groups.find(e);
            if (it == entity_groups.end()) continue;
            out.clusters.push_back({std::move(it->second), {}, cg.entities[e]});
        }

        // Re-cluster the NIL mentions among themselves, as in initialization.
        if (!nil_mentions.empty()) {
            std::unordered_map<std::uint32_t, std::uint32_t> local_of;  // graph idx -> nil idx
            local_of.reserve(nil_mentions.size());
            for (std::uint32_t i = 0; i < nil_mentions.size(); ++i) {
                local_of.emplace(graph.mention_index(cg.mentions[nil_mentions[i]]), i);
            }
            UnionFind nil_components(nil_mentions.size());
            for (std::uint32_t i = 0; i < nil_mentions.size(); ++i) {
                const std::uint32_t gm = graph.mention_index(cg.mentions[nil_mentions[i]]);
                for (const auto& [v, score] : graph.mention_neighbors(gm)) {
                    if (!(score > thresholds.tau_m)) continue;
                    auto it = local_of.find(v);
                    if (it != local_of.end()) nil_components.unite(i, it->second);
                }
            }
            std::unordered_map<std::uint32_t, std::size_t> root_to_out;
            for (std::uint32_t i = 0; i < nil_mentions.size(); ++i) {
                const std::uint32_t root = nil_components.find(i);
                auto [it, inserted] = root_to_out.emplace(root, out.clusters.size());
                if (inserted) out.clusters.push_back({{}, {}, std::nullopt});
                out.clusters[it->second].mentions.push_back(cg.mentions[nil_mentions[i]]);
            }
        }

        for (std::uint32_t m = 0; m < n_mentions; ++m) {
            TraceEntry entry;
            entry.mention = cg.mentions[m];
            if (best_entity[m] >= 0) {
                const auto e = static_cast<std::uint32_t>(best_entity[m]);
                entry.best_entity = cg.entities[e];
                entry.affinity = best[m];
                entry.path = walk_path(cg, per_entity[e], m);
            }
            if (best[m] > thresholds.tau_a) entry.assigned = entry.best_entity;
            out.trace.push_back(std::move(entry));
        }
    });

    LinkResult result;
    for (auto& out : outputs) {
        for (auto& c : out.clusters) result.clustering.clusters.push_back(std::move(c));
        for (auto& t : out.trace) result.trace.entries.push_back(std::move(t));
    }
    result.clustering.canonicalize();
    std::sort(result.trace.entries.begin(), result.trace.entries.end(),
              [](const TraceEntry& a, const TraceEntry& b) { return a.mention < b.mention; });
    return result;
}

// Full pipeline over a prebuilt affinity graph.
inline LinkResult run_nastylinker(std::span<const Mention> mentions,
                                  std::span<const Entity> entities, const AffinityGraph& graph,
                                  const Thresholds& thresholds, unsigned workers = 1) {
    std::unordered_map<std::string, bool> known_mentions;
    for (const auto& m : mentions) known_mentions.emplace(m.id.value, true);
    for (const auto& id : graph.mentions()) {
        if (!known_mentions.count(id.value)) {
            throw LookupError("graph mention '" + id.value + "' missing from the corpus");
        }
    }
    if (known_mentions.size() != graph.mention_count()) {
        throw LookupError("corpus and graph mention sets differ");
    }
    std::unordered_map<std::string, bool> known_entities;
    for (const auto& e : entities) known_entities.emplace(e.id.value, true);
    for (const auto& id : graph.entities()) {
        if (!known_entities.count(id.value)) {
            throw LookupError("graph entity '" + id.value + "' missing from the catalog");
        }
    }

    const Clustering initial = init_clusters(graph, thresholds);
    return resolve_conflicts(initial, graph, thresholds, workers);
}

}  // namespace nastylink
