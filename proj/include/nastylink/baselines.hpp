#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "affinity_graph.hpp"
#include "clustering.hpp"
#include "nasty.hpp"
#include "types.hpp"
#include "union_find.hpp"

namespace nastylink {

struct MajorityConfig {
    double tau_m = 0.85;
    double tau_e = 0.8;
    double majority_threshold = 0.7;

    void validate() const {
        Thresholds{tau_m, tau_e, 0.0}.validate();
        if (!(majority_threshold > 0.0) || majority_threshold > 1.0) {
            throw ConfigError("majority_threshold must lie in (0,1]");
        }
    }
};

struct BottomUpConfig {
    double tau = 0.85;

    void validate() const {
        if (tau < 0.0 || tau > 1.0) throw ConfigError("tau must lie in [0,1]");
    }
};

// Lower-case, map non-alphanumeric characters to spaces, collapse whitespace.
inline std::string preprocess_label(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_space = true;
        }
    }
    return out;
}

// Links every mention whose preprocessed surface equals a preprocessed entity
// label; among multiple label matches the most popular entity wins, then the
// lowest id. Unmatched mentions become singleton NIL clusters.
inline Clustering exact_match(std::span<const Mention> mentions, std::span<const Entity> entities) {
    std::unordered_map<std::string, const Entity*> by_label;
    for (const auto& e : entities) {
        std::string key = preprocess_label(e.label);
        if (key.empty()) continue;
        auto [it, inserted] = by_label.emplace(std::move(key), &e);
        if (!inserted) {
            const Entity* held = it->second;
            if (e.popularity > held->popularity ||
                (e.popularity == held->popularity && e.id < held->id)) {
                it->second = &e;
            }
        }
    }

    Clustering clustering;
    std::unordered_map<std::string, std::size_t> cluster_of_entity;
    for (const auto& m : mentions) {
        const std::string key = preprocess_label(m.surface);
        const Entity* match = nullptr;
        if (!key.empty()) {
            auto it = by_label.find(key);
            if (it != by_label.end()) match = it->second;
        }
        if (match == nullptr) {
            clustering.clusters.push_back({{m.id}, {}, std::nullopt});
            continue;
        }
        auto [it, inserted] = cluster_of_entity.emplace(match->id.value, clustering.clusters.size());
        if (inserted) clustering.clusters.push_back({{}, {}, match->id});
        clustering.clusters[it->second].mentions.push_back(m.id);
    }
    clustering.canonicalize();
    return clustering;
}

// Greedy thresholded components, then whole-cluster entity assignment when a
// sufficient fraction of the cluster's mentions agree on their top entity.
inline Clustering majority_clustering(const AffinityGraph& graph, const MajorityConfig& config) {
    config.validate();
    Clustering clustering =
        init_clusters(graph, Thresholds{config.tau_m, config.tau_e, 0.0});

    for (auto& cluster : clustering.clusters) {
        // Count per entity how many mentions name it as their top candidate.
        std::map<EntityId, std::size_t> votes;
        for (const auto& m : cluster.mentions) {
            const std::uint32_t gm = graph.mention_index(m);
            double best = 0.0;
            std::int64_t best_entity = -1;
            for (const auto& [e, score] : graph.entity_neighbors(gm)) {
                if (score > best) {
                    best = score;
                    best_entity = e;
                }
            }
            if (best_entity >= 0 && best > config.tau_e) {
                ++votes[graph.entity_id(static_cast<std::uint32_t>(best_entity))];
            }
        }
        cluster.candidates.clear();
        // Mentions without any candidate stay in the denominator and dilute
        // the majority.
        const double denominator = static_cast<double>(cluster.mentions.size());
        std::optional<EntityId> winner;
        std::size_t winner_votes = 0;
        for (const auto& [entity, count] : votes) {  // id order; first max wins ties
            if (count > winner_votes) {
                winner_votes = count;
                winner = entity;
            }
        }
        if (winner.has_value() &&
            static_cast<double>(winner_votes) / denominator >= config.majority_threshold) {
            cluster.entity = winner;
        }
    }
    clustering.canonicalize();
    return clustering;
}

// Agglomerative constrained merging: edges above tau are replayed in
// descending score order and applied unless they would join two components
// that both already contain an entity.
inline Clustering bottom_up_clustering(const AffinityGraph& graph, const BottomUpConfig& config) {
    config.validate();
    const std::size_t n_mentions = graph.mention_count();
    const std::size_t n_entities = graph.entity_count();

    struct Edge {
        double score;
        std::uint32_t u;  // node ids: mentions, then entities
        std::uint32_t v;
        const std::string* u_name;
        const std::string* v_name;
    };
    std::vector<Edge> edges;
    for (std::uint32_t m = 0; m < n_mentions; ++m) {
        for (const auto& [v, score] : graph.mention_neighbors(m)) {
            if (v > m && score > config.tau) {
                edges.push_back({score, m, v, &graph.mention_id(m).value,
                                 &graph.mention_id(v).value});
            }
        }
        for (const auto& [e, score] : graph.entity_neighbors(m)) {
            if (score > config.tau) {
                edges.push_back({score, m, static_cast<std::uint32_t>(n_mentions + e),
                                 &graph.mention_id(m).value, &graph.entity_id(e).value});
            }
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.score != b.score) return a.score > b.score;
        if (*a.u_name != *b.u_name) return *a.u_name < *b.u_name;
        return *a.v_name < *b.v_name;
    });

    UnionFind components(n_mentions + n_entities);
    std::vector<std::int64_t> entity_of(n_mentions + n_entities, -1);
    for (std::uint32_t e = 0; e < n_entities; ++e) {
        entity_of[n_mentions + e] = static_cast<std::int64_t>(e);
    }
    for (const auto& edge : edges) {
        const std::uint32_t ru = components.find(edge.u);
        const std::uint32_t rv = components.find(edge.v);
        if (ru == rv) continue;
        if (entity_of[ru] >= 0 && entity_of[rv] >= 0) continue;  // would merge two entities
        const std::int64_t entity = std::max(entity_of[ru], entity_of[rv]);
        components.unite(ru, rv);
        entity_of[components.find(ru)] = entity;
    }

    Clustering clustering;
    std::unordered_map<std::uint32_t, std::size_t> root_to_cluster;
    for (std::uint32_t m = 0; m < n_mentions; ++m) {
        const std::uint32_t root = components.find(m);
        auto [it, inserted] = root_to_cluster.emplace(root, clustering.clusters.size());
        if (inserted) {
            Cluster c;
            if (entity_of[root] >= 0) {
                c.entity = graph.entity_id(static_cast<std::uint32_t>(entity_of[root]));
            }
            clustering.clusters.push_back(std::move(c));
        }
        clustering.clusters[it->second].mentions.push_back(graph.mention_id(m));
    }
    clustering.canonicalize();
    return clustering;
}

}  // namespace nastylink
