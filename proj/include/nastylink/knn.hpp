#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "affinity_graph.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "types.hpp"

namespace nastylink {

struct IndexConfig {
    int k = 4;
    unsigned workers = 1;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline void normalize_in_place(Vec& v) {
    const double n = l2_norm(v);
    if (n > 0.0) {
        for (double& x : v) x /= n;
    }
}

// Raw cosine in [-1,1] mapped onto [0,1] so scores compose multiplicatively.
inline double cosine_to_score(double cosine) {
    double s = (cosine + 1.0) / 2.0;
    return std::clamp(s, 0.0, 1.0);
}

namespace detail {

struct EmbeddingMatrix {
    std::vector<Vec> rows;  // unit-normalized
    std::size_t dim = 0;
};

template <class Record>
EmbeddingMatrix collect_embeddings(std::span<const Record> records, const char* kind,
                                   std::size_t expected_dim) {
    EmbeddingMatrix m;
    m.dim = expected_dim;
    m.rows.reserve(records.size());
    for (const auto& r : records) {
        if (!r.embedding.has_value()) {
            throw IngestError(std::string(kind) + " '" + r.id.value + "' has no embedding");
        }
        if (m.dim == 0) m.dim = r.embedding->size();
        if (r.embedding->size() != m.dim) {
            throw ConfigError(std::string(kind) + " '" + r.id.value +
                              "' embedding dimension " + std::to_string(r.embedding->size()) +
                              " != " + std::to_string(m.dim));
        }
        Vec v = *r.embedding;
        normalize_in_place(v);
        m.rows.push_back(std::move(v));
    }
    return m;
}

// Keeps the k best (score desc, index asc) candidates from a scored list.
inline std::vector<AffinityGraph::Neighbor> top_k(std::vector<AffinityGraph::Neighbor>& scored,
                                                  std::size_t k) {
    auto better = [](const AffinityGraph::Neighbor& a, const AffinityGraph::Neighbor& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    if (scored.size() > k) {
        std::nth_element(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                         scored.end(), better);
        scored.resize(k);
    }
    std::sort(scored.begin(), scored.end(), better);
    // drop phi = 0 (antipodal vectors); such edges are never materialized
    while (!scored.empty() && !(scored.back().second > 0.0)) scored.pop_back();
    return scored;
}

}  // namespace detail

// Exact top-k affinity graph: brute-force cosine scan of every mention against
// all other mentions and all entities. Queries run in parallel; assembly is
// deterministic (mentions are processed in id-sorted index order).
inline AffinityGraph build_graph(std::span<const Mention> mentions,
                                 std::span<const Entity> entities, const IndexConfig& config) {
    std::vector<MentionId> mention_ids;
    mention_ids.reserve(mentions.size());
    for (const auto& m : mentions) mention_ids.push_back(m.id);
    std::vector<EntityId> entity_ids;
    entity_ids.reserve(entities.size());
    for (const auto& e : entities) entity_ids.push_back(e.id);

    GraphBuilder builder(mention_ids, entity_ids, config.k);

    // Records re-sorted by id so row i matches graph mention index i.
    std::vector<Mention> mentions_sorted(mentions.begin(), mentions.end());
    std::sort(mentions_sorted.begin(), mentions_sorted.end(),
              [](const Mention& a, const Mention& b) { return a.id < b.id; });
    std::vector<Entity> entities_sorted(entities.begin(), entities.end());
    std::sort(entities_sorted.begin(), entities_sorted.end(),
              [](const Entity& a, const Entity& b) { return a.id < b.id; });

    auto mention_vecs = detail::collect_embeddings(std::span<const Mention>(mentions_sorted),
                                                   "mention", 0);
    auto entity_vecs = detail::collect_embeddings(std::span<const Entity>(entities_sorted),
                                                  "entity", mention_vecs.dim);

    const std::size_t n = mentions_sorted.size();
    const std::size_t k = static_cast<std::size_t>(config.k);
    std::vector<std::vector<AffinityGraph::Neighbor>> mm(n), me(n);

    parallel_for(n, config.workers, [&](std::size_t i) {
        const auto& q = mention_vecs.rows[i];
        std::vector<AffinityGraph::Neighbor> mention_scores;
        mention_scores.reserve(n > 0 ? n - 1 : 0);
        for (std::uint32_t j = 0; j < n; ++j) {
            if (j == i) continue;
            mention_scores.emplace_back(j, cosine_to_score(dot(q, mention_vecs.rows[j])));
        }
        mm[i] = detail::top_k(mention_scores, k);

        std::vector<AffinityGraph::Neighbor> entity_scores;
        entity_scores.reserve(entity_vecs.rows.size());
        for (std::uint32_t j = 0; j < entity_vecs.rows.size(); ++j) {
            entity_scores.emplace_back(j, cosine_to_score(dot(q, entity_vecs.rows[j])));
        }
        me[i] = detail::top_k(entity_scores, k);
    });

    for (std::uint32_t i = 0; i < n; ++i) {
        builder.set_neighbors(i, std::move(mm[i]), std::move(me[i]));
    }
    return builder.finish();
}

// load_graph_from_edges lives on AffinityGraph::from_edges; this alias keeps
// call sites reading like the pipeline description.
inline AffinityGraph load_graph_from_edges(const std::vector<AffinityEdge>& edges, int k) {
    return AffinityGraph::from_edges(edges, k);
}

}  // namespace nastylink
