#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <span>
#include <vector>

#include "affinity_graph.hpp"
#include "knn.hpp"
#include "parallel.hpp"
#include "types.hpp"

namespace nastylink {

struct HnswParams {
    std::size_t m = 16;                // connections per node per upper layer
    std::size_t ef_construction = 200;
    std::size_t ef_search = 96;
    std::uint64_t level_seed = 0x9e3779b97f4a7c15ULL;
};

// Hierarchical navigable small-world index over unit vectors, angular
// distance (1 - dot). Inserts are single-threaded in caller order, which keeps
// builds deterministic; searches are read-only and safe to run concurrently.
class HnswIndex {
public:
    explicit HnswIndex(std::size_t dim, HnswParams params = {})
        : dim_(dim), params_(params), level_rng_(params.level_seed),
          inv_log_m_(1.0 / std::log(static_cast<double>(std::max<std::size_t>(2, params.m)))) {}

    std::size_t size() const { return vectors_.size(); }

    void reserve(std::size_t n) {
        vectors_.reserve(n);
        layers_.reserve(n);
    }

    // Vector must already be unit-normalized and of the index dimension.
    void insert(Vec vector) {
        const std::uint32_t id = static_cast<std::uint32_t>(vectors_.size());
        const std::size_t level = random_level();
        vectors_.push_back(std::move(vector));
        layers_.emplace_back(level + 1);

        if (id == 0) {
            entry_point_ = 0;
            top_level_ = level;
            return;
        }

        std::uint32_t current = entry_point_;
        if (level < top_level_) {
            for (std::size_t lc = top_level_; lc > level; --lc) {
                current = greedy_closest(vectors_[id], current, lc);
            }
        }

        const std::size_t start = std::min(level, top_level_);
        for (std::size_t lc = start + 1; lc-- > 0;) {
            auto candidates = search_layer(vectors_[id], current, params_.ef_construction, lc);
            connect(id, candidates, lc);
            current = candidates.front().first;
        }

        if (level > top_level_) {
            entry_point_ = id;
            top_level_ = level;
        }
    }

    // k nearest neighbors as (id, angular distance), ascending by distance.
    std::vector<std::pair<std::uint32_t, double>> search(std::span<const double> query,
                                                         std::size_t k) const {
        std::vector<std::pair<std::uint32_t, double>> out;
        if (vectors_.empty()) return out;
        std::uint32_t current = entry_point_;
        for (std::size_t lc = top_level_; lc > 0; --lc) {
            current = greedy_closest(query, current, lc);
        }
        auto candidates = search_layer(query, current, std::max(params_.ef_search, k), 0);
        if (candidates.size() > k) candidates.resize(k);
        return candidates;
    }

private:
    using Scored = std::pair<std::uint32_t, double>;  // (id, distance)

    double distance(std::span<const double> a, std::uint32_t id) const {
        return 1.0 - dot(a, vectors_[id]);
    }

    std::size_t random_level() {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double u = unit(level_rng_);
        if (u <= 0.0) u = std::numeric_limits<double>::min();
        return static_cast<std::size_t>(-std::log(u) * inv_log_m_);
    }

    std::size_t max_degree(std::size_t level) const {
        return level == 0 ? params_.m * 2 : params_.m;
    }

    const std::vector<std::uint32_t>& neighbors(std::uint32_t id, std::size_t level) const {
        return layers_[id][level];
    }

    std::uint32_t greedy_closest(std::span<const double> query, std::uint32_t start,
                                 std::size_t level) const {
        std::uint32_t current = start;
        double best = distance(query, current);
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::uint32_t nb : neighbors(current, level)) {
                const double d = distance(query, nb);
                if (d < best || (d == best && nb < current)) {
                    best = d;
                    current = nb;
                    improved = true;
                }
            }
        }
        return current;
    }

    // Beam search with beam width ef; results ascending by (distance, id).
    std::vector<Scored> search_layer(std::span<const double> query, std::uint32_t entry,
                                     std::size_t ef, std::size_t level) const {
        auto worse = [](const Scored& a, const Scored& b) {
            return a.second < b.second || (a.second == b.second && a.first < b.first);
        };
        auto better = [&worse](const Scored& a, const Scored& b) { return worse(b, a); };

        // results: max-heap by distance; frontier: min-heap
        std::priority_queue<Scored, std::vector<Scored>, decltype(worse)> results(worse);
        std::priority_queue<Scored, std::vector<Scored>, decltype(better)> frontier(better);
        std::vector<bool> visited(vectors_.size(), false);

        const double d0 = distance(query, entry);
        results.emplace(entry, d0);
        frontier.emplace(entry, d0);
        visited[entry] = true;

        while (!frontier.empty()) {
            const auto [id, d] = frontier.top();
            frontier.pop();
            if (d > results.top().second && results.size() >= ef) break;
            for (std::uint32_t nb : neighbors(id, level)) {
                if (visited[nb]) continue;
                visited[nb] = true;
                const double dn = distance(query, nb);
                if (results.size() < ef || dn < results.top().second) {
                    results.emplace(nb, dn);
                    frontier.emplace(nb, dn);
                    if (results.size() > ef) results.pop();
                }
            }
        }

        std::vector<Scored> out;
        out.reserve(results.size());
        while (!results.empty()) {
            out.push_back(results.top());
            results.pop();
        }
        std::sort(out.begin(), out.end(), worse);
        return out;
    }

    void connect(std::uint32_t id, const std::vector<Scored>& candidates, std::size_t level) {
        const std::size_t limit = max_degree(level);
        const std::size_t take = std::min(params_.m, candidates.size());
        auto& own = layers_[id][level];
        for (std::size_t i = 0; i < take; ++i) {
            const std::uint32_t nb = candidates[i].first;
            own.push_back(nb);
            auto& back = layers_[nb][level];
            back.push_back(id);
            if (back.size() > limit) shrink(nb, level);
        }
    }

    // Keep the `limit` closest neighbors when a node's degree overflows.
    void shrink(std::uint32_t id, std::size_t level) {
        auto& list = layers_[id][level];
        std::vector<Scored> scored;
        scored.reserve(list.size());
        for (std::uint32_t nb : list) {
            scored.emplace_back(nb, distance(vectors_[id], nb));
        }
        std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
            return a.second < b.second || (a.second == b.second && a.first < b.first);
        });
        scored.resize(max_degree(level));
        list.clear();
        for (const auto& [nb, d] : scored) list.push_back(nb);
    }

    std::size_t dim_;
    HnswParams params_;
    std::mt19937_64 level_rng_;
    double inv_log_m_;

    std::vector<Vec> vectors_;
    std::vector<std::vector<std::vector<std::uint32_t>>> layers_;  // [id][level] -> neighbors
    std::uint32_t entry_point_ = 0;
    std::size_t top_level_ = 0;
};

// Approximate backend behind the same contract as build_graph: per-mention
// top-k neighbor lists from two HNSW indexes (mentions, entities).
inline AffinityGraph build_graph_hnsw(std::span<const Mention> mentions,
                                      std::span<const Entity> entities,
                                      const IndexConfig& config, const HnswParams& params = {}) {
    std::vector<MentionId> mention_ids;
    mention_ids.reserve(mentions.size());
    for (const auto& m : mentions) mention_ids.push_back(m.id);
    std::vector<EntityId> entity_ids;
    entity_ids.reserve(entities.size());
    for (const auto& e : entities) entity_ids.push_back(e.id);

    GraphBuilder builder(mention_ids, entity_ids, config.k);

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

    HnswIndex mention_index(mention_vecs.dim, params);
    mention_index.reserve(mention_vecs.rows.size());
    for (const auto& v : mention_vecs.rows) mention_index.insert(v);
    HnswIndex entity_index(mention_vecs.dim, params);
    entity_index.reserve(entity_vecs.rows.size());
    for (const auto& v : entity_vecs.rows) entity_index.insert(v);

    const std::size_t n = mention_vecs.rows.size();
    const std::size_t k = static_cast<std::size_t>(config.k);
    std::vector<std::vector<AffinityGraph::Neighbor>> mm(n), me(n);

    parallel_for(n, config.workers, [&](std::size_t i) {
        const auto& q = mention_vecs.rows[i];
        auto to_score = [](double dist) { return cosine_to_score(1.0 - dist); };

        std::vector<AffinityGraph::Neighbor> mention_scores;
        for (const auto& [id, dist] : mention_index.search(q, k + 1)) {
            if (id == i) continue;
            mention_scores.emplace_back(id, to_score(dist));
        }
        mm[i] = detail::top_k(mention_scores, k);

        std::vector<AffinityGraph::Neighbor> entity_scores;
        for (const auto& [id, dist] : entity_index.search(q, k)) {
            entity_scores.emplace_back(id, to_score(dist));
        }
        me[i] = detail::top_k(entity_scores, k);
    });

    for (std::uint32_t i = 0; i < n; ++i) {
        builder.set_neighbors(i, std::move(mm[i]), std::move(me[i]));
    }
    return builder.finish();
}

// Mean recall of `approx` per-source neighbor sets against `exact` ones,
// over both mention and entity lists of every mention.
inline double recall_at_k(const AffinityGraph& exact, const AffinityGraph& approx) {
    double total = 0.0;
    std::size_t queries = 0;
    for (std::uint32_t m = 0; m < exact.mention_count(); ++m) {
        const std::uint32_t am = approx.mention_index(exact.mention_id(m));
        auto tally = [&](const std::vector<AffinityGraph::Neighbor>& truth,
                         const std::vector<AffinityGraph::Neighbor>& got, bool entity_side) {
            if (truth.empty()) return;
            std::size_t hits = 0;
            for (const auto& [idx, score] : got) {
                const std::string& id = entity_side ? approx.entity_id(idx).value
                                                    : approx.mention_id(idx).value;
                for (const auto& [tidx, tscore] : truth) {
                    const std::string& tid = entity_side ? exact.entity_id(tidx).value
                                                         : exact.mention_id(tidx).value;
                    if (id == tid) {
                        ++hits;
                        break;
                    }
                }
            }
            total += static_cast<double>(hits) / static_cast<double>(truth.size());
            ++queries;
        };
        tally(exact.sourced_mention_neighbors(m), approx.sourced_mention_neighbors(am), false);
        tally(exact.sourced_entity_neighbors(m), approx.sourced_entity_neighbors(am), true);
    }
    return queries == 0 ? 1.0 : total / static_cast<double>(queries);
}

}  // namespace nastylink
