#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "ids.hpp"
#include "types.hpp"

namespace nastylink {

// One scored edge from a mention to a mention or entity. Scores live in (0,1];
// zero-affinity pairs are simply not materialized.
struct AffinityEdge {
    MentionId source;
    NodeId target;
    double score = 0.0;

    bool operator==(const AffinityEdge&) const = default;
};

// Sparse top-k affinity graph over mentions and known entities.
//
// Edges are stored per source mention exactly as ingested (after per-source
// top-k truncation), which keeps serialization lossless. Lookups and the
// adjacency views apply the symmetric closure for mention-mention pairs,
// taking max(phi(a,b), phi(b,a)) when both directions were supplied.
// Immutable after construction; concurrent reads are safe.
class AffinityGraph {
public:
    using Neighbor = std::pair<std::uint32_t, double>;

    AffinityGraph() = default;

    // Builds a graph from an explicit edge list, keeping for each source
    // mention its k best mention edges and k best entity edges (ties broken
    // by lowest target id). The node universe is derived from the edges.
    static AffinityGraph from_edges(const std::vector<AffinityEdge>& edges, int k) {
        return from_edges(edges, k, {}, {});
    }

    // Same, with an explicit node universe so isolated mentions and unreferenced
    // entities stay part of the graph.
    static AffinityGraph from_edges(const std::vector<AffinityEdge>& edges, int k,
                                    std::span<const MentionId> mentions,
                                    std::span<const EntityId> entities) {
        if (k < 1) throw ConfigError("k must be >= 1");
        AffinityGraph g;
        g.k_ = k;

        std::unordered_set<std::string> mention_set;
        std::unordered_set<std::string> entity_set;
        for (const auto& m : mentions) {
            if (!mention_set.insert(m.value).second) {
                throw IngestError("duplicate mention id '" + m.value + "'");
            }
        }
        for (const auto& e : entities) {
            if (!entity_set.insert(e.value).second) {
                throw IngestError("duplicate entity id '" + e.value + "'");
            }
        }
        const bool closed_universe = !mention_set.empty() || !entity_set.empty();

        for (const auto& edge : edges) {
            if (!(edge.score > 0.0) || edge.score > 1.0) {
                throw IngestError("edge (" + edge.source.value + ", " + raw(edge.target) +
                                  ") has score outside (0,1]");
            }
            if (!is_entity(edge.target) && edge.source.value == raw(edge.target)) {
                throw IngestError("self-loop on mention '" + edge.source.value + "'");
            }
            if (closed_universe) {
                auto require = [](const std::unordered_set<std::string>& set,
                                  const std::string& id, const char* kind) {
                    if (!set.count(id)) {
                        throw IngestError(std::string("edge references unknown ") + kind + " '" +
                                          id + "'");
                    }
                };
                require(mention_set, edge.source.value, "mention");
                if (is_entity(edge.target)) {
                    require(entity_set, raw(edge.target), "entity");
                } else {
                    require(mention_set, raw(edge.target), "mention");
                }
            } else {
                mention_set.insert(edge.source.value);
                (is_entity(edge.target) ? entity_set : mention_set).insert(raw(edge.target));
            }
        }

        for (const auto& id : mention_set) {
            if (entity_set.count(id)) {
                throw IngestError("id '" + id + "' used as both mention and entity");
            }
        }

        g.mention_ids_.reserve(mention_set.size());
        for (const auto& id : mention_set) g.mention_ids_.emplace_back(id);
        std::sort(g.mention_ids_.begin(), g.mention_ids_.end());
        g.entity_ids_.reserve(entity_set.size());
        for (const auto& id : entity_set) g.entity_ids_.emplace_back(id);
        std::sort(g.entity_ids_.begin(), g.entity_ids_.end());
        g.build_index_maps();

        // Dedupe per listed direction; conflicting duplicate scores are data errors.
        std::unordered_map<std::uint64_t, double> mm_directed;
        std::unordered_map<std::uint64_t, double> me_directed;
        for (const auto& edge : edges) {
            const std::uint32_t src = g.mention_index_.at(edge.source.value);
            const bool to_entity = is_entity(edge.target);
            const std::uint32_t tgt = to_entity ? g.entity_index_.at(raw(edge.target))
                                                : g.mention_index_.at(raw(edge.target));
            auto& map = to_entity ? me_directed : mm_directed;
            auto [it, inserted] = map.emplace(pack(src, tgt), edge.score);
            if (!inserted && it->second != edge.score) {
                throw IngestError("duplicate edge (" + edge.source.value + ", " +
                                  raw(edge.target) + ") with conflicting scores");
            }
        }

        g.sourced_mm_.assign(g.mention_ids_.size(), {});
        g.sourced_me_.assign(g.mention_ids_.size(), {});
        for (const auto& [key, score] : mm_directed) {
            g.sourced_mm_[unpack_hi(key)].emplace_back(unpack_lo(key), score);
        }
        for (const auto& [key, score] : me_directed) {
            g.sourced_me_[unpack_hi(key)].emplace_back(unpack_lo(key), score);
        }
        auto truncate_top_k = [k](std::vector<Neighbor>& list) {
            std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            });
            if (list.size() > static_cast<std::size_t>(k)) list.resize(static_cast<std::size_t>(k));
            std::sort(list.begin(), list.end());
        };
        for (auto& list : g.sourced_mm_) truncate_top_k(list);
        for (auto& list : g.sourced_me_) truncate_top_k(list);

        g.finalize();
        return g;
    }

    int k() const { return k_; }
    std::size_t mention_count() const { return mention_ids_.size(); }
    std::size_t entity_count() const { return entity_ids_.size(); }

    const std::vector<MentionId>& mentions() const { return mention_ids_; }
    const std::vector<EntityId>& entities() const { return entity_ids_; }

    bool has_mention(const MentionId& id) const { return mention_index_.count(id.value) > 0; }
    bool has_entity(const EntityId& id) const { return entity_index_.count(id.value) > 0; }

    std::uint32_t mention_index(const MentionId& id) const {
        auto it = mention_index_.find(id.value);
        if (it == mention_index_.end()) throw LookupError("unknown mention id '" + id.value + "'");
        return it->second;
    }
    std::uint32_t entity_index(const EntityId& id) const {
        auto it = entity_index_.find(id.value);
        if (it == entity_index_.end()) throw LookupError("unknown entity id '" + id.value + "'");
        return it->second;
    }
    const MentionId& mention_id(std::uint32_t idx) const { return mention_ids_[idx]; }
    const EntityId& entity_id(std::uint32_t idx) const { return entity_ids_[idx]; }

    // Stored affinity, or 0 when the pair has no edge. Symmetric for
    // mention-mention pairs. Self-queries are rejected.
    double affinity(const MentionId& a, const MentionId& b) const {
        const std::uint32_t ia = mention_index(a);
        const std::uint32_t ib = mention_index(b);
        if (ia == ib) throw ContractError("self-loop affinity query on '" + a.value + "'");
        return mention_affinity(ia, ib);
    }
    double affinity(const MentionId& m, const EntityId& e) const {
        const std::uint32_t im = mention_index(m);
        const std::uint32_t ie = entity_index(e);
        return entity_affinity(im, ie);
    }
    double affinity(const MentionId& m, const NodeId& target) const {
        if (is_entity(target)) return affinity(m, std::get<EntityId>(target));
        return affinity(m, std::get<MentionId>(target));
    }

    // Index-based lookups used by the clustering algorithms.
    double mention_affinity(std::uint32_t a, std::uint32_t b) const {
        auto it = mm_scores_.find(pack_sorted(a, b));
        return it == mm_scores_.end() ? 0.0 : it->second;
    }
    double entity_affinity(std::uint32_t m, std::uint32_t e) const {
        auto it = me_scores_.find(pack(m, e));
        return it == me_scores_.end() ? 0.0 : it->second;
    }

    // Symmetrized mention adjacency and per-mention entity candidates,
    // each sorted by neighbor index.
    const std::vector<Neighbor>& mention_neighbors(std::uint32_t m) const { return mm_adj_[m]; }
    const std::vector<Neighbor>& entity_neighbors(std::uint32_t m) const { return me_adj_[m]; }

    // Per-source lists as retrieved/ingested (each <= k), for recall checks
    // and serialization.
    const std::vector<Neighbor>& sourced_mention_neighbors(std::uint32_t m) const {
        return sourced_mm_[m];
    }
    const std::vector<Neighbor>& sourced_entity_neighbors(std::uint32_t m) const {
        return sourced_me_[m];
    }

    // Edges exactly as stored (direction preserved), in deterministic order.
    std::vector<AffinityEdge> to_edges() const {
        std::vector<AffinityEdge> out;
        for (std::uint32_t m = 0; m < mention_ids_.size(); ++m) {
            for (const auto& [tgt, score] : sourced_mm_[m]) {
                out.push_back({mention_ids_[m], NodeId{mention_ids_[tgt]}, score});
            }
            for (const auto& [tgt, score] : sourced_me_[m]) {
                out.push_back({mention_ids_[m], NodeId{entity_ids_[tgt]}, score});
            }
        }
        return out;
    }

    // Edge-for-edge equality (stored sourced edges, exact scores).
    bool operator==(const AffinityGraph& other) const {
        return k_ == other.k_ && mention_ids_ == other.mention_ids_ &&
               entity_ids_ == other.entity_ids_ && sourced_mm_ == other.sourced_mm_ &&
               sourced_me_ == other.sourced_me_;
    }

private:
    friend class GraphBuilder;

    static std::uint64_t pack(std::uint32_t a, std::uint32_t b) {
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }
    static std::uint64_t pack_sorted(std::uint32_t a, std::uint32_t b) {
        return a < b ? pack(a, b) : pack(b, a);
    }
    static std::uint32_t unpack_hi(std::uint64_t key) {
        return static_cast<std::uint32_t>(key >> 32);
    }
    static std::uint32_t unpack_lo(std::uint64_t key) {
        return static_cast<std::uint32_t>(key & 0xffffffffu);
    }

    void build_index_maps() {
        mention_index_.reserve(mention_ids_.size());
        for (std::uint32_t i = 0; i < mention_ids_.size(); ++i) {
            mention_index_.emplace(mention_ids_[i].value, i);
        }
        entity_index_.reserve(entity_ids_.size());
        for (std::uint32_t i = 0; i < entity_ids_.size(); ++i) {
            entity_index_.emplace(entity_ids_[i].value, i);
        }
    }

    // Derives the canonical score maps and adjacency views from sourced edges.
    void finalize() {
        mm_scores_.clear();
        me_scores_.clear();
        for (std::uint32_t m = 0; m < sourced_mm_.size(); ++m) {
            for (const auto& [tgt, score] : sourced_mm_[m]) {
                auto [it, inserted] = mm_scores_.emplace(pack_sorted(m, tgt), score);
                if (!inserted) it->second = std::max(it->second, score);
            }
        }
        for (std::uint32_t m = 0; m < sourced_me_.size(); ++m) {
            for (const auto& [tgt, score] : sourced_me_[m]) {
                me_scores_.emplace(pack(m, tgt), score);
            }
        }

        mm_adj_.assign(mention_ids_.size(), {});
        for (const auto& [key, score] : mm_scores_) {
            mm_adj_[unpack_hi(key)].emplace_back(unpack_lo(key), score);
            mm_adj_[unpack_lo(key)].emplace_back(unpack_hi(key), score);
        }
        me_adj_.assign(mention_ids_.size(), {});
        for (const auto& [key, score] : me_scores_) {
            me_adj_[unpack_hi(key)].emplace_back(unpack_lo(key), score);
        }
        for (auto& adj : mm_adj_) std::sort(adj.begin(), adj.end());
        for (auto& adj : me_adj_) std::sort(adj.begin(), adj.end());
    }

    int k_ = 4;
    std::vector<MentionId> mention_ids_;  // sorted; index order == id order
    std::vector<EntityId> entity_ids_;
    std::unordered_map<std::string, std::uint32_t> mention_index_;
    std::unordered_map<std::string, std::uint32_t> entity_index_;

    std::vector<std::vector<Neighbor>> sourced_mm_;  // per source, <= k, sorted by target
    std::vector<std::vector<Neighbor>> sourced_me_;

    std::unordered_map<std::uint64_t, double> mm_scores_;  // canonical (lo,hi) -> max-merged
    std::unordered_map<std::uint64_t, double> me_scores_;
    std::vector<std::vector<Neighbor>> mm_adj_;
    std::vector<std::vector<Neighbor>> me_adj_;
};

// Assembles a graph from per-mention neighbor lists that are already top-k,
// bypassing re-truncation. Used by the kNN backends.
class GraphBuilder {
public:
    GraphBuilder(std::vector<MentionId> mentions, std::vector<EntityId> entities, int k) {
        if (k < 1) throw ConfigError("k must be >= 1");
        g_.k_ = k;
        g_.mention_ids_ = std::move(mentions);
        g_.entity_ids_ = std::move(entities);
        std::sort(g_.mention_ids_.begin(), g_.mention_ids_.end());
        std::sort(g_.entity_ids_.begin(), g_.entity_ids_.end());
        g_.build_index_maps();
        if (g_.mention_index_.size() != g_.mention_ids_.size() ||
            g_.entity_index_.size() != g_.entity_ids_.size()) {
            throw IngestError("duplicate ids in graph universe");
        }
        for (const auto& m : g_.mention_ids_) {
            if (g_.entity_index_.count(m.value)) {
                throw IngestError("id '" + m.value + "' used as both mention and entity");
            }
        }
        g_.sourced_mm_.assign(g_.mention_ids_.size(), {});
        g_.sourced_me_.assign(g_.mention_ids_.size(), {});
    }

    // Neighbor lists are (index, score) pairs with scores in (0,1].
    void set_neighbors(std::uint32_t mention, std::vector<AffinityGraph::Neighbor> mm,
                       std::vector<AffinityGraph::Neighbor> me) {
        std::sort(mm.begin(), mm.end());
        std::sort(me.begin(), me.end());
        g_.sourced_mm_[mention] = std::move(mm);
        g_.sourced_me_[mention] = std::move(me);
    }

    AffinityGraph finish() {
        g_.finalize();
        return std::move(g_);
    }

private:
    AffinityGraph g_;
};

}  // namespace nastylink
