#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "ids.hpp"

namespace nastylink {

// A cluster of mentions, optionally anchored to one known entity. During
// initialization `candidates` may hold several entities; conflict resolution
// reduces every cluster to at most one (`entity`).
struct Cluster {
    std::vector<MentionId> mentions;
    std::vector<EntityId> candidates;
    std::optional<EntityId> entity;

    bool operator==(const Cluster&) const = default;
};

// A partition of the mention set.
struct Clustering {
    std::vector<Cluster> clusters;
    std::unordered_map<MentionId, std::size_t> assignment;

    // Sorts mentions within clusters and clusters by their smallest mention,
    // then rebuilds the assignment map. All pipeline outputs are canonical,
    // which is what makes identical inputs yield byte-identical files.
    void canonicalize() {
        for (auto& c : clusters) {
            std::sort(c.mentions.begin(), c.mentions.end());
            std::sort(c.candidates.begin(), c.candidates.end());
        }
        std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
            return a.mentions.front() < b.mentions.front();
        });
        assignment.clear();
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (const auto& m : clusters[i].mentions) assignment.emplace(m, i);
        }
    }

    // Every cluster non-empty and every mention in exactly one cluster.
    void check_partition() const {
        std::size_t total = 0;
        for (const auto& c : clusters) {
            if (c.mentions.empty()) throw ContractError("empty cluster in partition");
            total += c.mentions.size();
        }
        if (total != assignment.size()) {
            throw ContractError("clusters overlap or assignment is out of sync");
        }
    }

    bool operator==(const Clustering& other) const { return clusters == other.clusters; }
};

// Stable per-cluster output labels: the entity id for entity clusters,
// "NIL_<n>" for NIL clusters numbered in canonical cluster order.
inline std::vector<std::string> cluster_labels(const Clustering& clustering) {
    std::vector<std::string> labels;
    labels.reserve(clustering.clusters.size());
    std::size_t nil_seq = 0;
    for (const auto& c : clustering.clusters) {
        if (c.entity.has_value()) {
            labels.push_back(c.entity->value);
        } else {
            labels.push_back("NIL_" + std::to_string(nil_seq++));
        }
    }
    return labels;
}

}  // namespace nastylink
