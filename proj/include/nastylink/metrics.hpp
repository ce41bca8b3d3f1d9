#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "assignment.hpp"
#include "clustering.hpp"
#include "errors.hpp"
#include "types.hpp"

namespace nastylink {

enum class EvalMode { FullGold, Pca };

struct SegmentScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
    // Segment had no gold items and no predictions; metrics are reported as
    // 1.0 so reports stay NaN-free, with this flag raised.
    bool empty = false;
    // NMI/ARI are meaningful (false for NIL/micro under PCA gold).
    bool clustering_defined = true;
};

struct EvalReport {
    SegmentScores known;
    SegmentScores nil;
    SegmentScores micro;
    // Injective map, predicted NIL-cluster label -> gold NIL-entity id.
    std::vector<std::pair<std::string, std::string>> nil_mapping;
};

using GoldView = std::unordered_map<MentionId, GoldLabel>;

inline GoldView gold_view(std::span<const Mention> mentions) {
    GoldView gold;
    gold.reserve(mentions.size());
    for (const auto& m : mentions) {
        if (m.gold.has_value()) gold.emplace(m.id, *m.gold);
    }
    return gold;
}

// Optimal one-to-one mapping from predicted NIL clusters to gold NIL
// entities, maximizing the number of correctly mapped mentions. Zero-overlap
// pairings are dropped. Keys are indices into clustering.clusters.
inline std::unordered_map<std::size_t, std::string> optimal_nil_mapping(
    const Clustering& clustering, const GoldView& gold) {
    std::vector<std::size_t> nil_clusters;
    for (std::size_t i = 0; i < clustering.clusters.size(); ++i) {
        if (!clustering.clusters[i].entity.has_value()) nil_clusters.push_back(i);
    }
    std::vector<std::string> nil_ids;
    std::unordered_map<std::string, std::size_t> nil_id_index;
    for (const auto& c : clustering.clusters) {
        for (const auto& m : c.mentions) {
            auto it = gold.find(m);
            if (it == gold.end() || it->second.is_known()) continue;
            if (nil_id_index.emplace(it->second.id, nil_ids.size()).second) {
                nil_ids.push_back(it->second.id);
            }
        }
    }
    if (nil_clusters.empty() || nil_ids.empty()) return {};

    std::vector<std::vector<std::int64_t>> overlap(nil_clusters.size(),
                                                   std::vector<std::int64_t>(nil_ids.size(), 0));
    for (std::size_t row = 0; row < nil_clusters.size(); ++row) {
        for (const auto& m : clustering.clusters[nil_clusters[row]].mentions) {
            auto it = gold.find(m);
            if (it == gold.end() || it->second.is_known()) continue;
            ++overlap[row][nil_id_index.at(it->second.id)];
        }
    }

    const std::vector<std::int64_t> row_to_col = max_assignment(overlap);
    std::unordered_map<std::size_t, std::string> mapping;
    for (std::size_t row = 0; row < nil_clusters.size(); ++row) {
        const std::int64_t col = row_to_col[row];
        if (col >= 0 && overlap[row][static_cast<std::size_t>(col)] > 0) {
            mapping.emplace(nil_clusters[row], nil_ids[static_cast<std::size_t>(col)]);
        }
    }
    return mapping;
}

namespace detail {

inline double safe_ratio(std::size_t numerator, std::size_t denominator) {
    return denominator == 0 ? 0.0 : static_cast<double>(numerator) /
                                        static_cast<double>(denominator);
}

inline double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace detail

// Normalized mutual information of two labelings, normalized by the
// arithmetic mean of the entropies. Both labelings trivial -> 1.0.
inline double nmi_score(std::span<const int> a, std::span<const int> b) {
    const std::size_t n = a.size();
    if (n == 0) return 1.0;
    std::unordered_map<int, std::size_t> ca, cb;
    std::unordered_map<std::uint64_t, std::size_t> joint;
    for (std::size_t i = 0; i < n; ++i) {
        ++ca[a[i]];
        ++cb[b[i]];
        ++joint[(static_cast<std::uint64_t>(static_cast<std::uint32_t>(a[i])) << 32) |
                static_cast<std::uint32_t>(b[i])];
    }
    auto entropy = [n](const std::unordered_map<int, std::size_t>& counts) {
        double h = 0.0;
        for (const auto& [label, c] : counts) {
            const double p = static_cast<double>(c) / static_cast<double>(n);
            h -= p * std::log(p);
        }
        return h;
    };
    const double ha = entropy(ca);
    const double hb = entropy(cb);
    if (ha == 0.0 && hb == 0.0) return 1.0;  // single cluster vs single class

    double mi = 0.0;
    for (const auto& [key, c] : joint) {
        const auto la = static_cast<int>(key >> 32);
        const auto lb = static_cast<int>(key & 0xffffffffu);
        const double pij = static_cast<double>(c) / static_cast<double>(n);
        const double pa = static_cast<double>(ca.at(la)) / static_cast<double>(n);
        const double pb = static_cast<double>(cb.at(lb)) / static_cast<double>(n);
        mi += pij * std::log(pij / (pa * pb));
    }
    return std::clamp(mi / ((ha + hb) / 2.0), 0.0, 1.0);
}

// Adjusted Rand index. Degenerate contingencies (both labelings trivial in
// the same way) yield 1.0.
inline double ari_score(std::span<const int> a, std::span<const int> b) {
    const std::size_t n = a.size();
    if (n == 0) return 1.0;
    std::unordered_map<int, std::int64_t> ca, cb;
    std::unordered_map<std::uint64_t, std::int64_t> joint;
    for (std::size_t i = 0; i < n; ++i) {
        ++ca[a[i]];
        ++cb[b[i]];
        ++joint[(static_cast<std::uint64_t>(static_cast<std::uint32_t>(a[i])) << 32) |
                static_cast<std::uint32_t>(b[i])];
    }
    auto choose2 = [](std::int64_t c) { return static_cast<double>(c) * (c - 1) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, c] : joint) sum_ij += choose2(c);
    for (const auto& [label, c] : ca) sum_a += choose2(c);
    for (const auto& [label, c] : cb) sum_b += choose2(c);
    const double pairs = choose2(static_cast<std::int64_t>(n));
    const double expected = pairs == 0.0 ? 0.0 : sum_a * sum_b / pairs;
    const double maximum = (sum_a + sum_b) / 2.0;
    if (maximum - expected == 0.0) return 1.0;
    return (sum_ij - expected) / (maximum - expected);
}

// Per-segment precision/recall/F1 against gold labels under a NIL-cluster
// mapping. In PCA mode NIL identities are unknown: a NIL-cluster assignment
// counts as abstention, any entity prediction for a gold-NIL mention is
// incorrect, and only the known and micro segments are meaningful.
inline EvalReport classification_metrics(
    const Clustering& clustering, const GoldView& gold,
    const std::unordered_map<std::size_t, std::string>& mapping, EvalMode mode) {
    EvalReport report;

    std::size_t gold_known = 0, gold_nil = 0;
    std::size_t pred_known = 0, pred_known_on_gold_known = 0, pred_nil = 0;
    std::size_t correct_known = 0, correct_nil = 0;

    for (std::size_t ci = 0; ci < clustering.clusters.size(); ++ci) {
        const Cluster& cluster = clustering.clusters[ci];
        const auto mapped = mapping.find(ci);
        for (const auto& m : cluster.mentions) {
            auto it = gold.find(m);
            if (it == gold.end()) {
                throw ContractError("mention '" + m.value + "' has no gold label");
            }
            const GoldLabel& g = it->second;
            if (g.is_known()) {
                ++gold_known;
            } else {
                ++gold_nil;
            }
            if (cluster.entity.has_value()) {
                ++pred_known;
                if (g.is_known()) {
                    ++pred_known_on_gold_known;
                    if (g.id == cluster.entity->value) ++correct_known;
                }
            } else {
                ++pred_nil;
                if (!g.is_known() && mapped != mapping.end() && mapped->second == g.id) {
                    ++correct_nil;
                }
            }
        }
    }

    using detail::f1_of;
    using detail::safe_ratio;

    auto fill = [](SegmentScores& s, std::size_t correct, std::size_t p_den, std::size_t r_den) {
        s.empty = (p_den == 0 && r_den == 0);
        if (s.empty) {
            s.precision = s.recall = s.f1 = 1.0;
            return;
        }
        s.precision = safe_ratio(correct, p_den);
        s.recall = safe_ratio(correct, r_den);
        s.f1 = f1_of(s.precision, s.recall);
    };

    if (mode == EvalMode::FullGold) {
        fill(report.known, correct_known, pred_known, gold_known);
        fill(report.nil, correct_nil, pred_nil, gold_nil);
        const std::size_t total = gold_known + gold_nil;
        fill(report.micro, correct_known + correct_nil, total, total);
    } else {
        fill(report.known, correct_known, pred_known_on_gold_known, gold_known);
        report.nil.empty = true;
        report.nil.precision = report.nil.recall = report.nil.f1 = 1.0;
        report.nil.clustering_defined = false;
        fill(report.micro, correct_known, pred_known, gold_known);
        report.micro.clustering_defined = false;
    }
    return report;
}

// Full evaluation: optimal NIL mapping, classification metrics, and NMI/ARI
// per segment.
inline EvalReport evaluate(const Clustering& clustering, std::span<const Mention> mentions,
                           EvalMode mode = EvalMode::FullGold) {
    const GoldView gold = gold_view(mentions);
    for (const auto& m : mentions) {
        if (!gold.count(m.id)) {
            throw ContractError("mention '" + m.id.value + "' has no gold label");
        }
        if (!clustering.assignment.count(m.id)) {
            throw ContractError("mention '" + m.id.value + "' missing from the clustering");
        }
    }

    const auto mapping =
        mode == EvalMode::FullGold ? optimal_nil_mapping(clustering, gold)
                                   : std::unordered_map<std::size_t, std::string>{};
    EvalReport report = classification_metrics(clustering, gold, mapping, mode);

    const auto labels = cluster_labels(clustering);
    for (std::size_t ci = 0; ci < clustering.clusters.size(); ++ci) {
        auto it = mapping.find(ci);
        if (it != mapping.end()) report.nil_mapping.emplace_back(labels[ci], it->second);
    }

    // Label vectors for the clustering metrics: predicted label = cluster
    // index (clusters repeating an entity stay separate clusters), gold label
    // = interned gold id.
    std::unordered_map<std::string, int> gold_interner;
    auto intern = [&gold_interner](const std::string& s) {
        return gold_interner.emplace(s, static_cast<int>(gold_interner.size())).first->second;
    };
    std::vector<int> pred_known, gold_known_v, pred_nil, gold_nil_v, pred_all, gold_all;
    for (const auto& m : mentions) {
        const GoldLabel& g = gold.at(m.id);
        const int pred = static_cast<int>(clustering.assignment.at(m.id));
        const int truth = intern((g.is_known() ? "k:" : "n:") + g.id);
        pred_all.push_back(pred);
        gold_all.push_back(truth);
        if (g.is_known()) {
            pred_known.push_back(pred);
            gold_known_v.push_back(truth);
        } else {
            pred_nil.push_back(pred);
            gold_nil_v.push_back(truth);
        }
    }

    auto set_clustering_scores = [](SegmentScores& s, std::span<const int> pred,
                                    std::span<const int> truth) {
        if (!s.clustering_defined) {
            s.nmi = s.ari = 1.0;
            return;
        }
        s.nmi = nmi_score(pred, truth);
        s.ari = ari_score(pred, truth);
    };
    set_clustering_scores(report.known, pred_known, gold_known_v);
    set_clustering_scores(report.nil, pred_nil, gold_nil_v);
    set_clustering_scores(report.micro, pred_all, gold_all);
    return report;
}

}  // namespace nastylink
