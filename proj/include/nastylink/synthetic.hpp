#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "clustering.hpp"
#include "errors.hpp"
#include "types.hpp"

namespace nastylink {

struct SyntheticConfig {
    std::size_t n_entities = 500;
    double nil_fraction = 0.3;
    double mean_mentions_per_entity = 3.0;  // geometric distribution mean
    std::size_t dim = 64;
    double noise_sigma = 0.05;
    std::uint64_t seed = 42;

    void validate() const {
        if (n_entities == 0) throw ConfigError("n_entities must be positive");
        if (nil_fraction < 0.0 || nil_fraction > 1.0) {
            throw ConfigError("nil_fraction must lie in [0,1]");
        }
        if (mean_mentions_per_entity < 1.0) {
            throw ConfigError("mean_mentions_per_entity must be >= 1");
        }
        if (dim == 0) throw ConfigError("dim must be positive");
        if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
    }
};

struct SyntheticCorpus {
    std::vector<Mention> mentions;
    std::vector<Entity> entities;  // known catalog (NIL prototypes withheld)
    Clustering gold;               // mentions grouped by their gold identity
};

namespace detail {

// All draws go through explicit formulas on mt19937_64 output, so corpora are
// reproducible bit-for-bit from the seed alone.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

    double unit() {  // [0,1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - unit();  // (0,1]
        const double u2 = unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    // Geometric on {1,2,...} with mean mu.
    std::size_t geometric(double mu) {
        if (mu <= 1.0) return 1;
        const double p = 1.0 / mu;
        const double u = unit();
        const double x = 1.0 + std::floor(std::log1p(-u) / std::log1p(-p));
        return static_cast<std::size_t>(std::clamp(x, 1.0, 1e6));
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(gen_() % i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline std::string padded(const char* prefix, std::size_t i, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, i);
    return buf;
}

}  // namespace detail

// Entity prototypes drawn uniformly on the unit sphere; each entity spawns a
// geometric number of mentions as noisy copies of its prototype. A
// nil_fraction share of entities is withheld from the known catalog and their
// mentions become gold-NIL.
inline SyntheticCorpus generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    detail::SeededRng rng(config.seed);

    const std::size_t n = config.n_entities;
    std::vector<Vec> prototypes(n);
    for (auto& proto : prototypes) {
        proto.resize(config.dim);
        double norm2 = 0.0;
        for (double& x : proto) {
            x = rng.gaussian();
            norm2 += x * x;
        }
        const double norm = std::sqrt(norm2);
        if (norm > 0.0) {
            for (double& x : proto) x /= norm;
        } else {
            proto[0] = 1.0;
        }
    }

    std::vector<std::size_t> counts(n);
    for (auto& c : counts) c = rng.geometric(config.mean_mentions_per_entity);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    const auto nil_count = static_cast<std::size_t>(
        std::llround(config.nil_fraction * static_cast<double>(n)));
    std::vector<bool> is_nil(n, false);
    for (std::size_t i = 0; i < nil_count && i < n; ++i) is_nil[order[i]] = true;

    const int id_width = static_cast<int>(std::to_string(n * 32).size());
    SyntheticCorpus corpus;
    std::size_t mention_seq = 0;
    std::unordered_map<std::string, std::size_t> gold_cluster_index;

    for (std::size_t i = 0; i < n; ++i) {
        const std::string label = "entity " + std::to_string(i);
        GoldLabel gold = is_nil[i] ? GoldLabel::nil(detail::padded("n", i, id_width))
                                   : GoldLabel::known(detail::padded("e", i, id_width));
        if (!is_nil[i]) {
            Entity entity;
            entity.id = EntityId{gold.id};
            entity.label = label;
            entity.embedding = prototypes[i];
            entity.popularity = counts[i];
            corpus.entities.push_back(std::move(entity));
        }

        auto [git, ginserted] =
            gold_cluster_index.emplace(gold.id, corpus.gold.clusters.size());
        if (ginserted) {
            Cluster cluster;
            if (gold.is_known()) cluster.entity = EntityId{gold.id};
            corpus.gold.clusters.push_back(std::move(cluster));
        }

        for (std::size_t j = 0; j < counts[i]; ++j) {
            Mention mention;
            mention.id = MentionId{detail::padded("m", mention_seq++, id_width + 2)};
            mention.surface = label;
            if (config.noise_sigma == 0.0) {
                mention.embedding = prototypes[i];
            } else {
                Vec v = prototypes[i];
                for (double& x : v) x += config.noise_sigma * rng.gaussian();
                double norm2 = 0.0;
                for (double x : v) norm2 += x * x;
                const double norm = std::sqrt(norm2);
                if (norm > 0.0) {
                    for (double& x : v) x /= norm;
                }
                mention.embedding = std::move(v);
            }
            mention.gold = gold;
            corpus.gold.clusters[git->second].mentions.push_back(mention.id);
            corpus.mentions.push_back(std::move(mention));
        }
    }

    corpus.gold.canonicalize();
    return corpus;
}

}  // namespace nastylink
