#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "ids.hpp"

namespace nastylink {

using Vec = std::vector<double>;

// Gold annotation for a mention: either a known KB entity or a NIL entity
// identifier living in its own namespace.
struct GoldLabel {
    enum class Kind { Known, Nil };

    Kind kind = Kind::Nil;
    std::string id;

    static GoldLabel known(std::string entity_id) { return {Kind::Known, std::move(entity_id)}; }
    static GoldLabel nil(std::string nil_id) { return {Kind::Nil, std::move(nil_id)}; }

    bool is_known() const { return kind == Kind::Known; }

    bool operator==(const GoldLabel&) const = default;
};

struct Mention {
    MentionId id;
    std::string surface;
    std::optional<std::string> context;
    std::optional<Vec> embedding;
    std::optional<GoldLabel> gold;
};

struct Entity {
    EntityId id;
    std::string label;
    std::optional<std::string> description;
    std::optional<Vec> embedding;
    std::uint64_t popularity = 0;  // in/out link count, used for tie-breaking
};

// Affinity thresholds. tau_m gates mention-mention edges during clustering,
// tau_e gates entity candidate selection, tau_a gates conflict-resolution
// edges and the NIL cut. Comparisons are strict (>) throughout.
struct Thresholds {
    double tau_m = 0.85;
    double tau_e = 0.9;
    double tau_a = 0.75;

    void validate() const {
        auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!in_unit(tau_m) || !in_unit(tau_e) || !in_unit(tau_a)) {
            throw ConfigError("thresholds must lie in [0,1]");
        }
    }
};

}  // namespace nastylink
