#pragma once

#include <compare>
#include <functional>
#include <string>
#include <variant>

namespace nastylink {

// Opaque identifier with a phantom tag so mention and entity ids cannot be
// mixed up at compile time. Ordering is lexicographic on the raw value; all
// deterministic tie-breaks in the pipeline use this order.
template <class Tag>
struct Id {
    std::string value;

    Id() = default;
    explicit Id(std::string v) : value(std::move(v)) {}

    auto operator<=>(const Id&) const = default;
};

using MentionId = Id<struct MentionIdTag>;
using EntityId = Id<struct EntityIdTag>;

// Edge targets are either another mention or a known entity.
using NodeId = std::variant<MentionId, EntityId>;

inline const std::string& raw(const NodeId& n) {
    return std::visit([](const auto& id) -> const std::string& { return id.value; }, n);
}

inline bool is_entity(const NodeId& n) { return std::holds_alternative<EntityId>(n); }

}  // namespace nastylink

template <class Tag>
struct std::hash<nastylink::Id<Tag>> {
    size_t operator()(const nastylink::Id<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.value);
    }
};
