#pragma once

#include <cstdint>
#include <string>

namespace kgrag {

// What an embedded or indexed item refers to.
enum class ItemKind : std::uint8_t {
    Entity = 0,
    Relation = 1,
    Triple = 2,
    Question = 3,
};

inline const char* to_string(ItemKind k) {
    switch (k) {
        case ItemKind::Entity: return "entity";
        case ItemKind::Relation: return "relation";
        case ItemKind::Triple: return "triple";
        case ItemKind::Question: return "question";
    }
    return "?";
}

// Orientation of a traversed edge relative to the stored triple.
// Outgoing: walked head -> tail. Incoming: walked tail -> head.
enum class Direction : std::uint8_t {
    Outgoing = 0,
    Incoming = 1,
};

inline const char* to_string(Direction d) {
    return d == Direction::Outgoing ? "out" : "in";
}

// One binary attribute-matching question: does source_attr correspond to
// target_attr? label is the ground truth (1 = match).
struct MatchQuestion {
    std::string question_id;
    std::string source_attr;   // "table-attribute"
    std::string target_attr;   // "table-attribute"
    std::string desc_source;
    std::string desc_target;
    int label = 0;             // 0 or 1
};

}  // namespace kgrag
