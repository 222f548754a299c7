#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fofelink {

enum class EntityType { kPer, kOrg, kGpe, kLoc, kFac };

enum class MentionKind { kNamed, kNominal };

// Reserved candidate id for "no KB entry".
inline constexpr std::string_view kNilId = "NIL";

std::string_view to_string(EntityType type);
std::optional<EntityType> parse_entity_type(std::string_view text);

std::string_view to_string(MentionKind kind);
std::optional<MentionKind> parse_mention_kind(std::string_view text);

inline constexpr EntityType kAllEntityTypes[] = {
    EntityType::kPer, EntityType::kOrg, EntityType::kGpe, EntityType::kLoc,
    EntityType::kFac};

}  // namespace fofelink
