#include "fofelink/types.h"

namespace fofelink {

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::kPer: return "PER";
    case EntityType::kOrg: return "ORG";
    case EntityType::kGpe: return "GPE";
    case EntityType::kLoc: return "LOC";
    case EntityType::kFac: return "FAC";
  }
  return "PER";
}

std::optional<EntityType> parse_entity_type(std::string_view text) {
  for (EntityType type : kAllEntityTypes) {
    if (to_string(type) == text) return type;
  }
  return std::nullopt;
}

std::string_view to_string(MentionKind kind) {
  return kind == MentionKind::kNamed ? "named" : "nominal";
}

std::optional<MentionKind> parse_mention_kind(std::string_view text) {
  if (text == "named" || text == "NAM") return MentionKind::kNamed;
  if (text == "nominal" || text == "NOM") return MentionKind::kNominal;
  return std::nullopt;
}

}  // namespace fofelink
