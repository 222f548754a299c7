#pragma once

#include <span>
#include <string>
#include <vector>

#include "fofelink/corpus.h"

namespace fofelink {

struct NilCluster {
  std::string cluster_id;  // case-folded surface
  std::vector<MentionKey> members;

  bool operator==(const NilCluster&) const = default;
};

// Groups mentions whose surfaces are equal after full Unicode case folding.
// Clusters are sorted by id and members by key, so the result does not
// depend on input order.
std::vector<NilCluster> cluster_nils(std::span<const Mention> nil_mentions);

}  // namespace fofelink
