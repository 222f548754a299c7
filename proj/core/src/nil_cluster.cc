#include "fofelink/nil_cluster.h"

#include <algorithm>
#include <map>

#include "fofelink/text.h"

namespace fofelink {

std::vector<NilCluster> cluster_nils(std::span<const Mention> nil_mentions) {
  std::map<std::string, std::vector<MentionKey>> groups;
  for (const Mention& m : nil_mentions) {
    groups[fold_case(m.surface)].push_back(key_of(m));
  }
  std::vector<NilCluster> out;
  out.reserve(groups.size());
  for (auto& [id, members] : groups) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    out.push_back({id, std::move(members)});
  }
  return out;
}

}  // namespace fofelink
