#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fofelink/nil_cluster.h"
#include "fofelink/text.h"

namespace fofelink {
namespace {

std::vector<Mention> mentions(const std::vector<std::string>& surfaces) {
  std::vector<Mention> out;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    Mention m;
    m.doc_id = "d" + std::to_string(i % 3);
    m.start = i * 10;
    m.end = i * 10 + 5;
    m.surface = surfaces[i];
    out.push_back(std::move(m));
  }
  return out;
}

TEST(ClusterNils, CaseInsensitiveExactMatch) {
  const auto c = cluster_nils(mentions({"Trump", "trump", "TRUMP"}));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].cluster_id, "trump");
  EXPECT_EQ(c[0].members.size(), 3u);
}

TEST(ClusterNils, NoSubstringMerging) {
  const auto c = cluster_nils(mentions({"Trump", "Donald Trump"}));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].cluster_id, "donald trump");
  EXPECT_EQ(c[1].cluster_id, "trump");
}

TEST(ClusterNils, EmptyInput) { EXPECT_TRUE(cluster_nils({}).empty()); }

TEST(ClusterNils, FullCaseFolding) {
  const auto c = cluster_nils(mentions({"STRASSE", "Straße", "strasse"}));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].members.size(), 3u);
}

TEST(ClusterNils, PartitionAndOrderIndependence) {
  std::mt19937_64 rng(9);
  const std::vector<std::string> pool{"Ann", "ANN", "Bob", "bob", "Cy", "Ann Lee", "ΣΟΦΙΑ",
                                      "σοφια"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> surfaces;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 12)(rng);
    for (std::size_t i = 0; i < n; ++i) {
      surfaces.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
    }
    std::vector<Mention> input = mentions(surfaces);
    const auto clusters = cluster_nils(input);

    std::set<MentionKey> seen;
    std::size_t total = 0;
    for (const NilCluster& c : clusters) {
      EXPECT_FALSE(c.members.empty());
      for (const MentionKey& k : c.members) {
        EXPECT_TRUE(seen.insert(k).second);
        ++total;
      }
    }
    EXPECT_EQ(total, input.size());
    for (const Mention& m : input) {
      const auto it = std::find_if(clusters.begin(), clusters.end(), [&](const NilCluster& c) {
        return std::find(c.members.begin(), c.members.end(), key_of(m)) != c.members.end();
      });
      ASSERT_NE(it, clusters.end());
      EXPECT_EQ(it->cluster_id, fold_case(m.surface));
    }
    EXPECT_TRUE(std::is_sorted(clusters.begin(), clusters.end(),
                               [](const NilCluster& a, const NilCluster& b) {
                                 return a.cluster_id < b.cluster_id;
                               }));

    std::shuffle(input.begin(), input.end(), rng);
    EXPECT_EQ(cluster_nils(input), clusters);
  }
}

}  // namespace
}  // namespace fofelink
