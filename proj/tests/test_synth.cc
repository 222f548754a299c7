#include <gtest/gtest.h>

#include <set>

#include "fofelink/errors.h"
#include "fofelink/synth.h"

namespace fofelink {
namespace {

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.n_entities = 60;
  s.n_docs = 20;
  return s;
}

TEST(Synthesize, Deterministic) {
  const SyntheticData a = synthesize(small_spec());
  const SyntheticData b = synthesize(small_spec());
  EXPECT_EQ(a.kb_jsonl(), b.kb_jsonl());
  EXPECT_EQ(a.corpus_jsonl(), b.corpus_jsonl());
  SyntheticSpec other = small_spec();
  other.seed = 43;
  EXPECT_NE(synthesize(other).corpus_jsonl(), a.corpus_jsonl());
}

TEST(Synthesize, OutputIsLoadable) {
  const SyntheticData d = synthesize(small_spec());
  const KbStore kb = KbStore::parse_jsonl(d.kb_jsonl());
  EXPECT_EQ(kb.size(), 60u);
  const auto docs = parse_corpus(d.corpus_jsonl());
  ASSERT_EQ(docs.size(), 20u);
  for (const Document& doc : docs) {
    EXPECT_EQ(doc.mentions.size(), 6u);
    for (const Mention& m : doc.mentions) {
      if (m.gold_id) EXPECT_NE(kb.find(*m.gold_id), nullptr);
    }
  }
}

TEST(Synthesize, NoNilMentionsWhenFractionIsZero) {
  SyntheticSpec s = small_spec();
  s.nil_fraction = 0.0;
  for (const Document& doc : synthesize(s).docs) {
    for (const Mention& m : doc.mentions) EXPECT_TRUE(m.gold_id.has_value());
  }
}

TEST(Synthesize, AmbiguityGroupsShareAnAlias) {
  const SyntheticData d = synthesize(small_spec());
  std::map<std::string, std::size_t> owners;
  for (const KbEntity& e : d.entities) {
    ASSERT_EQ(e.aliases.size(), 1u);
    ++owners[e.aliases[0]];
  }
  for (const auto& [alias, n] : owners) EXPECT_GE(n, 3u) << alias;
}

TEST(Synthesize, ZeroLinkDensityMeansNoLinks) {
  SyntheticSpec s = small_spec();
  s.link_density = 0.0;
  for (const KbEntity& e : synthesize(s).entities) EXPECT_TRUE(e.links.empty());
}

TEST(Synthesize, ShortFormsFollowTheirFullName) {
  const SyntheticData d = synthesize(small_spec());
  for (const Document& doc : d.docs) {
    for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
      const Mention& m = doc.mentions[i];
      if (!m.gold_id) continue;
      bool full_seen = false;
      for (std::size_t j = 0; j <= i; ++j) {
        const Mention& o = doc.mentions[j];
        if (o.gold_id == m.gold_id && o.surface.find(' ') != std::string::npos) full_seen = true;
      }
      EXPECT_TRUE(full_seen) << doc.doc_id << " " << m.surface;
    }
  }
}

TEST(Synthesize, InvalidSpec) {
  SyntheticSpec s;
  s.n_entities = 0;
  EXPECT_THROW(synthesize(s), ConfigError);
  s = SyntheticSpec{};
  s.link_density = -0.1;
  EXPECT_THROW(synthesize(s), ConfigError);
}

}  // namespace
}  // namespace fofelink
