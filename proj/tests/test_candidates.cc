#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>

#include "fofelink/binary_io.h"
#include "fofelink/candidates.h"
#include "fofelink/errors.h"
#include "oracles.h"
#include "test_util.h"

namespace fofelink {
namespace {

using testing::entity;
using testing::mention;
using testing::oracle_distill;
using testing::random_doc;
using testing::RandomDoc;

const std::filesystem::path kFixtures = std::filesystem::path(FOFELINK_DATA_DIR) / "fixtures";

struct UnitedFixture {
  KbStore kb = KbStore::load_jsonl(kFixtures / "united_kb.jsonl");
  Document doc = load_corpus(kFixtures / "united_corpus.jsonl").at(0);
};

std::vector<std::string> ids(const std::vector<ScoredCandidate>& list) {
  std::vector<std::string> out;
  for (const ScoredCandidate& c : list) out.push_back(c.entity_id);
  return out;
}

TEST(UnitedFixture, RetrievesSevenCandidates) {
  UnitedFixture f;
  const auto lists = generate_candidates(f.doc, f.kb, {});
  ASSERT_EQ(lists.size(), 3u);
  EXPECT_EQ(ids(lists[0].candidates),
            (std::vector<std::string>{"boston_united_fc", "manchester_united_fc", "NIL"}));
  EXPECT_EQ(ids(lists[1].candidates),
            (std::vector<std::string>{"lincolnshire", "lincolnshire_regiment",
                                      "lincolnshire_illinois", "NIL"}));
  EXPECT_EQ(ids(lists[2].candidates),
            (std::vector<std::string>{"devon_white_footballer", "devon_white_baseball", "NIL"}));
}

TEST(UnitedFixture, GraphHasNoIntraMentionEdges) {
  UnitedFixture f;
  std::vector<RawCandidates> raw;
  for (const Mention& m : f.doc.mentions) {
    raw.push_back(generate_raw(extend_mention(m, f.doc, f.kb, {}), f.kb, 50));
  }
  const DocCandidateGraph g = build_graph(raw, f.kb);
  ASSERT_EQ(g.nodes().size(), 7u);
  std::set<std::pair<std::string, std::string>> named;
  for (const auto& [a, b] : g.edges()) {
    EXPECT_NE(g.nodes()[a].mention, g.nodes()[b].mention);
    named.emplace(std::min(g.nodes()[a].entity_id, g.nodes()[b].entity_id),
                  std::max(g.nodes()[a].entity_id, g.nodes()[b].entity_id));
  }
  // The regiment links to the county, but both compete for "Lincolnshire".
  const std::set<std::pair<std::string, std::string>> expected{
      {"boston_united_fc", "lincolnshire"},
      {"boston_united_fc", "devon_white_footballer"},
      {"devon_white_footballer", "lincolnshire"},
      {"boston_united_fc", "lincolnshire_regiment"},
  };
  EXPECT_EQ(named, expected);
}

TEST(UnitedFixture, ScoresAreEdgeCounts) {
  UnitedFixture f;
  const auto lists = generate_candidates(f.doc, f.kb, {});
  std::map<std::string, double> score;
  for (const auto& l : lists) {
    for (const auto& c : l.candidates) score[c.entity_id] = c.score;
  }
  EXPECT_EQ(score.at("boston_united_fc"), 3);
  EXPECT_EQ(score.at("manchester_united_fc"), 0);
  EXPECT_EQ(score.at("lincolnshire"), 2);
  EXPECT_EQ(score.at("lincolnshire_regiment"), 1);
  EXPECT_EQ(score.at("lincolnshire_illinois"), 0);
  EXPECT_EQ(score.at("devon_white_footballer"), 2);
  EXPECT_EQ(score.at("devon_white_baseball"), 0);
  EXPECT_EQ(score.at("NIL"), 0);
}

TEST(UnitedFixture, TauKeepsTopCandidatesPlusNil) {
  UnitedFixture f;
  CandidateOptions o;
  o.tau = 1;
  const auto lists = generate_candidates(f.doc, f.kb, o);
  EXPECT_EQ(ids(lists[0].candidates), (std::vector<std::string>{"boston_united_fc", "NIL"}));
  EXPECT_EQ(ids(lists[1].candidates), (std::vector<std::string>{"lincolnshire", "NIL"}));
  EXPECT_EQ(ids(lists[2].candidates),
            (std::vector<std::string>{"devon_white_footballer", "NIL"}));
}

TEST(Distill, ZeroTauIsConfigError) {
  DocCandidateGraph g(1);
  EXPECT_THROW(distill(g, 0), ConfigError);
}

TEST(Distill, EmptyDocumentAndEmptyMentions) {
  EXPECT_TRUE(distill(DocCandidateGraph(0), 5).empty());
  const auto lists = distill(DocCandidateGraph(2), 5);
  ASSERT_EQ(lists.size(), 2u);
  for (const auto& l : lists) EXPECT_EQ(ids(l), std::vector<std::string>{"NIL"});
}

TEST(Distill, TiesBreakBySimilarityThenId) {
  DocCandidateGraph g(1);
  g.add_node(0, "c", 0.7);
  g.add_node(0, "b", 0.9);
  g.add_node(0, "a", 0.7);
  EXPECT_EQ(ids(distill(g, 5)[0]), (std::vector<std::string>{"b", "a", "c", "NIL"}));
}

TEST(Graph, RejectsSelfIntraMentionAndDuplicateEdges) {
  DocCandidateGraph g(2);
  const auto a = g.add_node(0, "x", 1);
  const auto b = g.add_node(0, "y", 1);
  const auto c = g.add_node(1, "z", 1);
  EXPECT_FALSE(g.add_edge(a, a));
  EXPECT_FALSE(g.add_edge(a, b));
  EXPECT_TRUE(g.add_edge(a, c));
  EXPECT_FALSE(g.add_edge(c, a));
  EXPECT_TRUE(g.has_edge(c, a));
  EXPECT_THROW(g.add_node(2, "w", 1), ValidationError);
}

TEST(Distill, MatchesBruteForceOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const RandomDoc d = random_doc(rng);
    const std::size_t tau = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    EXPECT_EQ(distill(build_graph(d.raw, d.kb), tau), oracle_distill(d.raw, d.kb, tau))
        << "trial " << trial;
  }
}

TEST(Distill, GraphEdgesAreSymmetric) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomDoc d = random_doc(rng);
    const DocCandidateGraph g = build_graph(d.raw, d.kb);
    for (std::size_t a = 0; a < g.nodes().size(); ++a) {
      for (std::size_t b : g.neighbors(a)) EXPECT_TRUE(g.has_edge(b, a));
    }
  }
}

TEST(Distill, LargerTauKeepsPrefix) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const RandomDoc d = random_doc(rng);
    const DocCandidateGraph g = build_graph(d.raw, d.kb);
    const auto small = distill(g, 2);
    const auto large = distill(g, 6);
    for (std::size_t m = 0; m < small.size(); ++m) {
      ASSERT_LE(small[m].size(), large[m].size());
      for (std::size_t i = 0; i + 1 < small[m].size(); ++i) EXPECT_EQ(small[m][i], large[m][i]);
      for (std::size_t i = 1; i + 1 < large[m].size(); ++i) {
        EXPECT_GE(large[m][i - 1].score, large[m][i].score);
      }
    }
  }
}

KbStore extension_kb() {
  return KbStore::from_entities({
      entity("smith_jones", "Alice Smith-Jones", EntityType::kPer, {}, ""),
      entity("korea", "South Korea", EntityType::kGpe, {"Korea"}, ""),
      entity("acme", "Acme Widgets", EntityType::kOrg, {}, ""),
  });
}

Document extension_doc() {
  Document doc;
  doc.doc_id = "d";
  doc.text = "Alice Smith-Jones met Smith-Jones. Acme Widgets said the company grew.";
  doc.mentions = {mention(doc, 0, 17, EntityType::kPer), mention(doc, 22, 33, EntityType::kPer),
                  mention(doc, 35, 47, EntityType::kOrg),
                  mention(doc, 53, 64, EntityType::kOrg)};
  doc.mentions[3].kind = MentionKind::kNominal;
  return doc;
}

TEST(Extensions, SubstringExpandsToLongerMention) {
  const Document doc = extension_doc();
  const auto q = extend_mention(doc.mentions[1], doc, extension_kb(), {});
  EXPECT_EQ(q, (std::set<std::string>{"Alice Smith-Jones", "Smith-Jones"}));
  const auto none =
      extend_mention(doc.mentions[1], doc, extension_kb(), ExtensionOptions::disabled());
  EXPECT_EQ(none, std::set<std::string>{"Smith-Jones"});
}

TEST(Extensions, NominalTakesNearestNamedOfSameType) {
  const Document doc = extension_doc();
  ASSERT_EQ(doc.mentions[3].surface, "the company");
  const auto q = extend_mention(doc.mentions[3], doc, extension_kb(), {});
  EXPECT_EQ(q, (std::set<std::string>{"Acme Widgets", "the company"}));
}

TEST(Extensions, CountryAliasResolvesToCanonicalName) {
  Document doc;
  doc.doc_id = "d";
  doc.text = "Korea";
  doc.mentions = {mention(doc, 0, 5, EntityType::kGpe)};
  EXPECT_EQ(extend_mention(doc.mentions[0], doc, extension_kb(), {}),
            (std::set<std::string>{"Korea", "South Korea"}));
  doc.mentions[0].type = EntityType::kPer;
  EXPECT_EQ(extend_mention(doc.mentions[0], doc, extension_kb(), {}),
            std::set<std::string>{"Korea"});
}

TEST(Extensions, DictionaryPlugin) {
  auto dict = std::make_shared<DictionaryExtension>("translit");
  dict->add("Koreya", "South Korea");
  ExtensionOptions o;
  o.plugins.push_back(dict);
  Document doc;
  doc.doc_id = "d";
  doc.text = "koreya";
  doc.mentions = {mention(doc, 0, 6, EntityType::kGpe)};
  EXPECT_EQ(extend_mention(doc.mentions[0], doc, extension_kb(), o),
            (std::set<std::string>{"South Korea", "koreya"}));
}

TEST(Extensions, DictionaryTsvLoading) {
  const auto dir = std::filesystem::temp_directory_path() / "fofelink_test_dict";
  std::filesystem::create_directories(dir);
  write_file(dir / "ok.tsv", "# comment\nKoreya\tSouth Korea\n\nkoreya\tKorea\n");
  const auto dict = DictionaryExtension::load_tsv("t", dir / "ok.tsv");
  EXPECT_EQ(dict->size(), 1u);
  Mention m;
  m.surface = "KOREYA";
  EXPECT_EQ(dict->extend(m), (std::vector<std::string>{"South Korea", "Korea"}));
  write_file(dir / "bad.tsv", "Koreya South Korea\n");
  EXPECT_THROW(DictionaryExtension::load_tsv("t", dir / "bad.tsv"), ValidationError);
}

TEST(GenerateRaw, ExactHitsHaveSimilarityOne) {
  const KbStore kb = extension_kb();
  const RawCandidates raw = generate_raw({"korea"}, kb, 50);
  ASSERT_TRUE(raw.contains("korea"));
  EXPECT_EQ(raw.at("korea"), 1.0);
}

TEST(CandidateJsonl, RoundTrip) {
  UnitedFixture f;
  const auto lists = generate_candidates(f.doc, f.kb, {});
  EXPECT_EQ(parse_candidates(format_candidates(lists)), lists);
}

TEST(CandidateJsonl, RejectsListWithoutNil) {
  EXPECT_THROW(parse_candidates(R"({"doc_id":"d","start":0,"end":1,"type":"PER","candidates":[]})"),
               ValidationError);
  EXPECT_THROW(parse_candidates("{oops"), ValidationError);
}

}  // namespace
}  // namespace fofelink
