#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "fofelink/binary_io.h"
#include "fofelink/config.h"
#include "fofelink/errors.h"

namespace fofelink {
namespace {

const std::filesystem::path kConfigs = std::filesystem::path(FOFELINK_DATA_DIR) / "configs";

TEST(KeyValues, SectionsCommentsAndQuotes) {
  const auto kv = parse_key_values(
      "seed = 7  # trailing\n"
      "[paths]\n"
      "kb = \"a # b.jsonl\"\n"
      "\n"
      "# whole line\n"
      "[train]\n"
      "epochs=3\n");
  EXPECT_EQ(kv.at("seed"), "7");
  EXPECT_EQ(kv.at("paths.kb"), "a # b.jsonl");
  EXPECT_EQ(kv.at("train.epochs"), "3");
  EXPECT_EQ(kv.size(), 3u);
}

TEST(KeyValues, SyntaxErrorsNameTheLine) {
  for (const char* text : {"seed 7", "[train\n", "x = \"open", "= 3", "a = 1\na = 2"}) {
    EXPECT_THROW(parse_key_values(text), ConfigError) << text;
  }
  try {
    parse_key_values("a = 1\n\nb");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, DefaultsAndOverrides) {
  const PipelineConfig cfg = parse_config(
      "seed = 9\n[train]\nlearning_rate = 0.05\nepochs = 2\nchar_mode = true\n"
      "[candidates]\ntau = 5\nsubstring = false\n[split]\nheldout_every = 0\n");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.train.seed, 9u);
  EXPECT_EQ(cfg.synth.seed, 9u);
  EXPECT_DOUBLE_EQ(cfg.train.learning_rate, 0.05);
  EXPECT_EQ(cfg.train.epochs, 2);
  EXPECT_TRUE(cfg.train.char_mode);
  EXPECT_DOUBLE_EQ(cfg.train.dropout, 0.5);
  EXPECT_EQ(cfg.heldout_every, 0u);
  const CandidateOptions opts = cfg.candidate_options();
  EXPECT_EQ(opts.tau, 5u);
  EXPECT_FALSE(opts.extensions.substring);
  EXPECT_TRUE(opts.extensions.country);
}

TEST(ParseConfig, UnknownKeyAndBadValues) {
  EXPECT_THROW(parse_config("[train]\nlearning_rat = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\nepochs = many\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\nchar_mode = yes\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\nlearning_rate = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\ndropout = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[train]\nalpha_low = 0.9\n"), ConfigError);
  EXPECT_THROW(parse_config("[candidates]\nfuzzy_floor = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("[synth]\nenabled = true\nnil_fraction = 1.5\n"), ConfigError);
}

TEST(ParseConfig, RelativePathsResolveAgainstBase) {
  const PipelineConfig cfg = parse_config(
      "[paths]\nkb = \"kb.jsonl\"\ncorpus = \"/abs/c.jsonl\"\n"
      "[dictionaries]\ntranslit = \"t.tsv\"\n",
      "/base");
  EXPECT_EQ(cfg.kb, std::filesystem::path("/base/kb.jsonl"));
  EXPECT_EQ(cfg.corpus, std::filesystem::path("/abs/c.jsonl"));
  ASSERT_EQ(cfg.dictionaries.size(), 1u);
  EXPECT_EQ(cfg.dictionaries[0].first, "translit");
  EXPECT_EQ(cfg.dictionaries[0].second, std::filesystem::path("/base/t.tsv"));
}

TEST(LoadConfig, ShippedSyntheticConfig) {
  const PipelineConfig cfg = load_config(kConfigs / "synthetic.toml");
  EXPECT_TRUE(cfg.synthesize);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.synth.n_entities, 500u);
  EXPECT_EQ(cfg.synth.n_docs, 200u);
  EXPECT_EQ(cfg.synth.ambiguity, 3u);
  EXPECT_DOUBLE_EQ(cfg.synth.nil_fraction, 0.2);
  EXPECT_DOUBLE_EQ(cfg.train.learning_rate, 0.1);
  EXPECT_EQ(cfg.train.epochs, 30);
  EXPECT_EQ(cfg.train.tau, 20u);
  EXPECT_DOUBLE_EQ(cfg.train.alphas.low, 0.5);
  EXPECT_DOUBLE_EQ(cfg.train.alphas.high, 0.9);
  EXPECT_EQ(cfg.output_dir, kConfigs / "out");
}

TEST(LoadConfig, MissingFileIsIoError) {
  EXPECT_THROW(load_config(kConfigs / "absent.toml"), IoError);
}

TEST(SeedOverride, EnvironmentVariable) {
  PipelineConfig cfg;
  ::setenv("FOFE_LINK_SEED", "123", 1);
  apply_seed_override(cfg);
  EXPECT_EQ(cfg.seed, 123u);
  EXPECT_EQ(cfg.train.seed, 123u);
  EXPECT_EQ(cfg.synth.seed, 123u);
  ::setenv("FOFE_LINK_SEED", "abc", 1);
  EXPECT_THROW(apply_seed_override(cfg), ConfigError);
  ::unsetenv("FOFE_LINK_SEED");
  apply_seed_override(cfg);
  EXPECT_EQ(cfg.seed, 123u);
}

}  // namespace
}  // namespace fofelink
