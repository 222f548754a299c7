#pragma once

// Pipeline configuration read from a small TOML-like file:
//
//   # comment
//   seed = 42
//   [paths]
//   kb = "kb.jsonl"
//   [train]
//   learning_rate = 0.1
//
// Keys are "section.key"; values are numbers, booleans or (optionally
// quoted) strings. Relative paths resolve against the config file's folder.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fofelink/candidates.h"
#include "fofelink/kb.h"
#include "fofelink/ranker.h"
#include "fofelink/synth.h"

namespace fofelink {

// Flat "section.key" -> raw value map. Throws ConfigError with a line number
// on syntax errors or duplicate keys.
std::map<std::string, std::string> parse_key_values(std::string_view text);

struct PipelineConfig {
  std::filesystem::path kb;      // KB JSONL or binary index
  std::filesystem::path corpus;  // corpus JSONL
  std::filesystem::path output_dir = "out";
  // Generate kb and corpus into output_dir instead of reading them.
  bool synthesize = false;
  SyntheticSpec synth;

  TrainConfig train;
  FuzzyOptions fuzzy;
  bool substring_extension = true;
  bool country_extension = true;
  bool nominal_extension = true;
  // (plugin name, TSV dictionary path)
  std::vector<std::pair<std::string, std::filesystem::path>> dictionaries;

  // Every heldout_every-th document (1-based) is held out for evaluation;
  // 0 trains and evaluates on everything.
  std::size_t heldout_every = 5;
  std::uint64_t seed = 42;

  // Range checks; throws ConfigError.
  void validate() const;
  CandidateOptions candidate_options() const;
};

// Builds a config from key/value text. Unknown keys are an error.
PipelineConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// Applies FOFE_LINK_SEED when set; throws ConfigError if it is not an integer.
void apply_seed_override(PipelineConfig& config);

// Sets the shared seed on every component.
void set_seed(PipelineConfig& config, std::uint64_t seed);

}  // namespace fofelink
