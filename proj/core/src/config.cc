#include "fofelink/config.h"

#include <charconv>
#include <cstdlib>
#include <functional>

#include "fofelink/binary_io.h"
#include "fofelink/errors.h"

namespace fofelink {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value +
                      "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" +
                    value + "'");
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(strip_comment(text.substr(pos, end - pos)));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError(where + "malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') {
        throw ConfigError(where + "unterminated string");
      }
      value = value.substr(1, value.size() - 2);
    }
    std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (!out.emplace(full, std::string(value)).second) {
      throw ConfigError(where + "duplicate key '" + full + "'");
    }
  }
  return out;
}

void PipelineConfig::validate() const {
  train.validate();
  if (synthesize) synth.validate();
  if (output_dir.empty()) throw ConfigError("paths.output_dir must not be empty");
  if (fuzzy.gram < 1) throw ConfigError("candidates.gram must be >= 1");
  if (!(fuzzy.floor >= 0.0 && fuzzy.floor <= 1.0)) {
    throw ConfigError("candidates.fuzzy_floor must lie in [0, 1]");
  }
  if (fuzzy.limit < 1) throw ConfigError("candidates.fuzzy_limit must be >= 1");
}

CandidateOptions PipelineConfig::candidate_options() const {
  CandidateOptions options;
  options.tau = train.tau;
  options.fuzzy_limit = fuzzy.limit;
  options.extensions.substring = substring_extension;
  options.extensions.country = country_extension;
  options.extensions.nominal = nominal_extension;
  for (const auto& [name, path] : dictionaries) {
    options.extensions.plugins.push_back(DictionaryExtension::load_tsv(name, path));
  }
  return options;
}

PipelineConfig parse_config(std::string_view text,
                            const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  const auto values = parse_key_values(text);
  const auto resolve = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };

  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"seed",
       [&](const auto& k, const auto& v) {
         cfg.seed = parse_integer<std::uint64_t>(k, v);
       }},
      {"paths.kb", [&](const auto&, const auto& v) { cfg.kb = resolve(v); }},
      {"paths.corpus", [&](const auto&, const auto& v) { cfg.corpus = resolve(v); }},
      {"paths.output_dir",
       [&](const auto&, const auto& v) { cfg.output_dir = resolve(v); }},
      {"split.heldout_every",
       [&](const auto& k, const auto& v) {
         cfg.heldout_every = parse_integer<std::size_t>(k, v);
       }},
      {"train.learning_rate",
       [&](const auto& k, const auto& v) { cfg.train.learning_rate = parse_real(k, v); }},
      {"train.epochs",
       [&](const auto& k, const auto& v) { cfg.train.epochs = parse_integer<int>(k, v); }},
      {"train.dropout",
       [&](const auto& k, const auto& v) { cfg.train.dropout = parse_real(k, v); }},
      {"train.hidden_width",
       [&](const auto& k, const auto& v) {
         cfg.train.hidden_width = parse_integer<std::size_t>(k, v);
       }},
      {"train.alpha_low",
       [&](const auto& k, const auto& v) { cfg.train.alphas.low = parse_real(k, v); }},
      {"train.alpha_high",
       [&](const auto& k, const auto& v) { cfg.train.alphas.high = parse_real(k, v); }},
      {"train.context_window",
       [&](const auto& k, const auto& v) {
         cfg.train.context_window = parse_integer<std::size_t>(k, v);
       }},
      {"train.max_grad_norm",
       [&](const auto& k, const auto& v) { cfg.train.max_grad_norm = parse_real(k, v); }},
      {"train.char_mode",
       [&](const auto& k, const auto& v) { cfg.train.char_mode = parse_bool(k, v); }},
      {"candidates.tau",
       [&](const auto& k, const auto& v) {
         cfg.train.tau = parse_integer<std::size_t>(k, v);
       }},
      {"candidates.gram",
       [&](const auto& k, const auto& v) {
         cfg.fuzzy.gram = parse_integer<std::uint32_t>(k, v);
       }},
      {"candidates.fuzzy_floor",
       [&](const auto& k, const auto& v) { cfg.fuzzy.floor = parse_real(k, v); }},
      {"candidates.fuzzy_limit",
       [&](const auto& k, const auto& v) {
         cfg.fuzzy.limit = parse_integer<std::uint32_t>(k, v);
       }},
      {"candidates.description_chars",
       [&](const auto& k, const auto& v) {
         cfg.fuzzy.description_chars = parse_integer<std::uint32_t>(k, v);
       }},
      {"candidates.description_window",
       [&](const auto& k, const auto& v) {
         cfg.fuzzy.description_window = parse_integer<std::uint32_t>(k, v);
       }},
      {"candidates.substring",
       [&](const auto& k, const auto& v) { cfg.substring_extension = parse_bool(k, v); }},
      {"candidates.country",
       [&](const auto& k, const auto& v) { cfg.country_extension = parse_bool(k, v); }},
      {"candidates.nominal",
       [&](const auto& k, const auto& v) { cfg.nominal_extension = parse_bool(k, v); }},
      {"synth.enabled",
       [&](const auto& k, const auto& v) { cfg.synthesize = parse_bool(k, v); }},
      {"synth.n_entities",
       [&](const auto& k, const auto& v) {
         cfg.synth.n_entities = parse_integer<std::size_t>(k, v);
       }},
      {"synth.n_docs",
       [&](const auto& k, const auto& v) {
         cfg.synth.n_docs = parse_integer<std::size_t>(k, v);
       }},
      {"synth.mentions_per_doc",
       [&](const auto& k, const auto& v) {
         cfg.synth.mentions_per_doc = parse_integer<std::size_t>(k, v);
       }},
      {"synth.ambiguity",
       [&](const auto& k, const auto& v) {
         cfg.synth.ambiguity = parse_integer<std::size_t>(k, v);
       }},
      {"synth.nil_fraction",
       [&](const auto& k, const auto& v) { cfg.synth.nil_fraction = parse_real(k, v); }},
      {"synth.link_density",
       [&](const auto& k, const auto& v) { cfg.synth.link_density = parse_real(k, v); }},
  };

  for (const auto& [key, value] : values) {
    if (key.starts_with("dictionaries.")) {
      cfg.dictionaries.emplace_back(key.substr(13), resolve(value));
      continue;
    }
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
  }
  set_seed(cfg, cfg.seed);
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

void set_seed(PipelineConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.train.seed = seed;
  config.synth.seed = seed;
}

void apply_seed_override(PipelineConfig& config) {
  const char* env = std::getenv("FOFE_LINK_SEED");
  if (!env || !*env) return;
  set_seed(config, parse_integer<std::uint64_t>("FOFE_LINK_SEED", env));
}

}  // namespace fofelink
