#pragma once

// Knowledge base: entities with names, aliases, descriptions and outbound
// links, plus the lookup structures used by candidate generation:
//   - exact lookup over names and aliases (case-insensitive),
//   - a redirect / disambiguation table derived from aliases,
//   - a character n-gram inverted index rescored by edit similarity.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fofelink/types.h"

namespace fofelink {

struct KbEntity {
  std::string id;
  std::string name;
  EntityType type = EntityType::kPer;
  std::vector<std::string> aliases;
  std::string description;
  std::vector<std::string> links;  // outbound entity ids

  bool operator==(const KbEntity&) const = default;
};

// Keys are case-folded surfaces. An alias owned by exactly one entity is a
// redirect; a surface (name or alias) shared by two or more entities is a
// disambiguation set.
struct RedirectTable {
  std::map<std::string, std::string, std::less<>> redirects;
  std::map<std::string, std::vector<std::string>, std::less<>> disambiguation;
};

struct FuzzyOptions {
  std::uint32_t gram = 3;
  double floor = 0.5;
  std::uint32_t limit = 50;
  // Only this many leading characters of a description are indexed.
  std::uint32_t description_chars = 200;
  // Description text is indexed as token windows of 1..N tokens.
  std::uint32_t description_window = 3;
};

struct FuzzyHit {
  std::string entity_id;
  double similarity = 0.0;

  bool operator==(const FuzzyHit&) const = default;
};

// Which entity field produced an index key; ranks ties before the entity id.
enum class KeyField : std::uint8_t { kName = 0, kAlias = 1, kDescription = 2 };

class FuzzyIndex {
 public:
  struct Key {
    std::string text;  // case-folded
    std::uint32_t entity = 0;
    KeyField field = KeyField::kName;
  };

  struct Match {
    std::uint32_t entity = 0;
    double similarity = 0.0;
    KeyField field = KeyField::kName;
  };

  FuzzyIndex() = default;
  FuzzyIndex(std::vector<Key> keys, std::uint32_t gram);

  // Entities sharing at least one n-gram with `folded_query`, best key per
  // entity, filtered by `floor`. Unordered.
  std::vector<Match> candidates(std::string_view folded_query,
                                double floor) const;
  // Same result computed key by key, without the posting lists.
  std::vector<Match> scan(std::string_view folded_query, double floor) const;

  std::vector<std::string> grams(std::string_view folded) const;

  const std::vector<Key>& keys() const { return keys_; }
  const std::map<std::string, std::vector<std::uint32_t>, std::less<>>&
  postings() const {
    return postings_;
  }
  std::uint32_t gram() const { return gram_; }

  // Rebuilds from serialized parts, validating posting invariants.
  static FuzzyIndex restore(
      std::vector<Key> keys, std::uint32_t gram,
      std::map<std::string, std::vector<std::uint32_t>, std::less<>> postings,
      std::size_t entity_count);

 private:
  void prepare();

  std::uint32_t gram_ = 3;
  std::vector<Key> keys_;
  std::vector<std::u32string> key_points_;
  std::map<std::string, std::vector<std::uint32_t>, std::less<>> postings_;
};

// Immutable after construction; safe for concurrent readers.
class KbStore {
 public:
  KbStore() = default;

  // Validates and indexes. Entities are stored sorted by id. Throws
  // ValidationError on duplicate ids, empty names or dangling links.
  static KbStore from_entities(std::vector<KbEntity> entities,
                               FuzzyOptions options = {});
  static KbStore parse_jsonl(std::string_view text, FuzzyOptions options = {});
  static KbStore load_jsonl(const std::filesystem::path& path,
                            FuzzyOptions options = {});

  // Binary index: 8-byte magic, u16 version, tagged sections, little-endian.
  std::string serialize() const;
  static KbStore deserialize(std::string_view bytes);
  void save_index(const std::filesystem::path& path) const;
  static KbStore load_index(const std::filesystem::path& path);

  // Accepts either a binary index or a JSONL file (sniffed by magic).
  static KbStore load(const std::filesystem::path& path);

  std::size_t size() const { return entities_.size(); }
  bool empty() const { return entities_.empty(); }
  const std::vector<KbEntity>& entities() const { return entities_; }
  const KbEntity& entity(std::size_t ordinal) const { return entities_[ordinal]; }
  const KbEntity* find(std::string_view id) const;
  std::optional<std::size_t> ordinal(std::string_view id) const;
  const std::vector<std::uint32_t>& link_ordinals(std::size_t ordinal) const {
    return links_[ordinal];
  }

  const RedirectTable& redirects() const { return redirects_; }
  const FuzzyIndex& fuzzy_index() const { return fuzzy_; }
  const FuzzyOptions& fuzzy_options() const { return options_; }

  // Ids whose name or alias equals `surface` case-insensitively, unioned with
  // redirect and disambiguation hits. Sorted by id.
  std::vector<std::string> lookup_exact(std::string_view surface) const;

  // Ranked by similarity (desc), then key field (name, alias, description),
  // then entity id. At most `limit` hits, all >= the configured floor.
  std::vector<FuzzyHit> lookup_fuzzy(std::string_view surface,
                                     std::size_t limit) const;
  std::vector<FuzzyHit> lookup_fuzzy(std::string_view surface) const {
    return lookup_fuzzy(surface, options_.limit);
  }
  // Brute-force reference for lookup_fuzzy over every index key.
  std::vector<FuzzyHit> scan_fuzzy(std::string_view surface,
                                   std::size_t limit) const;

  // Number of entity descriptions containing the (folded) term.
  std::uint32_t document_frequency(std::string_view term) const;
  // ln(N / (1 + df)).
  double idf(std::string_view term) const;
  // Raw term count times idf over the full description, sorted by term.
  std::vector<std::pair<std::string, double>> description_tfidf(
      std::size_t ordinal) const;

 private:
  void build_derived();
  std::vector<FuzzyHit> rank(std::vector<FuzzyIndex::Match> matches,
                             std::size_t limit) const;

  FuzzyOptions options_;
  std::vector<KbEntity> entities_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::vector<std::uint32_t>, std::less<>> by_surface_;
  std::vector<std::vector<std::uint32_t>> links_;
  RedirectTable redirects_;
  FuzzyIndex fuzzy_;
  std::map<std::string, std::uint32_t, std::less<>> df_;
};

// One JSON object per entity, readable by KbStore::parse_jsonl.
std::string format_kb_jsonl(std::span<const KbEntity> entities);

}  // namespace fofelink
