#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fofelink/types.h"

namespace fofelink {

// A detected entity mention. Offsets are code point offsets into the
// document text; `surface` is the corresponding slice.
struct Mention {
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  EntityType type = EntityType::kPer;
  MentionKind kind = MentionKind::kNamed;
  // Gold KB id; nullopt means the gold answer is NIL.
  std::optional<std::string> gold_id;
  // Optional gold NIL cluster label, used for clustering evaluation.
  std::optional<std::string> gold_nil_cluster;

  bool operator==(const Mention&) const = default;
};

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<Mention> mentions;

  bool operator==(const Document&) const = default;
};

// Identifies a mention across files.
struct MentionKey {
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;

  auto operator<=>(const MentionKey&) const = default;
};

inline MentionKey key_of(const Mention& m) { return {m.doc_id, m.start, m.end}; }

// Checks offsets and surface against the text; throws ValidationError.
void validate_document(const Document& doc);

// Corpus JSONL: one document per line,
//   {"doc_id", "text", "mentions": [{"start", "end", "type", "kind",
//    "gold_entity_id": id|null, "gold_nil_cluster"?: string}]}
// Mentions are sorted by (start, end) on load.
std::vector<Document> parse_corpus(std::string_view jsonl);
std::vector<Document> load_corpus(const std::filesystem::path& path);
std::string format_corpus(const std::vector<Document>& docs);
void save_corpus(const std::filesystem::path& path,
                 const std::vector<Document>& docs);

}  // namespace fofelink
