#pragma once

// Candidate generation: mention extensions, parallel KB lookups and
// graph-based distillation to the top-tau candidates per mention.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fofelink/corpus.h"
#include "fofelink/kb.h"

namespace fofelink {

struct ScoredCandidate {
  std::string entity_id;
  double score = 0.0;       // distillation (co-occurrence) score
  double similarity = 0.0;  // best surface similarity seen during retrieval

  bool is_nil() const { return entity_id == kNilId; }
  bool operator==(const ScoredCandidate&) const = default;
};

// Up to tau KB candidates with non-increasing scores, then the NIL
// pseudo-candidate as the final entry.
struct CandidateList {
  Mention mention;
  std::vector<ScoredCandidate> candidates;
  bool includes_nil = true;

  bool contains(std::string_view entity_id) const;
  bool operator==(const CandidateList&) const = default;
};

// Maps a mention to extra query surfaces (translation, transliteration...).
class ExtensionPlugin {
 public:
  virtual ~ExtensionPlugin() = default;
  virtual std::string_view name() const = 0;
  virtual std::vector<std::string> extend(const Mention& mention) const = 0;
};

// Static dictionary plugin. Lookup keys are case-folded surfaces.
class DictionaryExtension final : public ExtensionPlugin {
 public:
  explicit DictionaryExtension(std::string name) : name_(std::move(name)) {}

  // Tab-separated "surface<TAB>replacement" lines; '#' starts a comment.
  static std::shared_ptr<DictionaryExtension> load_tsv(
      std::string name, const std::filesystem::path& path);

  void add(std::string_view surface, std::string replacement);
  std::string_view name() const override { return name_; }
  std::vector<std::string> extend(const Mention& mention) const override;
  std::size_t size() const { return entries_.size(); }

 private:
  std::string name_;
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

struct ExtensionOptions {
  bool substring = true;
  bool country = true;
  bool nominal = true;
  std::vector<std::shared_ptr<const ExtensionPlugin>> plugins;

  static ExtensionOptions disabled() {
    return ExtensionOptions{false, false, false, {}};
  }
};

// Original surface plus every applicable extension.
std::set<std::string> extend_mention(const Mention& mention, const Document& doc,
                                     const KbStore& kb,
                                     const ExtensionOptions& options);

// Entity id -> best similarity over all queries and strategies.
using RawCandidates = std::map<std::string, double>;

// Union of fuzzy search, redirect/disambiguation lookup and exact name lookup
// over every query; exact hits have similarity 1.
RawCandidates generate_raw(const std::set<std::string>& queries,
                           const KbStore& kb, std::size_t fuzzy_limit);

struct GraphNode {
  std::size_t mention = 0;
  std::string entity_id;
  double similarity = 0.0;
};

// Nodes are (mention, candidate) pairs; undirected edges join candidates of
// different mentions whose KB entries link to each other in either direction.
class DocCandidateGraph {
 public:
  explicit DocCandidateGraph(std::size_t mention_count)
      : mention_count_(mention_count) {}

  std::size_t add_node(std::size_t mention, std::string entity_id,
                       double similarity);
  // Returns false for self edges, intra-mention edges and duplicates.
  bool add_edge(std::size_t a, std::size_t b);

  std::size_t mention_count() const { return mention_count_; }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  // Sorted (lower, higher) node index pairs.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  const std::vector<std::size_t>& neighbors(std::size_t node) const {
    return adjacency_[node];
  }
  bool has_edge(std::size_t a, std::size_t b) const;

 private:
  std::size_t mention_count_;
  std::vector<GraphNode> nodes_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

DocCandidateGraph build_graph(std::span<const RawCandidates> per_mention,
                              const KbStore& kb);

// Scores each candidate by its edge count to candidates of other mentions,
// keeps the top tau (ties: higher similarity, then id) and appends NIL.
std::vector<std::vector<ScoredCandidate>> distill(const DocCandidateGraph& graph,
                                                  std::size_t tau);

struct CandidateOptions {
  std::size_t tau = 20;
  std::size_t fuzzy_limit = 50;
  ExtensionOptions extensions;
};

std::vector<CandidateList> generate_candidates(const Document& doc,
                                               const KbStore& kb,
                                               const CandidateOptions& options);

// Candidate JSONL: one mention per line.
std::string format_candidates(std::span<const CandidateList> lists);
std::vector<CandidateList> parse_candidates(std::string_view jsonl);
std::vector<CandidateList> load_candidates(const std::filesystem::path& path);
void save_candidates(const std::filesystem::path& path,
                     std::span<const CandidateList> lists);

}  // namespace fofelink
