#pragma once

// Scoring: candidate recall, linking accuracy and mention-based CEAF.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fofelink/candidates.h"
#include "fofelink/corpus.h"

namespace fofelink {

// One line of the link output.
struct LinkRecord {
  Mention mention;  // gold fields are not written
  std::string entity_id;  // KB id or "NIL"
  std::optional<std::string> nil_cluster_id;
  double probability = 0.0;
  std::vector<std::pair<std::string, double>> candidates;  // id, probability

  bool operator==(const LinkRecord&) const = default;
};

std::string format_links(std::span<const LinkRecord> links);
std::vector<LinkRecord> parse_links(std::string_view jsonl);
std::vector<LinkRecord> load_links(const std::filesystem::path& path);
void save_links(const std::filesystem::path& path, std::span<const LinkRecord> links);

// Fraction of non-NIL gold mentions whose gold id is in their list. With no
// linkable mentions the recall is 1.
double candidate_recall(std::span<const CandidateList> lists);

// Fraction of positions where the prediction equals the gold label (nullopt
// gold and "NIL" prediction match). Throws ValidationError on a size
// mismatch. Empty input scores 1.
double linking_accuracy(std::span<const std::string> predictions,
                        std::span<const std::optional<std::string>> gold);

using Cluster = std::vector<MentionKey>;

struct CeafScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t overlap = 0;  // total aligned overlap
};

// Mention CEAF with phi(A, B) = |A n B| under the optimal one-to-one
// alignment. Both clusterings must partition the same mention set; throws
// ValidationError otherwise.
CeafScore ceaf_m(std::span<const Cluster> predicted, std::span<const Cluster> gold);

// Maximum-weight one-to-one assignment of a rectangular matrix (rows may be
// left unmatched when there are more rows than columns, and vice versa).
// Returns the column of each row, or -1.
struct Assignment {
  double total = 0.0;
  std::vector<long> row_to_col;
};
Assignment max_weight_assignment(const std::vector<std::vector<double>>& weight);

struct TypeBreakdown {
  std::size_t mentions = 0;
  std::size_t correct = 0;
  std::size_t linkable = 0;
  std::size_t covered = 0;
  double linking_accuracy = 0.0;
  double candidate_recall = 0.0;
};

struct EvalReport {
  double candidate_recall = 0.0;
  double linking_accuracy = 0.0;
  CeafScore ceaf;
  std::map<EntityType, TypeBreakdown> per_type;
  std::size_t mentions = 0;
  std::size_t gold_nils = 0;
  std::size_t predicted_nils = 0;
  std::size_t gold_clusters = 0;
  std::size_t predicted_clusters = 0;
};

// Gold clusters group mentions by gold id; gold NIL mentions use their
// gold_nil_cluster label or stay singletons. Predicted clusters group by
// linked id, and NIL links by nil_cluster_id. Candidate recall is measured on
// the candidate ids carried by each link record.
EvalReport evaluate(std::span<const Document> gold, std::span<const LinkRecord> links);

std::string format_report_json(const EvalReport& report);
std::string format_report_text(const EvalReport& report);

}  // namespace fofelink
