#include "fofelink/eval.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fofelink/binary_io.h"
#include "fofelink/errors.h"

namespace fofelink {

namespace {

double fraction(std::size_t num, std::size_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string key_string(const MentionKey& k) {
  return k.doc_id + ":" + std::to_string(k.start) + "-" + std::to_string(k.end);
}

// Rejects empty clusters and duplicated mentions; returns the mention set.
std::set<MentionKey> check_partition(std::span<const Cluster> clusters,
                                     const char* which) {
  std::set<MentionKey> seen;
  for (const Cluster& c : clusters) {
    if (c.empty()) {
      throw ValidationError(std::string(which) + " clustering has an empty cluster");
    }
    for (const MentionKey& k : c) {
      if (!seen.insert(k).second) {
        throw ValidationError(std::string(which) + " clustering lists mention " +
                              key_string(k) + " twice");
      }
    }
  }
  return seen;
}

}  // namespace

// ---------------------------------------------------------------------------
// Link records

std::string format_links(std::span<const LinkRecord> links) {
  std::string out;
  for (const LinkRecord& r : links) {
    const Mention& m = r.mention;
    nlohmann::ordered_json obj;
    obj["doc_id"] = m.doc_id;
    obj["start"] = m.start;
    obj["end"] = m.end;
    obj["surface"] = m.surface;
    obj["type"] = std::string(to_string(m.type));
    obj["kind"] = std::string(to_string(m.kind));
    obj["entity_id"] = r.entity_id;
    obj["nil_cluster_id"] = r.nil_cluster_id ? nlohmann::ordered_json(*r.nil_cluster_id)
                                             : nlohmann::ordered_json();
    obj["probability"] = r.probability;
    nlohmann::ordered_json cands = nlohmann::ordered_json::array();
    for (const auto& [id, p] : r.candidates) {
      cands.push_back({{"id", id}, {"probability", p}});
    }
    obj["candidates"] = std::move(cands);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<LinkRecord> parse_links(std::string_view jsonl) {
  std::vector<LinkRecord> links;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "links line " + std::to_string(line_no) + ": ";
    try {
      const nlohmann::json obj = nlohmann::json::parse(line);
      LinkRecord r;
      Mention& m = r.mention;
      m.doc_id = obj.at("doc_id").get<std::string>();
      m.start = obj.at("start").get<std::size_t>();
      m.end = obj.at("end").get<std::size_t>();
      m.surface = obj.value("surface", std::string());
      const auto type = parse_entity_type(obj.at("type").get<std::string>());
      const auto kind = parse_mention_kind(obj.value("kind", std::string("named")));
      if (!type || !kind) throw ValidationError(where + "bad type or kind");
      m.type = *type;
      m.kind = *kind;
      r.entity_id = obj.at("entity_id").get<std::string>();
      if (auto it = obj.find("nil_cluster_id"); it != obj.end() && !it->is_null()) {
        r.nil_cluster_id = it->get<std::string>();
      }
      r.probability = obj.value("probability", 0.0);
      if (auto it = obj.find("candidates"); it != obj.end()) {
        for (const auto& c : *it) {
          r.candidates.emplace_back(c.at("id").get<std::string>(),
                                    c.value("probability", 0.0));
        }
      }
      links.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    }
  }
  return links;
}

std::vector<LinkRecord> load_links(const std::filesystem::path& path) {
  return parse_links(read_file(path));
}

void save_links(const std::filesystem::path& path,
                std::span<const LinkRecord> links) {
  write_file(path, format_links(links));
}

// ---------------------------------------------------------------------------
// Metrics

double candidate_recall(std::span<const CandidateList> lists) {
  std::size_t linkable = 0;
  std::size_t covered = 0;
  for (const CandidateList& list : lists) {
    if (!list.mention.gold_id) continue;
    ++linkable;
    if (list.contains(*list.mention.gold_id)) ++covered;
  }
  return fraction(covered, linkable);
}

double linking_accuracy(std::span<const std::string> predictions,
                        std::span<const std::optional<std::string>> gold) {
  if (predictions.size() != gold.size()) {
    throw ValidationError("linking_accuracy: " + std::to_string(predictions.size()) +
                          " predictions for " + std::to_string(gold.size()) +
                          " gold mentions");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::string_view g = gold[i] ? std::string_view(*gold[i]) : kNilId;
    if (predictions[i] == g) ++correct;
  }
  return fraction(correct, gold.size());
}

Assignment max_weight_assignment(const std::vector<std::vector<double>>& weight) {
  const std::size_t rows = weight.size();
  const std::size_t cols = rows == 0 ? 0 : weight[0].size();
  for (const auto& r : weight) {
    if (r.size() != cols) throw ValidationError("assignment matrix is ragged");
  }
  Assignment result;
  result.row_to_col.assign(rows, -1);
  if (rows == 0 || cols == 0) return result;

  // Hungarian method (potentials form) minimizing -weight on an n x m matrix
  // with n <= m; transpose when there are more rows than columns.
  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;
  const std::size_t m = transposed ? rows : cols;
  const auto cost = [&](std::size_t i, std::size_t j) {
    return transposed ? -weight[j][i] : -weight[i][j];
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    const std::size_t i = p[j] - 1;
    const std::size_t col = j - 1;
    if (transposed) {
      result.row_to_col[col] = static_cast<long>(i);
      result.total += weight[col][i];
    } else {
      result.row_to_col[i] = static_cast<long>(col);
      result.total += weight[i][col];
    }
  }
  return result;
}

CeafScore ceaf_m(std::span<const Cluster> predicted, std::span<const Cluster> gold) {
  const std::set<MentionKey> pred_set = check_partition(predicted, "predicted");
  const std::set<MentionKey> gold_set = check_partition(gold, "gold");
  if (pred_set != gold_set) {
    throw ValidationError("predicted and gold clusterings cover different mentions");
  }
  std::map<MentionKey, std::size_t> gold_of;
  for (std::size_t g = 0; g < gold.size(); ++g) {
    for (const MentionKey& k : gold[g]) gold_of[k] = g;
  }
  std::vector<std::vector<double>> overlap(predicted.size(),
                                           std::vector<double>(gold.size(), 0.0));
  for (std::size_t p = 0; p < predicted.size(); ++p) {
    for (const MentionKey& k : predicted[p]) overlap[p][gold_of.at(k)] += 1.0;
  }
  CeafScore score;
  const double total = max_weight_assignment(overlap).total;
  score.overlap = static_cast<std::size_t>(std::llround(total));
  if (pred_set.empty()) {
    score.precision = score.recall = score.f1 = 1.0;
    return score;
  }
  score.precision = total / static_cast<double>(pred_set.size());
  score.recall = total / static_cast<double>(gold_set.size());
  score.f1 = score.precision + score.recall > 0.0
                 ? 2.0 * score.precision * score.recall /
                       (score.precision + score.recall)
                 : 0.0;
  return score;
}

// ---------------------------------------------------------------------------
// Report

EvalReport evaluate(std::span<const Document> gold, std::span<const LinkRecord> links) {
  std::map<MentionKey, const LinkRecord*> by_key;
  for (const LinkRecord& r : links) {
    if (!by_key.emplace(key_of(r.mention), &r).second) {
      throw ValidationError("duplicate prediction for mention " +
                            key_string(key_of(r.mention)));
    }
  }

  EvalReport report;
  std::vector<std::string> predictions;
  std::vector<std::optional<std::string>> gold_labels;
  std::map<std::string, Cluster> gold_clusters;
  std::map<std::string, Cluster> pred_clusters;
  std::size_t linkable = 0;
  std::size_t covered = 0;
  std::size_t matched = 0;
  for (const Document& doc : gold) {
    for (const Mention& m : doc.mentions) {
      const MentionKey key = key_of(m);
      auto it = by_key.find(key);
      if (it == by_key.end()) {
        throw ValidationError("no prediction for mention " + key_string(key));
      }
      ++matched;
      const LinkRecord& r = *it->second;
      predictions.push_back(r.entity_id);
      gold_labels.push_back(m.gold_id);

      TypeBreakdown& t = report.per_type[m.type];
      ++t.mentions;
      const std::string_view g = m.gold_id ? std::string_view(*m.gold_id) : kNilId;
      if (r.entity_id == g) ++t.correct;
      if (m.gold_id) {
        ++linkable;
        ++t.linkable;
        const bool in_list = std::any_of(
            r.candidates.begin(), r.candidates.end(),
            [&](const auto& c) { return c.first == *m.gold_id; });
        if (in_list) {
          ++covered;
          ++t.covered;
        }
        gold_clusters["E:" + *m.gold_id].push_back(key);
      } else {
        ++report.gold_nils;
        gold_clusters[m.gold_nil_cluster ? "N:" + *m.gold_nil_cluster
                                         : "S:" + key_string(key)]
            .push_back(key);
      }
      if (r.entity_id == kNilId) {
        ++report.predicted_nils;
        pred_clusters[r.nil_cluster_id ? "N:" + *r.nil_cluster_id
                                       : "S:" + key_string(key)]
            .push_back(key);
      } else {
        pred_clusters["E:" + r.entity_id].push_back(key);
      }
    }
  }
  if (matched != links.size()) {
    throw ValidationError(std::to_string(links.size()) + " predictions for " +
                          std::to_string(matched) + " gold mentions");
  }

  report.mentions = matched;
  report.linking_accuracy = linking_accuracy(predictions, gold_labels);
  report.candidate_recall = fraction(covered, linkable);
  for (auto& [type, t] : report.per_type) {
    t.linking_accuracy = fraction(t.correct, t.mentions);
    t.candidate_recall = fraction(t.covered, t.linkable);
  }
  std::vector<Cluster> pc;
  std::vector<Cluster> gc;
  for (auto& [id, c] : pred_clusters) pc.push_back(std::move(c));
  for (auto& [id, c] : gold_clusters) gc.push_back(std::move(c));
  report.predicted_clusters = pc.size();
  report.gold_clusters = gc.size();
  report.ceaf = ceaf_m(pc, gc);
  return report;
}

namespace {
constexpr const char* kReportNote =
    "NERLC is not reproduced; linking accuracy and a per-type breakdown are "
    "reported instead.";
}

std::string format_report_json(const EvalReport& r) {
  nlohmann::ordered_json obj;
  obj["note"] = kReportNote;
  obj["candidate_recall"] = r.candidate_recall;
  obj["linking_accuracy"] = r.linking_accuracy;
  obj["ceaf_m"] = {{"precision", r.ceaf.precision},
                   {"recall", r.ceaf.recall},
                   {"f1", r.ceaf.f1}};
  nlohmann::ordered_json types = nlohmann::ordered_json::object();
  for (const auto& [type, t] : r.per_type) {
    types[std::string(to_string(type))] = {
        {"mentions", t.mentions},
        {"correct", t.correct},
        {"linking_accuracy", t.linking_accuracy},
        {"linkable", t.linkable},
        {"covered", t.covered},
        {"candidate_recall", t.candidate_recall}};
  }
  obj["per_type"] = std::move(types);
  obj["counts"] = {{"mentions", r.mentions},
                   {"gold_nils", r.gold_nils},
                   {"predicted_nils", r.predicted_nils},
                   {"gold_clusters", r.gold_clusters},
                   {"predicted_clusters", r.predicted_clusters}};
  return obj.dump(2) + "\n";
}

std::string format_report_text(const EvalReport& r) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  out << "# " << kReportNote << "\n";
  out << "candidate_recall   " << r.candidate_recall << "\n";
  out << "linking_accuracy   " << r.linking_accuracy << "\n";
  out << "ceaf_m  P " << r.ceaf.precision << "  R " << r.ceaf.recall << "  F1 "
      << r.ceaf.f1 << "\n";
  out << "mentions " << r.mentions << "  gold_nils " << r.gold_nils
      << "  predicted_nils " << r.predicted_nils << "  gold_clusters "
      << r.gold_clusters << "  predicted_clusters " << r.predicted_clusters << "\n";
  out << "type  mentions  accuracy  recall\n";
  for (const auto& [type, t] : r.per_type) {
    out << to_string(type) << "  " << t.mentions << "  " << t.linking_accuracy
        << "  " << t.candidate_recall << "\n";
  }
  return out.str();
}

}  // namespace fofelink
