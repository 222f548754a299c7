#include "fofelink/candidates.h"

#include <algorithm>
#include <limits>
#include <sstream>

#include "fofelink/binary_io.h"
#include "fofelink/errors.h"
#include "fofelink/text.h"
#include "json.hpp"

namespace fofelink {

bool CandidateList::contains(std::string_view entity_id) const {
  return std::any_of(candidates.begin(), candidates.end(),
                     [&](const ScoredCandidate& c) { return c.entity_id == entity_id; });
}

// ---------------------------------------------------------------------------
// Extensions

std::shared_ptr<DictionaryExtension> DictionaryExtension::load_tsv(
    std::string name, const std::filesystem::path& path) {
  auto dict = std::make_shared<DictionaryExtension>(std::move(name));
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 'surface<TAB>replacement'");
    }
    dict->add(line.substr(0, tab), line.substr(tab + 1));
  }
  return dict;
}

void DictionaryExtension::add(std::string_view surface, std::string replacement) {
  auto& targets = entries_[fold_case(surface)];
  if (std::find(targets.begin(), targets.end(), replacement) == targets.end()) {
    targets.push_back(std::move(replacement));
  }
}

std::vector<std::string> DictionaryExtension::extend(const Mention& mention) const {
  auto it = entries_.find(fold_case(mention.surface));
  if (it == entries_.end()) return {};
  return it->second;
}

namespace {

bool is_token_subsequence(const std::vector<std::string>& needle,
                          const std::vector<std::string>& haystack) {
  if (needle.empty() || needle.size() >= haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

std::size_t span_distance(const Mention& a, const Mention& b) {
  if (b.end <= a.start) return a.start - b.end;
  if (b.start >= a.end) return b.start - a.end;
  return 0;
}

}  // namespace

std::set<std::string> extend_mention(const Mention& mention, const Document& doc,
                                     const KbStore& kb,
                                     const ExtensionOptions& options) {
  std::set<std::string> queries{mention.surface};

  if (options.substring) {
    const std::vector<std::string> tokens = tokenize_words(mention.surface);
    for (const Mention& other : doc.mentions) {
      if (other.kind != MentionKind::kNamed || key_of(other) == key_of(mention)) {
        continue;
      }
      if (is_token_subsequence(tokens, tokenize_words(other.surface))) {
        queries.insert(other.surface);
      }
    }
  }

  if (options.country && mention.type == EntityType::kGpe) {
    const auto& redirects = kb.redirects().redirects;
    if (auto it = redirects.find(fold_case(mention.surface)); it != redirects.end()) {
      if (const KbEntity* target = kb.find(it->second)) queries.insert(target->name);
    }
  }

  if (options.nominal && mention.kind == MentionKind::kNominal) {
    const Mention* nearest = nullptr;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (const Mention& other : doc.mentions) {
      if (other.kind != MentionKind::kNamed || other.type != mention.type ||
          key_of(other) == key_of(mention)) {
        continue;
      }
      const std::size_t d = span_distance(mention, other);
      if (d < best || (d == best && nearest && other.start < nearest->start)) {
        best = d;
        nearest = &other;
      }
    }
    if (nearest) queries.insert(nearest->surface);
  }

  for (const auto& plugin : options.plugins) {
    for (std::string& s : plugin->extend(mention)) queries.insert(std::move(s));
  }
  return queries;
}

RawCandidates generate_raw(const std::set<std::string>& queries,
                           const KbStore& kb, std::size_t fuzzy_limit) {
  RawCandidates out;
  const auto keep = [&](const std::string& id, double sim) {
    auto [it, inserted] = out.emplace(id, sim);
    if (!inserted) it->second = std::max(it->second, sim);
  };
  for (const std::string& query : queries) {
    for (const FuzzyHit& hit : kb.lookup_fuzzy(query, fuzzy_limit)) {
      keep(hit.entity_id, hit.similarity);
    }
    for (const std::string& id : kb.lookup_exact(query)) keep(id, 1.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph

std::size_t DocCandidateGraph::add_node(std::size_t mention, std::string entity_id,
                                        double similarity) {
  if (mention >= mention_count_) {
    throw ValidationError("graph node references mention " +
                          std::to_string(mention) + " of " +
                          std::to_string(mention_count_));
  }
  nodes_.push_back({mention, std::move(entity_id), similarity});
  adjacency_.emplace_back();
  return nodes_.size() - 1;
}

bool DocCandidateGraph::has_edge(std::size_t a, std::size_t b) const {
  const auto& adj = adjacency_.at(a);
  return std::find(adj.begin(), adj.end(), b) != adj.end();
}

bool DocCandidateGraph::add_edge(std::size_t a, std::size_t b) {
  if (a == b || nodes_.at(a).mention == nodes_.at(b).mention || has_edge(a, b)) {
    return false;
  }
  adjacency_[a].push_back(b);
  adjacency_[b].push_back(a);
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> DocCandidateGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t a = 0; a < adjacency_.size(); ++a) {
    for (std::size_t b : adjacency_[a]) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

DocCandidateGraph build_graph(std::span<const RawCandidates> per_mention,
                              const KbStore& kb) {
  DocCandidateGraph graph(per_mention.size());
  // Entity ordinal -> nodes carrying it.
  std::map<std::size_t, std::vector<std::size_t>> nodes_by_entity;
  std::vector<std::optional<std::size_t>> ordinals;
  for (std::size_t m = 0; m < per_mention.size(); ++m) {
    for (const auto& [id, sim] : per_mention[m]) {
      const std::size_t node = graph.add_node(m, id, sim);
      const auto ord = kb.ordinal(id);
      ordinals.push_back(ord);
      if (ord) nodes_by_entity[*ord].push_back(node);
    }
  }
  for (std::size_t node = 0; node < graph.nodes().size(); ++node) {
    if (!ordinals[node]) continue;
    for (std::uint32_t target : kb.link_ordinals(*ordinals[node])) {
      auto it = nodes_by_entity.find(target);
      if (it == nodes_by_entity.end()) continue;
      for (std::size_t other : it->second) graph.add_edge(node, other);
    }
  }
  return graph;
}

std::vector<std::vector<ScoredCandidate>> distill(const DocCandidateGraph& graph,
                                                  std::size_t tau) {
  if (tau == 0) throw ConfigError("distillation factor tau must be >= 1");
  std::vector<std::vector<ScoredCandidate>> lists(graph.mention_count());
  for (std::size_t node = 0; node < graph.nodes().size(); ++node) {
    const GraphNode& n = graph.nodes()[node];
    // No intra-mention edges exist, so the degree is the sum over other
    // mentions of the per-mention edge counts.
    const double score = static_cast<double>(graph.neighbors(node).size());
    lists[n.mention].push_back({n.entity_id, score, n.similarity});
  }
  for (auto& list : lists) {
    std::sort(list.begin(), list.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                if (a.score != b.score) return a.score > b.score;
                if (a.similarity != b.similarity) return a.similarity > b.similarity;
                return a.entity_id < b.entity_id;
              });
    if (list.size() > tau) list.resize(tau);
    list.push_back({std::string(kNilId), 0.0, 0.0});
  }
  return lists;
}

std::vector<CandidateList> generate_candidates(const Document& doc,
                                               const KbStore& kb,
                                               const CandidateOptions& options) {
  std::vector<RawCandidates> raw;
  raw.reserve(doc.mentions.size());
  for (const Mention& m : doc.mentions) {
    raw.push_back(generate_raw(extend_mention(m, doc, kb, options.extensions), kb,
                               options.fuzzy_limit));
  }
  const DocCandidateGraph graph = build_graph(raw, kb);
  std::vector<std::vector<ScoredCandidate>> distilled = distill(graph, options.tau);
  std::vector<CandidateList> out;
  out.reserve(doc.mentions.size());
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    out.push_back({doc.mentions[i], std::move(distilled[i]), true});
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSONL

std::string format_candidates(std::span<const CandidateList> lists) {
  std::string out;
  for (const CandidateList& list : lists) {
    const Mention& m = list.mention;
    nlohmann::ordered_json obj;
    obj["doc_id"] = m.doc_id;
    obj["start"] = m.start;
    obj["end"] = m.end;
    obj["surface"] = m.surface;
    obj["type"] = std::string(to_string(m.type));
    obj["kind"] = std::string(to_string(m.kind));
    obj["gold_entity_id"] =
        m.gold_id ? nlohmann::ordered_json(*m.gold_id) : nlohmann::ordered_json();
    if (m.gold_nil_cluster) obj["gold_nil_cluster"] = *m.gold_nil_cluster;
    nlohmann::ordered_json cands = nlohmann::ordered_json::array();
    for (const ScoredCandidate& c : list.candidates) {
      nlohmann::ordered_json jc;
      jc["id"] = c.entity_id;
      jc["score"] = c.score;
      jc["similarity"] = c.similarity;
      cands.push_back(std::move(jc));
    }
    obj["candidates"] = std::move(cands);
    obj["includes_nil"] = list.includes_nil;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<CandidateList> parse_candidates(std::string_view jsonl) {
  std::vector<CandidateList> lists;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "candidates line " + std::to_string(line_no) + ": ";
    try {
      const nlohmann::json obj = nlohmann::json::parse(line);
      CandidateList list;
      Mention& m = list.mention;
      m.doc_id = obj.at("doc_id").get<std::string>();
      m.start = obj.at("start").get<std::size_t>();
      m.end = obj.at("end").get<std::size_t>();
      m.surface = obj.value("surface", std::string());
      const auto type = parse_entity_type(obj.at("type").get<std::string>());
      const auto kind = parse_mention_kind(obj.value("kind", std::string("named")));
      if (!type || !kind) throw ValidationError(where + "bad type or kind");
      m.type = *type;
      m.kind = *kind;
      if (auto it = obj.find("gold_entity_id"); it != obj.end() && !it->is_null()) {
        m.gold_id = it->get<std::string>();
        if (*m.gold_id == kNilId) m.gold_id.reset();
      }
      if (auto it = obj.find("gold_nil_cluster"); it != obj.end() && !it->is_null()) {
        m.gold_nil_cluster = it->get<std::string>();
      }
      for (const auto& jc : obj.at("candidates")) {
        list.candidates.push_back({jc.at("id").get<std::string>(),
                                   jc.value("score", 0.0),
                                   jc.value("similarity", 0.0)});
      }
      list.includes_nil = obj.value("includes_nil", true);
      if (list.candidates.empty() || !list.candidates.back().is_nil()) {
        throw ValidationError(where + "candidate list must end with NIL");
      }
      lists.push_back(std::move(list));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    }
  }
  return lists;
}

std::vector<CandidateList> load_candidates(const std::filesystem::path& path) {
  return parse_candidates(read_file(path));
}

void save_candidates(const std::filesystem::path& path,
                     std::span<const CandidateList> lists) {
  write_file(path, format_candidates(lists));
}

}  // namespace fofelink
