#include "fofelink/corpus.h"

#include <algorithm>
#include <set>

#include "fofelink/binary_io.h"
#include "fofelink/errors.h"
#include "fofelink/text.h"
#include "json.hpp"

namespace fofelink {

void validate_document(const Document& doc) {
  const std::size_t length = code_point_length(doc.text);
  std::set<std::pair<std::size_t, std::size_t>> spans;
  for (const Mention& m : doc.mentions) {
    if (!(m.start < m.end && m.end <= length)) {
      throw ValidationError("document '" + doc.doc_id + "': mention span [" +
                            std::to_string(m.start) + ", " +
                            std::to_string(m.end) + ") outside text of length " +
                            std::to_string(length));
    }
    if (slice_code_points(doc.text, m.start, m.end) != m.surface) {
      throw ValidationError("document '" + doc.doc_id + "': mention surface '" +
                            m.surface + "' does not match text slice");
    }
    if (m.doc_id != doc.doc_id) {
      throw ValidationError("mention doc_id '" + m.doc_id +
                            "' does not match document '" + doc.doc_id + "'");
    }
    if (!spans.emplace(m.start, m.end).second) {
      throw ValidationError("document '" + doc.doc_id + "': duplicate mention span");
    }
  }
}

std::vector<Document> parse_corpus(std::string_view jsonl) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "corpus line " + std::to_string(line_no) + ": ";

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(where + "malformed JSON: " + e.what());
    }
    try {
      Document doc;
      doc.doc_id = obj.at("doc_id").get<std::string>();
      doc.text = obj.at("text").get<std::string>();
      if (!seen.insert(doc.doc_id).second) {
        throw ValidationError(where + "duplicate doc_id '" + doc.doc_id + "'");
      }
      for (const auto& jm : obj.value("mentions", nlohmann::json::array())) {
        Mention m;
        m.doc_id = doc.doc_id;
        m.start = jm.at("start").get<std::size_t>();
        m.end = jm.at("end").get<std::size_t>();
        const std::string type = jm.at("type").get<std::string>();
        const auto parsed_type = parse_entity_type(type);
        if (!parsed_type) throw ValidationError(where + "unknown type '" + type + "'");
        m.type = *parsed_type;
        const std::string kind = jm.value("kind", std::string("named"));
        const auto parsed_kind = parse_mention_kind(kind);
        if (!parsed_kind) throw ValidationError(where + "unknown kind '" + kind + "'");
        m.kind = *parsed_kind;
        if (auto it = jm.find("gold_entity_id"); it != jm.end() && !it->is_null()) {
          m.gold_id = it->get<std::string>();
          if (*m.gold_id == kNilId) m.gold_id.reset();
        }
        if (auto it = jm.find("gold_nil_cluster"); it != jm.end() && !it->is_null()) {
          m.gold_nil_cluster = it->get<std::string>();
        }
        if (m.start < m.end) {
          m.surface = std::string(slice_code_points(doc.text, m.start, m.end));
        }
        if (auto it = jm.find("surface"); it != jm.end() && it->is_string() &&
                                         it->get<std::string>() != m.surface) {
          throw ValidationError(where + "surface does not match text slice");
        }
        doc.mentions.push_back(std::move(m));
      }
      std::sort(doc.mentions.begin(), doc.mentions.end(),
                [](const Mention& a, const Mention& b) {
                  return std::tie(a.start, a.end) < std::tie(b.start, b.end);
                });
      validate_document(doc);
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      if (msg.starts_with("corpus line")) throw;
      throw ValidationError(where + msg);
    }
  }
  return docs;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path));
}

std::string format_corpus(const std::vector<Document>& docs) {
  std::string out;
  for (const Document& doc : docs) {
    nlohmann::ordered_json obj;
    obj["doc_id"] = doc.doc_id;
    obj["text"] = doc.text;
    nlohmann::ordered_json mentions = nlohmann::ordered_json::array();
    for (const Mention& m : doc.mentions) {
      nlohmann::ordered_json jm;
      jm["start"] = m.start;
      jm["end"] = m.end;
      jm["surface"] = m.surface;
      jm["type"] = std::string(to_string(m.type));
      jm["kind"] = std::string(to_string(m.kind));
      jm["gold_entity_id"] =
          m.gold_id ? nlohmann::ordered_json(*m.gold_id) : nlohmann::ordered_json();
      if (m.gold_nil_cluster) jm["gold_nil_cluster"] = *m.gold_nil_cluster;
      mentions.push_back(std::move(jm));
    }
    obj["mentions"] = std::move(mentions);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const std::filesystem::path& path,
                 const std::vector<Document>& docs) {
  write_file(path, format_corpus(docs));
}

}  // namespace fofelink
