#include "fofelink/kb.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fofelink/binary_io.h"
#include "fofelink/errors.h"
#include "fofelink/text.h"
#include "json.hpp"

namespace fofelink {

namespace {

constexpr std::string_view kIndexMagic = "FOFEKBIX";
constexpr std::uint16_t kIndexVersion = 1;
constexpr char32_t kPad = U'\u0001';

// Levenshtein distance, or max_d + 1 once every cell in a row exceeds max_d.
std::size_t bounded_levenshtein(std::u32string_view a, std::u32string_view b,
                                std::size_t max_d) {
  if (a.size() < b.size()) std::swap(a, b);
  if (a.size() - b.size() > max_d) return max_d + 1;
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    std::size_t best = row[0];
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
      best = std::min(best, row[j]);
    }
    if (best > max_d) return max_d + 1;
  }
  return row[b.size()];
}

// Similarity if it reaches `floor`, otherwise nullopt.
std::optional<double> similarity_at_least(std::u32string_view a,
                                          std::u32string_view b, double floor) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  const double slack = (1.0 - floor) * static_cast<double>(longest) + 1e-9;
  const std::size_t max_d = slack < 0 ? 0 : static_cast<std::size_t>(slack);
  const std::size_t d = bounded_levenshtein(a, b, max_d);
  if (d > max_d) return std::nullopt;
  const double sim =
      1.0 - static_cast<double>(d) / static_cast<double>(longest);
  if (sim + 1e-12 < floor) return std::nullopt;
  return sim;
}

bool better(const FuzzyIndex::Match& a, const FuzzyIndex::Match& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.field < b.field;
}

void keep_best(std::map<std::uint32_t, FuzzyIndex::Match>& best,
               const FuzzyIndex::Match& m) {
  auto [it, inserted] = best.emplace(m.entity, m);
  if (!inserted && better(m, it->second)) it->second = m;
}

std::vector<std::string> string_array(const nlohmann::json& obj,
                                      const char* field, std::size_t line) {
  std::vector<std::string> out;
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) {
    throw ValidationError("line " + std::to_string(line) + ": field '" +
                          field + "' must be an array of strings");
  }
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw ValidationError("line " + std::to_string(line) + ": field '" +
                            field + "' must be an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string required_string(const nlohmann::json& obj, const char* field,
                            std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError("line " + std::to_string(line) +
                          ": missing string field '" + field + "'");
  }
  return it->get<std::string>();
}

}  // namespace

// ---------------------------------------------------------------------------
// FuzzyIndex

FuzzyIndex::FuzzyIndex(std::vector<Key> keys, std::uint32_t gram)
    : gram_(gram), keys_(std::move(keys)) {
  if (gram_ == 0) throw ConfigError("n-gram size must be >= 1");
  prepare();
  for (std::uint32_t k = 0; k < keys_.size(); ++k) {
    std::vector<std::string> g = grams(keys_[k].text);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    for (std::string& gram_text : g) postings_[std::move(gram_text)].push_back(k);
  }
}

void FuzzyIndex::prepare() {
  key_points_.clear();
  key_points_.reserve(keys_.size());
  for (const Key& key : keys_) key_points_.push_back(to_code_points(key.text));
}

std::vector<std::string> FuzzyIndex::grams(std::string_view folded) const {
  std::u32string padded(gram_ - 1, kPad);
  padded += to_code_points(folded);
  padded.append(gram_ - 1, kPad);
  std::vector<std::string> out;
  if (padded.size() < gram_) return out;
  for (std::size_t i = 0; i + gram_ <= padded.size(); ++i) {
    out.push_back(to_utf8(std::u32string_view(padded).substr(i, gram_)));
  }
  return out;
}

std::vector<FuzzyIndex::Match> FuzzyIndex::candidates(
    std::string_view folded_query, double floor) const {
  const std::u32string query = to_code_points(folded_query);
  std::vector<std::string> query_grams = grams(folded_query);
  std::sort(query_grams.begin(), query_grams.end());
  query_grams.erase(std::unique(query_grams.begin(), query_grams.end()),
                    query_grams.end());

  std::vector<std::uint32_t> touched;
  std::vector<bool> seen(keys_.size(), false);
  for (const std::string& g : query_grams) {
    auto it = postings_.find(g);
    if (it == postings_.end()) continue;
    for (std::uint32_t k : it->second) {
      if (!seen[k]) {
        seen[k] = true;
        touched.push_back(k);
      }
    }
  }

  std::map<std::uint32_t, Match> best;
  for (std::uint32_t k : touched) {
    if (auto sim = similarity_at_least(query, key_points_[k], floor)) {
      keep_best(best, Match{keys_[k].entity, *sim, keys_[k].field});
    }
  }
  std::vector<Match> out;
  out.reserve(best.size());
  for (auto& [entity, m] : best) out.push_back(m);
  return out;
}

std::vector<FuzzyIndex::Match> FuzzyIndex::scan(std::string_view folded_query,
                                                double floor) const {
  const std::u32string query = to_code_points(folded_query);
  std::vector<std::string> query_grams = grams(folded_query);
  std::sort(query_grams.begin(), query_grams.end());
  std::map<std::uint32_t, Match> best;
  for (std::size_t k = 0; k < keys_.size(); ++k) {
    std::vector<std::string> key_grams = grams(keys_[k].text);
    std::sort(key_grams.begin(), key_grams.end());
    std::vector<std::string> shared;
    std::set_intersection(query_grams.begin(), query_grams.end(), key_grams.begin(),
                          key_grams.end(), std::back_inserter(shared));
    if (shared.empty()) continue;
    const double sim = edit_similarity(query, key_points_[k]);
    if (sim + 1e-12 >= floor) {
      keep_best(best, Match{keys_[k].entity, sim, keys_[k].field});
    }
  }
  std::vector<Match> out;
  for (auto& [entity, m] : best) out.push_back(m);
  return out;
}

FuzzyIndex FuzzyIndex::restore(
    std::vector<Key> keys, std::uint32_t gram,
    std::map<std::string, std::vector<std::uint32_t>, std::less<>> postings,
    std::size_t entity_count) {
  if (gram == 0) throw ValidationError("index n-gram size is zero");
  for (const Key& key : keys) {
    if (key.entity >= entity_count) {
      throw ValidationError("fuzzy index key references unknown entity ordinal " +
                            std::to_string(key.entity));
    }
  }
  for (const auto& [g, list] : postings) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i] >= keys.size() || (i > 0 && list[i] <= list[i - 1])) {
        throw ValidationError("posting list for gram is unsorted or out of range");
      }
    }
  }
  FuzzyIndex index;
  index.gram_ = gram;
  index.keys_ = std::move(keys);
  index.postings_ = std::move(postings);
  index.prepare();
  return index;
}

// ---------------------------------------------------------------------------
// KbStore construction

KbStore KbStore::from_entities(std::vector<KbEntity> entities,
                               FuzzyOptions options) {
  if (!(options.floor >= 0.0 && options.floor <= 1.0)) {
    throw ConfigError("fuzzy similarity floor must lie in [0, 1]");
  }
  if (options.limit == 0) throw ConfigError("fuzzy limit must be >= 1");

  std::sort(entities.begin(), entities.end(),
            [](const KbEntity& a, const KbEntity& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (entities[i].id.empty()) throw ValidationError("entity with empty id");
    if (entities[i].name.empty()) {
      throw ValidationError("entity '" + entities[i].id + "' has an empty name");
    }
    if (i > 0 && entities[i].id == entities[i - 1].id) {
      throw ValidationError("duplicate entity id '" + entities[i].id + "'");
    }
  }

  KbStore store;
  store.options_ = options;
  store.entities_ = std::move(entities);
  for (std::size_t i = 0; i < store.entities_.size(); ++i) {
    store.by_id_.emplace(store.entities_[i].id, i);
  }

  std::set<std::string> dangling;
  for (const KbEntity& e : store.entities_) {
    for (const std::string& link : e.links) {
      if (!store.by_id_.contains(link)) dangling.insert(e.id + " -> " + link);
    }
  }
  if (!dangling.empty()) {
    std::ostringstream msg;
    msg << "dangling links:";
    for (const std::string& d : dangling) msg << ' ' << d << ';';
    throw ValidationError(msg.str());
  }

  store.build_derived();

  std::vector<FuzzyIndex::Key> keys;
  for (std::uint32_t i = 0; i < store.entities_.size(); ++i) {
    const KbEntity& e = store.entities_[i];
    std::set<std::string> emitted;
    const auto emit = [&](std::string text, KeyField field) {
      if (text.empty() || !emitted.insert(text).second) return;
      keys.push_back({std::move(text), i, field});
    };
    emit(fold_case(e.name), KeyField::kName);
    for (const std::string& alias : e.aliases) emit(fold_case(alias), KeyField::kAlias);

    const std::string_view head =
        slice_code_points(e.description, 0, options.description_chars);
    const std::vector<std::string> words = tokenize_words(head);
    for (std::size_t start = 0; start < words.size(); ++start) {
      std::string window;
      for (std::size_t len = 1;
           len <= options.description_window && start + len <= words.size();
           ++len) {
        if (len > 1) window += ' ';
        window += words[start + len - 1];
        emit(window, KeyField::kDescription);
      }
    }
  }
  store.fuzzy_ = FuzzyIndex(std::move(keys), options.gram);
  return store;
}

void KbStore::build_derived() {
  by_id_.clear();
  by_surface_.clear();
  links_.assign(entities_.size(), {});
  redirects_ = RedirectTable{};
  df_.clear();

  for (std::size_t i = 0; i < entities_.size(); ++i) by_id_.emplace(entities_[i].id, i);

  std::map<std::string, std::set<std::uint32_t>> surfaces;
  std::set<std::string> alias_surfaces;
  for (std::uint32_t i = 0; i < entities_.size(); ++i) {
    const KbEntity& e = entities_[i];
    surfaces[fold_case(e.name)].insert(i);
    for (const std::string& alias : e.aliases) {
      const std::string folded = fold_case(alias);
      surfaces[folded].insert(i);
      alias_surfaces.insert(folded);
    }
    std::set<std::uint32_t> targets;
    for (const std::string& link : e.links) {
      const std::uint32_t target = static_cast<std::uint32_t>(by_id_.at(link));
      if (target != i) targets.insert(target);
    }
    links_[i].assign(targets.begin(), targets.end());

    std::set<std::string> terms;
    for (std::string& w : tokenize_words(e.description)) terms.insert(std::move(w));
    for (const std::string& t : terms) ++df_[t];
  }

  for (auto& [surface, owners] : surfaces) {
    std::vector<std::uint32_t> list(owners.begin(), owners.end());
    if (list.size() == 1) {
      if (alias_surfaces.contains(surface) &&
          fold_case(entities_[list[0]].name) != surface) {
        redirects_.redirects.emplace(surface, entities_[list[0]].id);
      }
    } else {
      std::vector<std::string> ids;
      for (std::uint32_t o : list) ids.push_back(entities_[o].id);
      redirects_.disambiguation.emplace(surface, std::move(ids));
    }
    by_surface_.emplace(surface, std::move(list));
  }
}

KbStore KbStore::parse_jsonl(std::string_view text, FuzzyOptions options) {
  std::vector<KbEntity> entities;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": expected a JSON object");
    }
    KbEntity e;
    e.id = required_string(obj, "id", line_no);
    e.name = required_string(obj, "name", line_no);
    const std::string type = required_string(obj, "type", line_no);
    auto parsed = parse_entity_type(type);
    if (!parsed) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": unknown entity type '" + type + "'");
    }
    e.type = *parsed;
    e.aliases = string_array(obj, "aliases", line_no);
    if (auto it = obj.find("description"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": 'description' must be a string");
      }
      e.description = it->get<std::string>();
    }
    e.links = string_array(obj, "links", line_no);
    entities.push_back(std::move(e));
  }
  return from_entities(std::move(entities), options);
}

KbStore KbStore::load_jsonl(const std::filesystem::path& path,
                            FuzzyOptions options) {
  return parse_jsonl(read_file(path), options);
}

std::string format_kb_jsonl(std::span<const KbEntity> entities) {
  std::string out;
  for (const KbEntity& e : entities) {
    nlohmann::ordered_json obj;
    obj["id"] = e.id;
    obj["name"] = e.name;
    obj["type"] = std::string(to_string(e.type));
    obj["aliases"] = e.aliases;
    obj["description"] = e.description;
    obj["links"] = e.links;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string KbStore::serialize() const {
  BinaryWriter out;
  out.write_bytes(kIndexMagic);
  out.write_u16(kIndexVersion);

  BinaryWriter opts;
  opts.write_u32(options_.gram);
  opts.write_f64(options_.floor);
  opts.write_u32(options_.limit);
  opts.write_u32(options_.description_chars);
  opts.write_u32(options_.description_window);
  out.write_section("OPTS", opts);

  BinaryWriter ents;
  ents.write_u32(static_cast<std::uint32_t>(entities_.size()));
  for (const KbEntity& e : entities_) {
    ents.write_string(e.id);
    ents.write_string(e.name);
    ents.write_u8(static_cast<std::uint8_t>(e.type));
    ents.write_u32(static_cast<std::uint32_t>(e.aliases.size()));
    for (const std::string& a : e.aliases) ents.write_string(a);
    ents.write_string(e.description);
    ents.write_u32(static_cast<std::uint32_t>(e.links.size()));
    for (const std::string& l : e.links) ents.write_string(l);
  }
  out.write_section("ENTS", ents);

  BinaryWriter redr;
  redr.write_u32(static_cast<std::uint32_t>(redirects_.redirects.size()));
  for (const auto& [alias, id] : redirects_.redirects) {
    redr.write_string(alias);
    redr.write_string(id);
  }
  redr.write_u32(static_cast<std::uint32_t>(redirects_.disambiguation.size()));
  for (const auto& [surface, ids] : redirects_.disambiguation) {
    redr.write_string(surface);
    redr.write_u32(static_cast<std::uint32_t>(ids.size()));
    for (const std::string& id : ids) redr.write_string(id);
  }
  out.write_section("REDR", redr);

  BinaryWriter fuzz;
  fuzz.write_u32(fuzzy_.gram());
  fuzz.write_u32(static_cast<std::uint32_t>(fuzzy_.keys().size()));
  for (const FuzzyIndex::Key& key : fuzzy_.keys()) {
    fuzz.write_string(key.text);
    fuzz.write_u32(key.entity);
    fuzz.write_u8(static_cast<std::uint8_t>(key.field));
  }
  fuzz.write_u32(static_cast<std::uint32_t>(fuzzy_.postings().size()));
  for (const auto& [g, list] : fuzzy_.postings()) {
    fuzz.write_string(g);
    fuzz.write_u32(static_cast<std::uint32_t>(list.size()));
    for (std::uint32_t k : list) fuzz.write_u32(k);
  }
  out.write_section("FUZZ", fuzz);

  BinaryWriter dfrq;
  dfrq.write_u32(static_cast<std::uint32_t>(df_.size()));
  for (const auto& [term, count] : df_) {
    dfrq.write_string(term);
    dfrq.write_u32(count);
  }
  out.write_section("DFRQ", dfrq);
  return out.data();
}

KbStore KbStore::deserialize(std::string_view bytes) {
  BinaryReader in(bytes);
  if (in.read_bytes(kIndexMagic.size()) != kIndexMagic) {
    throw ValidationError("not a KB index file (bad magic)");
  }
  const std::uint16_t version = in.read_u16();
  if (version != kIndexVersion) {
    throw ValidationError("unsupported KB index version " + std::to_string(version));
  }

  std::map<std::string, std::string_view> sections;
  while (!in.at_end()) {
    BinaryReader::Section s = in.read_section();
    sections[s.tag] = s.payload;
  }
  for (const char* tag : {"OPTS", "ENTS", "REDR", "FUZZ", "DFRQ"}) {
    if (!sections.contains(tag)) {
      throw ValidationError(std::string("KB index missing section ") + tag);
    }
  }

  FuzzyOptions options;
  {
    BinaryReader r(sections["OPTS"]);
    options.gram = r.read_u32();
    options.floor = r.read_f64();
    options.limit = r.read_u32();
    options.description_chars = r.read_u32();
    options.description_window = r.read_u32();
  }

  KbStore store;
  store.options_ = options;
  {
    BinaryReader r(sections["ENTS"]);
    const std::uint32_t n = r.read_u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      KbEntity e;
      e.id = r.read_string();
      e.name = r.read_string();
      const std::uint8_t type = r.read_u8();
      if (type > static_cast<std::uint8_t>(EntityType::kFac)) {
        throw ValidationError("bad entity type code in index");
      }
      e.type = static_cast<EntityType>(type);
      const std::uint32_t na = r.read_u32();
      for (std::uint32_t a = 0; a < na; ++a) e.aliases.push_back(r.read_string());
      e.description = r.read_string();
      const std::uint32_t nl = r.read_u32();
      for (std::uint32_t l = 0; l < nl; ++l) e.links.push_back(r.read_string());
      store.entities_.push_back(std::move(e));
    }
  }
  for (std::size_t i = 1; i < store.entities_.size(); ++i) {
    if (!(store.entities_[i - 1].id < store.entities_[i].id)) {
      throw ValidationError("KB index entities are not sorted by unique id");
    }
  }
  {
    std::set<std::string_view> ids;
    for (const KbEntity& e : store.entities_) ids.insert(e.id);
    for (const KbEntity& e : store.entities_) {
      for (const std::string& l : e.links) {
        if (!ids.contains(l)) {
          throw ValidationError("KB index has dangling link " + e.id + " -> " + l);
        }
      }
    }
  }
  store.build_derived();

  {
    BinaryReader r(sections["REDR"]);
    RedirectTable table;
    const std::uint32_t nr = r.read_u32();
    for (std::uint32_t i = 0; i < nr; ++i) {
      std::string alias = r.read_string();
      table.redirects.emplace(std::move(alias), r.read_string());
    }
    const std::uint32_t nd = r.read_u32();
    for (std::uint32_t i = 0; i < nd; ++i) {
      std::string surface = r.read_string();
      std::vector<std::string> ids(r.read_u32());
      for (std::string& id : ids) id = r.read_string();
      table.disambiguation.emplace(std::move(surface), std::move(ids));
    }
    if (table.redirects != store.redirects_.redirects ||
        table.disambiguation != store.redirects_.disambiguation) {
      throw ValidationError("KB index redirect table is inconsistent with entities");
    }
  }

  {
    BinaryReader r(sections["FUZZ"]);
    const std::uint32_t gram = r.read_u32();
    std::vector<FuzzyIndex::Key> keys(r.read_u32());
    for (FuzzyIndex::Key& key : keys) {
      key.text = r.read_string();
      key.entity = r.read_u32();
      const std::uint8_t field = r.read_u8();
      if (field > static_cast<std::uint8_t>(KeyField::kDescription)) {
        throw ValidationError("bad key field code in index");
      }
      key.field = static_cast<KeyField>(field);
    }
    std::map<std::string, std::vector<std::uint32_t>, std::less<>> postings;
    const std::uint32_t np = r.read_u32();
    for (std::uint32_t i = 0; i < np; ++i) {
      std::string g = r.read_string();
      std::vector<std::uint32_t> list(r.read_u32());
      for (std::uint32_t& k : list) k = r.read_u32();
      postings.emplace(std::move(g), std::move(list));
    }
    store.fuzzy_ = FuzzyIndex::restore(std::move(keys), gram, std::move(postings),
                                       store.entities_.size());
  }

  {
    BinaryReader r(sections["DFRQ"]);
    std::map<std::string, std::uint32_t, std::less<>> df;
    const std::uint32_t n = r.read_u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      std::string term = r.read_string();
      df.emplace(std::move(term), r.read_u32());
    }
    if (df != store.df_) {
      throw ValidationError("KB index term statistics are inconsistent");
    }
  }
  return store;
}

void KbStore::save_index(const std::filesystem::path& path) const {
  write_file(path, serialize());
}

KbStore KbStore::load_index(const std::filesystem::path& path) {
  return deserialize(read_file(path));
}

KbStore KbStore::load(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.starts_with(kIndexMagic)) return deserialize(bytes);
  return parse_jsonl(bytes);
}

// ---------------------------------------------------------------------------
// Queries

const KbEntity* KbStore::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &entities_[it->second];
}

std::optional<std::size_t> KbStore::ordinal(std::string_view id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> KbStore::lookup_exact(std::string_view surface) const {
  const std::string folded = fold_case(surface);
  std::set<std::string> ids;
  if (auto it = by_surface_.find(folded); it != by_surface_.end()) {
    for (std::uint32_t o : it->second) ids.insert(entities_[o].id);
  }
  if (auto it = redirects_.redirects.find(folded); it != redirects_.redirects.end()) {
    ids.insert(it->second);
  }
  if (auto it = redirects_.disambiguation.find(folded);
      it != redirects_.disambiguation.end()) {
    ids.insert(it->second.begin(), it->second.end());
  }
  return {ids.begin(), ids.end()};
}

std::vector<FuzzyHit> KbStore::rank(std::vector<FuzzyIndex::Match> matches,
                                    std::size_t limit) const {
  std::sort(matches.begin(), matches.end(),
            [](const FuzzyIndex::Match& a, const FuzzyIndex::Match& b) {
              if (a.similarity != b.similarity) return a.similarity > b.similarity;
              if (a.field != b.field) return a.field < b.field;
              return a.entity < b.entity;  // ordinals follow id order
            });
  if (matches.size() > limit) matches.resize(limit);
  std::vector<FuzzyHit> hits;
  hits.reserve(matches.size());
  for (const FuzzyIndex::Match& m : matches) {
    hits.push_back({entities_[m.entity].id, m.similarity});
  }
  return hits;
}

std::vector<FuzzyHit> KbStore::lookup_fuzzy(std::string_view surface,
                                            std::size_t limit) const {
  if (limit == 0) throw ConfigError("lookup_fuzzy limit must be >= 1");
  return rank(fuzzy_.candidates(fold_case(surface), options_.floor), limit);
}

std::vector<FuzzyHit> KbStore::scan_fuzzy(std::string_view surface,
                                          std::size_t limit) const {
  if (limit == 0) throw ConfigError("scan_fuzzy limit must be >= 1");
  return rank(fuzzy_.scan(fold_case(surface), options_.floor), limit);
}

std::uint32_t KbStore::document_frequency(std::string_view term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

double KbStore::idf(std::string_view term) const {
  const double n = static_cast<double>(entities_.size());
  return std::log(n / (1.0 + static_cast<double>(document_frequency(term))));
}

std::vector<std::pair<std::string, double>> KbStore::description_tfidf(
    std::size_t ordinal) const {
  std::map<std::string, int> counts;
  for (std::string& w : tokenize_words(entities_.at(ordinal).description)) {
    ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, double>> out;
  out.reserve(counts.size());
  for (const auto& [term, count] : counts) {
    out.emplace_back(term, static_cast<double>(count) * idf(term));
  }
  return out;
}

}  // namespace fofelink
