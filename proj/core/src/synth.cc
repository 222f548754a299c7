#include "fofelink/synth.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "fofelink/errors.h"
#include "fofelink/kb.h"
#include "random.h"

namespace fofelink {

namespace {

using detail::uniform01;
using detail::uniform_below;

// Name words (CVCVCVC) and description words (CVCVCVCVC) use disjoint
// consonants and different lengths, so no description window comes within
// fuzzy range of a name.
constexpr std::string_view kNameConsonants = "bcdfghjklmnpqwxy";
constexpr std::string_view kTextConsonants = "rstvz";
constexpr std::string_view kVowels = "aeiou";

constexpr std::size_t kEntitiesPerTopic = 25;
constexpr std::size_t kIndexedDescriptionChars = FuzzyOptions{}.description_chars;
constexpr std::size_t kTopicWords = 6;
constexpr std::size_t kUniqueWords = 3;
constexpr std::size_t kCommonWords = 40;
constexpr std::size_t kNilContextWords = 30;
constexpr std::size_t kContextWords = 6;

class WordSource {
 public:
  WordSource(std::mt19937_64& rng, std::string_view consonants, std::size_t length)
      : rng_(rng), consonants_(consonants), length_(length) {}

  std::string next() {
    for (;;) {
      std::string w;
      for (std::size_t i = 0; i < length_; ++i) {
        const std::string_view pool = i % 2 == 0 ? consonants_ : kVowels;
        w += pool[uniform_below(rng_, pool.size())];
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> take(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(next());
    return out;
  }

 private:
  std::mt19937_64& rng_;
  std::string_view consonants_;
  std::size_t length_;
  std::set<std::string> used_;
};

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

std::string padded_id(char prefix, std::size_t i, std::size_t count) {
  std::string digits = std::to_string(i);
  const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
  return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') +
         digits;
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[uniform_below(rng, v.size())];
}

struct EntityWords {
  std::string given;
  std::string family;
  std::size_t topic = 0;
  std::vector<std::string> unique;
};

enum class Form { kFull, kGiven, kFamily };

// Weighted draw without replacement; the entity at rank r has weight
// 1 / (r + 1)^2, so a few entities of each topic dominate the corpus.
std::vector<std::size_t> popular_first(std::vector<std::size_t> pool,
                                       std::mt19937_64& rng) {
  std::vector<double> weight(pool.size());
  for (std::size_t r = 0; r < pool.size(); ++r) weight[r] = 1.0 / std::pow(static_cast<double>(r + 1), 2.0);
  std::vector<std::size_t> out;
  out.reserve(pool.size());
  while (!pool.empty()) {
    double total = 0.0;
    for (double w : weight) total += w;
    double u = uniform01(rng) * total;
    std::size_t r = 0;
    while (r + 1 < pool.size() && u >= weight[r]) u -= weight[r++];
    out.push_back(pool[r]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(r));
    weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(r));
  }
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_entities < 1 || n_docs < 1 || mentions_per_doc < 1 || ambiguity < 1) {
    throw ConfigError("synthetic counts must be >= 1");
  }
  if (!(nil_fraction >= 0.0 && nil_fraction <= 1.0)) {
    throw ConfigError("nil_fraction must lie in [0, 1]");
  }
  if (!(link_density >= 0.0 && link_density <= 1.0)) {
    throw ConfigError("link_density must lie in [0, 1]");
  }
}

std::string SyntheticData::kb_jsonl() const { return format_kb_jsonl(entities); }

std::string SyntheticData::corpus_jsonl() const { return format_corpus(docs); }

SyntheticData synthesize(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  WordSource names(rng, kNameConsonants, 7);
  WordSource words(rng, kTextConsonants, 9);

  const std::size_t groups = std::max<std::size_t>(1, spec.n_entities / spec.ambiguity);
  const std::size_t topics = std::max<std::size_t>(1, spec.n_entities / kEntitiesPerTopic);
  const std::vector<std::string> family = names.take(groups);

  std::vector<std::vector<std::string>> topic_words(topics);
  for (auto& t : topic_words) t = words.take(kTopicWords);
  const std::vector<std::string> common = words.take(kCommonWords);
  const std::vector<std::string> nil_words = words.take(kNilContextWords);

  // Entity i belongs to group min(i / ambiguity, groups - 1) and topic
  // i % topics, so members of one group never share a topic.
  std::vector<EntityWords> info(spec.n_entities);
  std::vector<std::vector<std::size_t>> by_topic(topics);
  SyntheticData data;
  data.entities.resize(spec.n_entities);
  for (std::size_t i = 0; i < spec.n_entities; ++i) {
    const std::size_t g = std::min(i / spec.ambiguity, groups - 1);
    const std::size_t k = i - g * spec.ambiguity;
    EntityWords& w = info[i];
    w.family = family[g];
    w.given = family[(g + 1 + k) % groups];
    w.topic = i % topics;
    w.unique = words.take(kUniqueWords);
    by_topic[w.topic].push_back(i);

    std::vector<std::string> desc = topic_words[w.topic];
    desc.insert(desc.end(), w.unique.begin(), w.unique.end());
    for (int c = 0; c < 3; ++c) desc.push_back(pick(common, rng));
    detail::shuffle(desc.begin(), desc.end(), rng);
    std::string text;
    for (const std::string& d : desc) {
      if (!text.empty()) text += ' ';
      text += d;
    }
    text += '.';
    // The name words sit past the indexed description prefix: the ranker sees
    // them through TF-IDF, but fuzzy retrieval cannot shortcut the extensions.
    while (text.size() < kIndexedDescriptionChars) {
      text += ' ';
      text += pick(common, rng);
    }
    text += ' ' + capitalize(w.given) + ' ' + capitalize(w.family) + '.';

    KbEntity& e = data.entities[i];
    e.id = padded_id('E', i, spec.n_entities);
    e.name = capitalize(w.given) + " " + capitalize(w.family);
    e.type = kAllEntityTypes[g % std::size(kAllEntityTypes)];
    e.aliases = {capitalize(w.family)};
    e.description = std::move(text);
  }
  for (std::size_t i = 0; i < spec.n_entities; ++i) {
    for (std::size_t j : by_topic[info[i].topic]) {
      if (j != i && uniform01(rng) < spec.link_density) {
        data.entities[i].links.push_back(data.entities[j].id);
      }
    }
  }

  // NIL entities: unseen given words, a KB family word, unseen context words.
  struct NilEntity {
    std::string id;
    std::string surface;
    EntityType type;
  };
  std::vector<NilEntity> nils(std::max<std::size_t>(1, spec.n_entities / 10));
  for (std::size_t n = 0; n < nils.size(); ++n) {
    nils[n].id = padded_id('N', n, nils.size());
    nils[n].surface = capitalize(names.next()) + " " + capitalize(pick(family, rng));
    nils[n].type = kAllEntityTypes[uniform_below(rng, std::size(kAllEntityTypes))];
  }

  const auto context_word = [&](const EntityWords* w) -> const std::string& {
    const double u = uniform01(rng);
    if (!w) return u < 0.8 ? pick(nil_words, rng) : pick(common, rng);
    if (u < 0.7) return pick(topic_words[w->topic], rng);
    if (u < 0.8) return pick(w->unique, rng);
    return pick(common, rng);
  };

  data.docs.resize(spec.n_docs);
  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    Document& doc = data.docs[d];
    doc.doc_id = padded_id('D', d, spec.n_docs);
    const std::vector<std::size_t> members =
        popular_first(by_topic[uniform_below(rng, topics)], rng);

    std::vector<bool> nil_slot(spec.mentions_per_doc);
    std::size_t kb_slots = 0;
    for (std::size_t s = 0; s < nil_slot.size(); ++s) {
      nil_slot[s] = uniform01(rng) < spec.nil_fraction;
      if (!nil_slot[s]) ++kb_slots;
    }
    // A short form always follows the full name of the same entity.
    std::vector<std::pair<std::size_t, Form>> plan;
    for (std::size_t next = 0; plan.size() < kb_slots; ++next) {
      const std::size_t e = members[next % members.size()];
      plan.emplace_back(e, Form::kFull);
      if (plan.size() < kb_slots && uniform01(rng) < 0.5) {
        plan.emplace_back(e, uniform01(rng) < 0.5 ? Form::kGiven : Form::kFamily);
      }
    }

    std::size_t planned = 0;
    for (std::size_t s = 0; s < nil_slot.size(); ++s) {
      Mention m;
      m.doc_id = doc.doc_id;
      const EntityWords* w = nullptr;
      if (nil_slot[s]) {
        const NilEntity& n = nils[uniform_below(rng, nils.size())];
        m.surface = n.surface;
        m.type = n.type;
        m.gold_nil_cluster = n.id;
      } else {
        const auto [e, form] = plan[planned++];
        w = &info[e];
        m.type = data.entities[e].type;
        m.gold_id = data.entities[e].id;
        switch (form) {
          case Form::kFull: m.surface = data.entities[e].name; break;
          case Form::kGiven: m.surface = capitalize(w->given); break;
          case Form::kFamily: m.surface = capitalize(w->family); break;
        }
      }
      const std::size_t left = uniform_below(rng, 5);
      std::string sentence;
      for (std::size_t i = 0; i < left; ++i) {
        sentence += context_word(w);
        sentence += ' ';
      }
      if (!doc.text.empty()) doc.text += ' ';
      m.start = doc.text.size() + sentence.size();
      doc.text += sentence;
      doc.text += m.surface;
      m.end = doc.text.size();
      for (std::size_t i = left; i < kContextWords; ++i) {
        doc.text += ' ';
        doc.text += context_word(w);
      }
      doc.text += '.';
      doc.mentions.push_back(std::move(m));
    }
  }
  return data;
}

}  // namespace fofelink
