#pragma once

// Deterministic synthetic knowledge base and corpus.
//
// Entities come in ambiguity groups sharing a family word as an alias; the
// canonical name is "<Given> <Family>", where the given word is the family
// word of another group. Descriptions mix topic words with words unique to
// the entity and end with the name words, and mention contexts are drawn
// from the same vocabulary, so the linking task is learnable. Documents pick
// entities of one topic with a steep popularity skew. Some short mentions use
// only the given word and can be resolved only through a longer mention of
// the same entity in the same document. NIL mentions pair an unseen given
// word with a KB family word and use context words absent from the KB.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fofelink/corpus.h"
#include "fofelink/kb.h"

namespace fofelink {

struct SyntheticSpec {
  std::size_t n_entities = 500;
  std::size_t n_docs = 200;
  std::size_t mentions_per_doc = 6;
  std::size_t ambiguity = 3;
  double nil_fraction = 0.2;
  // Probability that an entity links to each other entity of its topic.
  double link_density = 0.2;
  std::uint64_t seed = 42;

  // Throws ConfigError.
  void validate() const;
};

struct SyntheticData {
  std::vector<KbEntity> entities;
  std::vector<Document> docs;

  std::string kb_jsonl() const;
  std::string corpus_jsonl() const;
};

SyntheticData synthesize(const SyntheticSpec& spec);

}  // namespace fofelink
