#include "fofelink/fofe.h"

#include <cmath>

#include "fofelink/errors.h"

namespace fofelink {

Vocabulary::Vocabulary(OovPolicy policy) : policy_(policy) {
  if (policy_ == OovPolicy::kReserve) add(kOovToken);
}

Vocabulary::Vocabulary(std::span<const std::string> tokens, OovPolicy policy)
    : Vocabulary(policy) {
  for (const std::string& token : tokens) add(token);
}

std::size_t Vocabulary::add(std::string_view token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const std::size_t index = tokens_.size();
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), index);
  return index;
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t Vocabulary::lookup(std::string_view token) const {
  if (auto found = find(token)) return *found;
  if (policy_ == OovPolicy::kReserve) return kOovIndex;
  throw ValidationError("token not in vocabulary: '" + std::string(token) + "'");
}

std::vector<std::size_t> Vocabulary::lookup(
    std::span<const std::string> seq) const {
  std::vector<std::size_t> out;
  out.reserve(seq.size());
  for (const std::string& token : seq) out.push_back(lookup(token));
  return out;
}

const std::string& Vocabulary::token_at(std::size_t index) const {
  if (index >= tokens_.size()) {
    throw ValidationError("vocabulary index out of range: " +
                          std::to_string(index));
  }
  return tokens_[index];
}

std::vector<double> DualFofeCode::concatenated() const {
  std::vector<double> out(low.values);
  out.insert(out.end(), high.values.begin(), high.values.end());
  return out;
}

void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("forgetting factor must lie in (0, 1), got " +
                      std::to_string(alpha));
  }
}

void validate_alphas(const ForgettingFactors& alphas) {
  validate_alpha(alphas.low);
  validate_alpha(alphas.high);
  if (alphas.low == alphas.high) {
    throw ConfigError("dual FOFE needs two distinct forgetting factors");
  }
}

FofeCode encode_indices(std::span<const std::size_t> seq, std::size_t dim,
                        double alpha) {
  validate_alpha(alpha);
  FofeCode code{std::vector<double>(dim, 0.0), alpha};
  for (std::size_t index : seq) {
    if (index >= dim) {
      throw ValidationError("token index " + std::to_string(index) +
                            " outside code dimension " + std::to_string(dim));
    }
    for (double& v : code.values) v *= alpha;
    code.values[index] += 1.0;
  }
  return code;
}

FofeCode encode(std::span<const std::string> seq, const Vocabulary& vocab,
                double alpha) {
  return encode_indices(vocab.lookup(seq), vocab.size(), alpha);
}

SparseCode encode_sparse(std::span<const std::size_t> seq, double alpha) {
  validate_alpha(alpha);
  std::map<std::uint32_t, double> weights;
  double w = 1.0;
  // The last token carries weight 1, the one before it alpha, and so on.
  for (auto it = seq.rbegin(); it != seq.rend(); ++it) {
    weights[static_cast<std::uint32_t>(*it)] += w;
    w *= alpha;
  }
  return SparseCode(weights.begin(), weights.end());
}

DualFofeCode encode_dual(std::span<const std::string> seq,
                         const Vocabulary& vocab,
                         const ForgettingFactors& alphas) {
  validate_alphas(alphas);
  const std::vector<std::size_t> indices = vocab.lookup(seq);
  return {encode_indices(indices, vocab.size(), alphas.low),
          encode_indices(indices, vocab.size(), alphas.high)};
}

Eigen::VectorXd encode_projected(std::span<const std::string> seq,
                                 const Vocabulary& vocab,
                                 const Eigen::MatrixXd& embeddings,
                                 double alpha) {
  if (static_cast<std::size_t>(embeddings.rows()) != vocab.size()) {
    throw ValidationError("embedding matrix has " +
                          std::to_string(embeddings.rows()) +
                          " rows for a vocabulary of " +
                          std::to_string(vocab.size()));
  }
  return encode_projected(std::span<const std::size_t>(vocab.lookup(seq)),
                          embeddings, alpha);
}

namespace {

struct BruteForceSearch {
  const std::vector<double>& target;
  double alpha;
  std::size_t vocab_size;
  std::size_t max_len;
  std::vector<std::vector<double>> codes;  // codes[d] = code of prefix length d
  std::vector<std::size_t> prefix;
  std::optional<std::vector<std::size_t>> match;

  bool matches(const std::vector<double>& code) const {
    for (std::size_t i = 0; i < code.size(); ++i) {
      if (std::abs(code[i] - target[i]) > 1e-9) return false;
    }
    return true;
  }

  void record() {
    if (match) {
      throw OracleFailure("FOFE code is not unique: two sequences of length " +
                          std::to_string(match->size()) + " and " +
                          std::to_string(prefix.size()) + " share it");
    }
    match = prefix;
  }

  void visit(std::size_t depth) {
    if (matches(codes[depth])) record();
    if (depth == max_len) return;
    for (std::size_t t = 0; t < vocab_size; ++t) {
      std::vector<double>& next = codes[depth + 1];
      const std::vector<double>& cur = codes[depth];
      for (std::size_t i = 0; i < vocab_size; ++i) next[i] = alpha * cur[i];
      next[t] += 1.0;
      prefix.push_back(t);
      visit(depth + 1);
      prefix.pop_back();
    }
  }
};

}  // namespace

std::optional<std::vector<std::string>> decode_bruteforce(
    const FofeCode& code, const Vocabulary& vocab, std::size_t max_len) {
  if (vocab.size() > 10 || max_len > 8) {
    throw ConfigError("decode_bruteforce is limited to |V| <= 10, max_len <= 8");
  }
  if (code.values.size() != vocab.size()) {
    throw ValidationError("code length does not match vocabulary size");
  }
  validate_alpha(code.alpha);
  BruteForceSearch search{code.values, code.alpha, vocab.size(), max_len, {}, {},
                          std::nullopt};
  search.codes.assign(max_len + 1, std::vector<double>(vocab.size(), 0.0));
  search.visit(0);
  if (!search.match) return std::nullopt;
  std::vector<std::string> tokens;
  for (std::size_t index : *search.match) tokens.push_back(vocab.token_at(index));
  return tokens;
}

}  // namespace fofelink
