#pragma once

// Fixed-size ordinally forgetting encoding (FOFE).
//
// A token sequence w_1..w_N over a vocabulary V is encoded as
//   z_0 = 0,  z_n = alpha * z_{n-1} + e_n
// where e_n is the one-hot vector of w_n. A dual code concatenates two such
// codes computed with different forgetting factors. Because the recursion is
// linear, projecting the code through an embedding matrix E (|V| x d) equals
// running the same recursion directly on the rows of E, which is how the
// ranker computes context features.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fofelink {

enum class OovPolicy {
  kReserve,  // index 0 is "<unk>"; unknown tokens map to it
  kReject,   // unknown tokens raise ValidationError
};

// Bijective token <-> index map with dense indices 0..size()-1.
class Vocabulary {
 public:
  static constexpr std::string_view kOovToken = "<unk>";
  static constexpr std::size_t kOovIndex = 0;

  explicit Vocabulary(OovPolicy policy = OovPolicy::kReserve);
  Vocabulary(std::span<const std::string> tokens, OovPolicy policy);

  // Returns the index of `token`, inserting it if new.
  std::size_t add(std::string_view token);

  std::optional<std::size_t> find(std::string_view token) const;
  // Index of `token`, or the OOV index; throws under OovPolicy::kReject.
  std::size_t lookup(std::string_view token) const;
  std::vector<std::size_t> lookup(std::span<const std::string> seq) const;

  const std::string& token_at(std::size_t index) const;
  std::size_t size() const { return tokens_.size(); }
  bool reserves_oov() const { return policy_ == OovPolicy::kReserve; }
  OovPolicy policy() const { return policy_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  OovPolicy policy_;
  std::vector<std::string> tokens_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

struct FofeCode {
  std::vector<double> values;
  double alpha = 0.5;
};

struct DualFofeCode {
  FofeCode low;
  FofeCode high;

  // low.values followed by high.values.
  std::vector<double> concatenated() const;
};

struct ForgettingFactors {
  double low = 0.5;
  double high = 0.9;
};

// Sparse one-hot-space code: (index, weight) sorted by index, no duplicates.
using SparseCode = std::vector<std::pair<std::uint32_t, double>>;

// Throws ConfigError unless 0 < alpha < 1.
void validate_alpha(double alpha);
// Throws ConfigError unless both factors are valid and distinct.
void validate_alphas(const ForgettingFactors& alphas);

FofeCode encode(std::span<const std::string> seq, const Vocabulary& vocab,
                double alpha);
FofeCode encode_indices(std::span<const std::size_t> seq, std::size_t dim,
                        double alpha);
SparseCode encode_sparse(std::span<const std::size_t> seq, double alpha);

DualFofeCode encode_dual(std::span<const std::string> seq,
                         const Vocabulary& vocab, const ForgettingFactors& alphas);

// Runs the recursion on embedding rows: returns E^T * encode(seq).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> encode_projected(
    std::span<const std::size_t> seq, const Eigen::MatrixBase<Derived>& embeddings,
    double alpha) {
  using Scalar = typename Derived::Scalar;
  validate_alpha(alpha);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(embeddings.cols());
  const Scalar a = static_cast<Scalar>(alpha);
  for (std::size_t index : seq) {
    z = a * z + embeddings.row(static_cast<Eigen::Index>(index)).transpose();
  }
  return z;
}

// Token-level form; throws ValidationError when the embedding matrix does not
// have one row per vocabulary entry.
Eigen::VectorXd encode_projected(std::span<const std::string> seq,
                                 const Vocabulary& vocab,
                                 const Eigen::MatrixXd& embeddings, double alpha);

// Exhaustive inverse used as a test oracle: returns the unique sequence of
// length <= max_len whose code matches within 1e-9 (L-inf), or nullopt.
// Throws OracleFailure if several sequences match. Requires |V| <= 10 and
// max_len <= 8.
std::optional<std::vector<std::string>> decode_bruteforce(
    const FofeCode& code, const Vocabulary& vocab, std::size_t max_len);

}  // namespace fofelink
