#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fofelink/errors.h"
#include "fofelink/fofe.h"

namespace fofelink {
namespace {

using Seq = std::vector<std::string>;

Vocabulary abc() { return Vocabulary(std::vector<std::string>{"A", "B", "C"}, OovPolicy::kReject); }

void expect_values(const std::vector<double>& got, const std::vector<double>& want,
                   double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << i;
}

TEST(Vocabulary, BijectiveDenseIndices) {
  Vocabulary v(OovPolicy::kReserve);
  EXPECT_EQ(v.size(), 1u);
  EXPECT_EQ(v.token_at(0), Vocabulary::kOovToken);
  const std::size_t a = v.add("alpha");
  EXPECT_EQ(v.add("alpha"), a);
  v.add("beta");
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.lookup(v.token_at(i)), i);
  EXPECT_EQ(v.lookup("never"), Vocabulary::kOovIndex);
}

TEST(Vocabulary, RejectPolicyThrowsOnUnknown) {
  const Vocabulary v = abc();
  EXPECT_EQ(v.size(), 3u);
  EXPECT_THROW(v.lookup("D"), ValidationError);
}

TEST(Encode, EmptySequenceIsZero) {
  expect_values(encode(Seq{}, abc(), 0.5).values, {0, 0, 0});
}

TEST(Encode, HandUnrolledRecursion) {
  expect_values(encode(Seq{"A", "B", "C"}, abc(), 0.5).values, {0.25, 0.5, 1.0});
  expect_values(encode(Seq{"A", "A"}, abc(), 0.5).values, {1.5, 0, 0});
}

TEST(Encode, UnknownTokenUsesOovIndex) {
  Vocabulary v(OovPolicy::kReserve);
  v.add("a");
  expect_values(encode(Seq{"zzz", "a"}, v, 0.5).values, {0.5, 1.0});
}

TEST(Encode, AlphaOutsideOpenIntervalIsConfigError) {
  EXPECT_THROW(encode(Seq{"A"}, abc(), 0.0), ConfigError);
  EXPECT_THROW(encode(Seq{"A"}, abc(), 1.0), ConfigError);
  EXPECT_THROW(encode(Seq{"A"}, abc(), -0.3), ConfigError);
}

TEST(Encode, RecursionConsistency) {
  const Vocabulary v = abc();
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Seq s;
    const int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) s.push_back(v.token_at(rng() % 3));
    const std::string t = v.token_at(rng() % 3);
    const double alpha = 0.05 + 0.9 * (rng() % 1000) / 1000.0;
    const auto prev = encode(s, v, alpha).values;
    Seq longer = s;
    longer.push_back(t);
    const auto next = encode(longer, v, alpha).values;
    for (std::size_t i = 0; i < 3; ++i) {
      const double expect = alpha * prev[i] + (v.lookup(t) == i ? 1.0 : 0.0);
      EXPECT_NEAR(next[i], expect, 1e-12);
    }
  }
}

TEST(Encode, NonNegativeComponents) {
  const auto code = encode(Seq{"C", "A", "C", "B"}, abc(), 0.7);
  for (double x : code.values) EXPECT_GE(x, 0.0);
}

TEST(EncodeSparse, MatchesDenseCode) {
  const std::vector<std::size_t> idx = {2, 0, 2, 1};
  const auto dense = encode_indices(idx, 3, 0.9).values;
  std::vector<double> from_sparse(3, 0.0);
  for (const auto& [i, w] : encode_sparse(idx, 0.9)) from_sparse[i] = w;
  expect_values(from_sparse, dense);
}

TEST(EncodeDual, SingleTokenIndependentOfAlpha) {
  const Vocabulary v(std::vector<std::string>{"A", "B"}, OovPolicy::kReject);
  const auto d = encode_dual(Seq{"A"}, v, {0.5, 0.9});
  expect_values(d.low.values, {1, 0});
  expect_values(d.high.values, {1, 0});
}

TEST(EncodeDual, OneStepEachFactor) {
  const Vocabulary v(std::vector<std::string>{"A", "B"}, OovPolicy::kReject);
  expect_values(encode_dual(Seq{"A", "B"}, v, {0.5, 0.9}).concatenated(),
                {0.5, 1, 0.9, 1});
  expect_values(encode_dual(Seq{}, v, {0.5, 0.9}).concatenated(), {0, 0, 0, 0});
}

TEST(EncodeDual, LowHalfEqualsSingleCode) {
  const Vocabulary v = abc();
  const Seq s = {"B", "C", "A", "A"};
  const auto d = encode_dual(s, v, {0.5, 0.9});
  EXPECT_EQ(d.low.values, encode(s, v, 0.5).values);
  EXPECT_EQ(d.high.values, encode(s, v, 0.9).values);
  EXPECT_EQ(d.concatenated().size(), 2 * v.size());
}

TEST(EncodeDual, IdenticalFactorsRejected) {
  EXPECT_THROW(encode_dual(Seq{"A"}, abc(), {0.5, 0.5}), ConfigError);
}

TEST(EncodeProjected, IdentityMatchesExplicitCode) {
  const Vocabulary v = abc();
  const Seq s = {"A", "C", "C", "B"};
  const Eigen::VectorXd z = encode_projected(s, v, Eigen::MatrixXd::Identity(3, 3), 0.5);
  const auto explicit_code = encode(s, v, 0.5).values;
  for (int i = 0; i < 3; ++i) EXPECT_EQ(z[i], explicit_code[i]);
}

TEST(EncodeProjected, RandomMatrixMatchesExplicitThenProject) {
  const Vocabulary v = abc();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd e(3, 2);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) e(r, c) = u(rng);
  const auto code = encode(Seq{"A", "B", "C"}, v, 0.5).values;
  const Eigen::VectorXd oracle =
      e.transpose() * Eigen::Map<const Eigen::VectorXd>(code.data(), 3);
  const Eigen::VectorXd z = encode_projected(Seq{"A", "B", "C"}, v, e, 0.5);
  EXPECT_LE((z - oracle).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EncodeProjected, EmptySequenceIsZeroVector) {
  const Eigen::VectorXd z = encode_projected(Seq{}, abc(), Eigen::MatrixXd::Ones(3, 4), 0.5);
  EXPECT_EQ(z.size(), 4);
  EXPECT_EQ(z.cwiseAbs().maxCoeff(), 0.0);
}

TEST(EncodeProjected, RowCountMismatchThrows) {
  EXPECT_THROW(encode_projected(Seq{"A"}, abc(), Eigen::MatrixXd::Ones(4, 2), 0.5),
               ValidationError);
}

TEST(DecodeBruteforce, RecoversSequences) {
  const Vocabulary v = abc();
  EXPECT_EQ(decode_bruteforce(encode(Seq{"A", "B", "C"}, v, 0.5), v, 6),
            (Seq{"A", "B", "C"}));
  EXPECT_EQ(decode_bruteforce(encode(Seq{"B", "A"}, v, 0.5), v, 6), (Seq{"B", "A"}));
  EXPECT_EQ(decode_bruteforce(FofeCode{{0, 0, 0}, 0.5}, v, 6), Seq{});
}

TEST(DecodeBruteforce, NoMatchReturnsNullopt) {
  EXPECT_FALSE(decode_bruteforce(FofeCode{{0.3, 0, 0}, 0.5}, abc(), 4).has_value());
}

TEST(DecodeBruteforce, CollisionIsOracleFailure) {
  // With a*a + a = 1, [A, A, B] and [B, B, A] share one code.
  const Vocabulary v(std::vector<std::string>{"A", "B"}, OovPolicy::kReject);
  const double a = (std::sqrt(5.0) - 1.0) / 2.0;
  EXPECT_THROW(decode_bruteforce(encode(Seq{"A", "A", "B"}, v, a), v, 3), OracleFailure);
}

TEST(DecodeBruteforce, OracleLimits) {
  Vocabulary big(OovPolicy::kReject);
  for (int i = 0; i < 11; ++i) big.add("t" + std::to_string(i));
  EXPECT_THROW(decode_bruteforce(FofeCode{std::vector<double>(11, 0.0), 0.5}, big, 2),
               ConfigError);
  EXPECT_THROW(decode_bruteforce(FofeCode{{0, 0, 0}, 0.5}, abc(), 9), ConfigError);
}

}  // namespace
}  // namespace fofelink
