#pragma once

// Feedforward ranking network over (mention, candidate) pairs.
//
// Input features, concatenated in this order:
//   mention   bag-of-words (or character dual-FOFE) -> mention_dim
//   context   left/right dual-FOFE codes            -> context_dim
//   candidate TF-IDF description (zero for NIL)     -> desc_dim
// followed by ReLU hidden layers and a two-node output
// (correct link, incorrect link). Candidates of one mention are ranked by
// a softmax over their correct-link logits.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fofelink/candidates.h"
#include "fofelink/corpus.h"
#include "fofelink/fofe.h"
#include "fofelink/kb.h"
#include "fofelink/text.h"

namespace fofelink {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 30;
  double dropout = 0.5;
  std::uint64_t seed = 42;
  std::size_t hidden_width = 256;
  ForgettingFactors alphas{0.5, 0.9};
  std::size_t tau = 20;
  std::size_t context_window = 64;
  bool char_mode = false;
  // Each step's mean gradient is rescaled to at most this L2 norm; 0 disables.
  double max_grad_norm = 5.0;

  // Throws ConfigError for out-of-range values.
  void validate() const;
};

struct RankerDims {
  std::size_t vocab = 1;
  std::size_t charset = 0;
  std::size_t word_dim = 128;
  std::size_t char_dim = 64;
  std::size_t mention_dim = 128;
  std::size_t context_dim = 256;
  std::size_t desc_dim = 128;
  std::size_t hidden = 256;
  std::size_t hidden_layers = 3;
  bool char_mode = false;

  std::size_t mention_input() const { return char_mode ? 2 * char_dim : word_dim; }
  std::size_t context_input() const { return 4 * word_dim; }
  std::size_t feature_dim() const { return mention_dim + context_dim + desc_dim; }

  bool operator==(const RankerDims&) const = default;
};

template <typename T>
struct DenseLayer {
  Matrix<T> weight;  // out x in
  Vector<T> bias;    // out
};

template <typename T>
struct BasicRankerModel {
  RankerDims dims;
  ForgettingFactors alphas;
  std::size_t context_window = 64;
  double dropout = 0.5;
  Vocabulary words{OovPolicy::kReserve};
  Vocabulary chars{OovPolicy::kReserve};

  Matrix<T> word_embedding;  // vocab x word_dim
  Matrix<T> char_embedding;  // charset x char_dim (char mode only)
  DenseLayer<T> mention_proj;
  DenseLayer<T> context_proj;
  DenseLayer<T> desc_proj;
  std::vector<DenseLayer<T>> hidden;
  DenseLayer<T> output;  // 2 x hidden

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static BasicRankerModel initialize(const RankerDims& dims, Vocabulary words,
                                     Vocabulary chars, const TrainConfig& config,
                                     std::mt19937_64& rng);

  template <typename U>
  BasicRankerModel<U> cast() const;

  // Throws ValidationError on inconsistent shapes or non-finite values.
  void validate() const;
  std::size_t parameter_count() const;

  // Calls fn(name, matrix) for every parameter tensor (biases as n x 1).
  template <typename Fn>
  void for_each_tensor(Fn&& fn);
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const;
};

using RankerModel = BasicRankerModel<float>;

double glorot_bound(std::size_t fan_in, std::size_t fan_out);

// Text-side features before projection; independent of model weights.
struct FeatureInputs {
  SparseCode mention_bow;
  SparseCode mention_chars_low;
  SparseCode mention_chars_high;
  SparseCode left_low;
  SparseCode left_high;
  SparseCode right_low;
  SparseCode right_high;
  SparseCode description;  // L2-normalized TF-IDF; empty for NIL

  bool operator==(const FeatureInputs&) const = default;
};

template <typename T>
struct FeatureVector {
  Vector<T> mention_bow_proj;
  Vector<T> context_dual_fofe_proj;
  Vector<T> kb_desc_tfidf_proj;

  Vector<T> concatenated() const;
};

// Tokenized document cached for repeated feature extraction.
struct DocumentView {
  const Document* doc = nullptr;
  std::vector<Token> tokens;

  explicit DocumentView(const Document& d);
};

// Left context (sentence tokens before the mention, nearest last) and right
// context (sentence tokens after it, scanned right-to-left so the nearest
// token is last), each truncated to `window` tokens.
std::pair<std::vector<std::string>, std::vector<std::string>> mention_contexts(
    const Mention& mention, const DocumentView& view, std::size_t window);

// L2-normalized TF-IDF vector of an entity description over `words`.
SparseCode description_vector(const KbStore& kb, std::size_t ordinal,
                              const Vocabulary& words);

template <typename T>
FeatureInputs extract_features(const Mention& mention, const DocumentView& view,
                               std::string_view candidate_id, const KbStore& kb,
                               const BasicRankerModel<T>& model);

template <typename T>
FeatureVector<T> project(const FeatureInputs& inputs,
                         const BasicRankerModel<T>& model);

template <typename T>
FeatureVector<T> featurize(const Mention& mention, const Document& doc,
                           std::string_view candidate_id, const KbStore& kb,
                           const BasicRankerModel<T>& model);

template <typename T>
struct ForwardCache {
  Vector<T> input;
  std::vector<Vector<T>> activations;  // post ReLU (and dropout) per layer
  std::vector<Vector<T>> masks;        // ReLU gate times dropout scale
};

template <typename T>
struct ForwardResult {
  Eigen::Matrix<T, 2, 1> logits;  // (correct, incorrect)
  ForwardCache<T> cache;
};

// Inference pass (no dropout). Throws DivergenceError on non-finite values.
template <typename T>
ForwardResult<T> forward(const FeatureVector<T>& fv,
                         const BasicRankerModel<T>& model);
// With training = true, inverted dropout is drawn from `rng`.
template <typename T>
ForwardResult<T> forward(const FeatureVector<T>& fv,
                         const BasicRankerModel<T>& model, bool training,
                         std::mt19937_64& rng);

// Gradients of the pair loss; embedding rows are stored sparsely.
template <typename T>
struct RankerGradients {
  std::map<std::uint32_t, Vector<T>> word_rows;
  std::map<std::uint32_t, Vector<T>> char_rows;
  DenseLayer<T> mention_proj;
  DenseLayer<T> context_proj;
  DenseLayer<T> desc_proj;
  std::vector<DenseLayer<T>> hidden;
  DenseLayer<T> output;
};

// Cross-entropy of the two-class output; label true = correct link.
template <typename T>
double pair_loss(const Eigen::Matrix<T, 2, 1>& logits, bool correct);

// Loss and full gradient for one pair. Dropout is drawn from `rng` when given.
template <typename T>
double loss_and_gradients(const FeatureInputs& inputs, bool correct,
                          const BasicRankerModel<T>& model,
                          RankerGradients<T>& grads, std::mt19937_64* rng);

// Global L2 norm over every parameter gradient.
template <typename T>
double gradient_norm(const RankerGradients<T>& grads);

template <typename T>
void apply_sgd(BasicRankerModel<T>& model, const RankerGradients<T>& grads,
               double learning_rate);

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

struct RankResult {
  std::vector<double> scores;         // correct-link logit per candidate
  std::vector<double> probabilities;  // softmax over the list
  std::size_t winner = 0;             // argmax, ties to the earlier entry
};

RankResult rank(const Mention& mention, const Document& doc,
                const CandidateList& list, const KbStore& kb,
                const RankerModel& model);
RankResult rank(const Mention& mention, const DocumentView& view,
                const CandidateList& list, const KbStore& kb,
                const RankerModel& model);
RankResult rank_scores(std::span<const double> scores);

struct TrainingMention {
  const Document* doc = nullptr;
  CandidateList candidates;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  std::size_t pairs = 0;
};

// Word vocabulary over KB names, aliases, descriptions and document text;
// character set over folded KB names, aliases and mention surfaces.
std::pair<Vocabulary, Vocabulary> build_vocabularies(
    const KbStore& kb, std::span<const Document> docs);

RankerDims default_dims(const TrainConfig& config, std::size_t vocab,
                        std::size_t charset);

// SGD on the two-class pair loss. Mentions are shuffled every epoch and each
// takes one step on the mean loss over its candidate list. Every mention's
// list must contain its gold label (gold id, or NIL).
RankerModel train(std::span<const TrainingMention> corpus,
                  std::span<const Document> docs, const TrainConfig& config,
                  const KbStore& kb,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

// Same, starting from a caller-initialized model (used by tests with small
// dimensions).
template <typename T>
void train_model(BasicRankerModel<T>& model,
                 std::span<const TrainingMention> corpus, const TrainConfig& config,
                 const KbStore& kb,
                 const std::function<void(const EpochStats&)>& on_epoch = {});

struct GradientCheckResult {
  double max_relative_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_parameter;
  std::size_t parameters_checked = 0;
};

// Relative error uses max(|analytic|, |numeric|, kGradientCheckFloor) as the
// denominator.
inline constexpr double kGradientCheckFloor = 1e-6;

// Central differences (step h) over every parameter touched by `inputs`,
// dropout disabled.
GradientCheckResult gradient_check(BasicRankerModel<double> model,
                                   const FeatureInputs& inputs, bool correct,
                                   double h = 1e-5);

// Model file: 8-byte magic, u16 version, metadata, vocabularies and a named
// tensor table (name, dims, row-major little-endian float32).
std::string serialize_model(const RankerModel& model);
RankerModel deserialize_model(std::string_view bytes);
void save_model(const std::filesystem::path& path, const RankerModel& model);
RankerModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

template <typename T>
template <typename Fn>
void BasicRankerModel<T>::for_each_tensor(Fn&& fn) {
  const auto layer = [&](const std::string& name, DenseLayer<T>& l) {
    fn(name + ".weight", l.weight);
    fn(name + ".bias", l.bias);
  };
  fn(std::string("embedding.word"), word_embedding);
  if (dims.char_mode) fn(std::string("embedding.char"), char_embedding);
  layer("proj.mention", mention_proj);
  layer("proj.context", context_proj);
  layer("proj.description", desc_proj);
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    layer("hidden." + std::to_string(i), hidden[i]);
  }
  layer("output", output);
}

template <typename T>
template <typename Fn>
void BasicRankerModel<T>::for_each_tensor(Fn&& fn) const {
  const_cast<BasicRankerModel<T>*>(this)->for_each_tensor(
      [&](const std::string& name, auto& tensor) {
        fn(name, std::as_const(tensor));
      });
}

template <typename T>
template <typename U>
BasicRankerModel<U> BasicRankerModel<T>::cast() const {
  BasicRankerModel<U> out;
  out.dims = dims;
  out.alphas = alphas;
  out.context_window = context_window;
  out.dropout = dropout;
  out.words = words;
  out.chars = chars;
  const auto layer = [](const DenseLayer<T>& l) {
    return DenseLayer<U>{l.weight.template cast<U>(), l.bias.template cast<U>()};
  };
  out.word_embedding = word_embedding.template cast<U>();
  out.char_embedding = char_embedding.template cast<U>();
  out.mention_proj = layer(mention_proj);
  out.context_proj = layer(context_proj);
  out.desc_proj = layer(desc_proj);
  for (const auto& h : hidden) out.hidden.push_back(layer(h));
  out.output = layer(output);
  return out;
}

}  // namespace fofelink
