#include "fofelink/ranker.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "fofelink/binary_io.h"
#include "fofelink/errors.h"
#include "fofelink/text.h"
#include "random.h"

namespace fofelink {

namespace {

constexpr std::string_view kModelMagic = "FOFELNKM";
constexpr std::uint16_t kModelVersion = 1;

using detail::uniform01;

template <typename T>
void glorot_fill(Matrix<T>& m, std::size_t rows, std::size_t cols,
                 std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  if (rows == 0 || cols == 0) return;
  const double bound = glorot_bound(fan_in, fan_out);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = static_cast<T>(bound * (2.0 * uniform01(rng) - 1.0));
    }
  }
}

template <typename T>
DenseLayer<T> glorot_layer(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  DenseLayer<T> layer;
  glorot_fill(layer.weight, out, in, in, out, rng);
  layer.bias = Vector<T>::Zero(static_cast<Eigen::Index>(out));
  return layer;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename T>
Vector<T> sparse_project(const SparseCode& code, const Matrix<T>& embedding) {
  Vector<T> out = Vector<T>::Zero(embedding.cols());
  for (const auto& [index, weight] : code) {
    if (index >= embedding.rows()) {
      throw ValidationError("feature index " + std::to_string(index) +
                            " outside embedding with " +
                            std::to_string(embedding.rows()) + " rows");
    }
    out.noalias() += static_cast<T>(weight) * embedding.row(index).transpose();
  }
  return out;
}

template <typename T>
void scatter_rows(std::map<std::uint32_t, Vector<T>>& rows, const SparseCode& code,
                  const Vector<T>& grad) {
  for (const auto& [index, weight] : code) {
    auto [it, inserted] = rows.try_emplace(index);
    if (inserted) it->second = Vector<T>::Zero(grad.size());
    it->second.noalias() += static_cast<T>(weight) * grad;
  }
}

SparseCode bag_of_words(std::span<const std::size_t> indices) {
  std::map<std::uint32_t, double> counts;
  for (std::size_t i : indices) counts[static_cast<std::uint32_t>(i)] += 1.0;
  return SparseCode(counts.begin(), counts.end());
}

// Pre-projection inputs kept for backpropagation.
template <typename T>
struct Projected {
  Vector<T> mention_in;
  Vector<T> context_in;
  Vector<T> desc_in;
  FeatureVector<T> fv;
};

template <typename T>
Projected<T> project_full(const FeatureInputs& in, const BasicRankerModel<T>& model) {
  const RankerDims& d = model.dims;
  Projected<T> p;
  if (d.char_mode) {
    p.mention_in.resize(static_cast<Eigen::Index>(2 * d.char_dim));
    p.mention_in << sparse_project(in.mention_chars_low, model.char_embedding),
        sparse_project(in.mention_chars_high, model.char_embedding);
  } else {
    p.mention_in = sparse_project(in.mention_bow, model.word_embedding);
  }
  p.context_in.resize(static_cast<Eigen::Index>(d.context_input()));
  p.context_in << sparse_project(in.left_low, model.word_embedding),
      sparse_project(in.left_high, model.word_embedding),
      sparse_project(in.right_low, model.word_embedding),
      sparse_project(in.right_high, model.word_embedding);
  p.desc_in = sparse_project(in.description, model.word_embedding);

  p.fv.mention_bow_proj =
      model.mention_proj.weight * p.mention_in + model.mention_proj.bias;
  p.fv.context_dual_fofe_proj =
      model.context_proj.weight * p.context_in + model.context_proj.bias;
  p.fv.kb_desc_tfidf_proj = model.desc_proj.weight * p.desc_in + model.desc_proj.bias;
  return p;
}

template <typename T>
void check_layer(const DenseLayer<T>& layer, std::size_t in, std::size_t out,
                 const std::string& name) {
  if (static_cast<std::size_t>(layer.weight.rows()) != out ||
      static_cast<std::size_t>(layer.weight.cols()) != in ||
      static_cast<std::size_t>(layer.bias.size()) != out) {
    throw ValidationError("layer " + name + " has shape " +
                          std::to_string(layer.weight.rows()) + "x" +
                          std::to_string(layer.weight.cols()) + ", expected " +
                          std::to_string(out) + "x" + std::to_string(in));
  }
}

template <typename T>
void zero_like(DenseLayer<T>& g, const DenseLayer<T>& layer) {
  g.weight.setZero(layer.weight.rows(), layer.weight.cols());
  g.bias.setZero(layer.bias.size());
}

SparseCode cached_description(const KbStore& kb, std::string_view candidate_id,
                              const Vocabulary& words,
                              std::map<std::string, SparseCode, std::less<>>* cache) {
  if (candidate_id == kNilId) return {};
  if (cache) {
    if (auto it = cache->find(candidate_id); it != cache->end()) return it->second;
  }
  const auto ordinal = kb.ordinal(candidate_id);
  if (!ordinal) {
    throw ValidationError("candidate '" + std::string(candidate_id) +
                          "' is not in the knowledge base");
  }
  SparseCode code = description_vector(kb, *ordinal, words);
  if (cache) cache->emplace(std::string(candidate_id), code);
  return code;
}

template <typename T>
FeatureInputs extract_with_cache(
    const Mention& mention, const DocumentView& view, std::string_view candidate_id,
    const KbStore& kb, const BasicRankerModel<T>& model,
    std::map<std::string, SparseCode, std::less<>>* cache) {
  FeatureInputs in;
  const std::vector<std::string> words = tokenize_words(mention.surface);
  in.mention_bow = bag_of_words(model.words.lookup(words));
  if (model.dims.char_mode) {
    const std::vector<std::string> chars = split_code_points(fold_case(mention.surface));
    const std::vector<std::size_t> idx = model.chars.lookup(chars);
    in.mention_chars_low = encode_sparse(idx, model.alphas.low);
    in.mention_chars_high = encode_sparse(idx, model.alphas.high);
  }
  const auto [left, right] = mention_contexts(mention, view, model.context_window);
  const std::vector<std::size_t> left_idx = model.words.lookup(left);
  const std::vector<std::size_t> right_idx = model.words.lookup(right);
  in.left_low = encode_sparse(left_idx, model.alphas.low);
  in.left_high = encode_sparse(left_idx, model.alphas.high);
  in.right_low = encode_sparse(right_idx, model.alphas.low);
  in.right_high = encode_sparse(right_idx, model.alphas.high);
  in.description = cached_description(kb, candidate_id, model.words, cache);
  return in;
}

template <typename T>
void add_gradients(RankerGradients<T>& sum, const RankerGradients<T>& g) {
  const auto add = [](DenseLayer<T>& a, const DenseLayer<T>& b) {
    a.weight += b.weight;
    a.bias += b.bias;
  };
  add(sum.mention_proj, g.mention_proj);
  add(sum.context_proj, g.context_proj);
  add(sum.desc_proj, g.desc_proj);
  for (std::size_t l = 0; l < sum.hidden.size(); ++l) add(sum.hidden[l], g.hidden[l]);
  add(sum.output, g.output);
  const auto merge = [](std::map<std::uint32_t, Vector<T>>& a,
                        const std::map<std::uint32_t, Vector<T>>& b) {
    for (const auto& [row, v] : b) {
      auto [it, inserted] = a.try_emplace(row, v);
      if (!inserted) it->second += v;
    }
  };
  merge(sum.word_rows, g.word_rows);
  merge(sum.char_rows, g.char_rows);
}

template <typename T>
double loss_of(const FeatureInputs& inputs, bool correct,
               const BasicRankerModel<T>& model) {
  return pair_loss<T>(forward(project(inputs, model), model).logits, correct);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration and model

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be > 0");
  }
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("dropout must lie in [0, 1)");
  }
  if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
  if (tau < 1) throw ConfigError("tau must be >= 1");
  if (context_window < 1) throw ConfigError("context_window must be >= 1");
  if (!(max_grad_norm >= 0.0) || !std::isfinite(max_grad_norm)) {
    throw ConfigError("max_grad_norm must be >= 0");
  }
  validate_alphas(alphas);
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <typename T>
BasicRankerModel<T> BasicRankerModel<T>::initialize(const RankerDims& dims,
                                                    Vocabulary words,
                                                    Vocabulary chars,
                                                    const TrainConfig& config,
                                                    std::mt19937_64& rng) {
  if (dims.vocab != words.size()) {
    throw ConfigError("vocab dimension does not match the word vocabulary");
  }
  if (dims.char_mode && dims.charset != chars.size()) {
    throw ConfigError("charset dimension does not match the character set");
  }
  validate_alphas(config.alphas);
  BasicRankerModel<T> m;
  m.dims = dims;
  m.alphas = config.alphas;
  m.context_window = config.context_window;
  m.dropout = config.dropout;
  m.words = std::move(words);
  m.chars = std::move(chars);
  if (!dims.char_mode) {
    m.dims.charset = 0;
    m.chars = Vocabulary(OovPolicy::kReserve);
  }

  glorot_fill(m.word_embedding, dims.vocab, dims.word_dim, dims.vocab,
              dims.word_dim, rng);
  if (dims.char_mode) {
    glorot_fill(m.char_embedding, dims.charset, dims.char_dim, dims.charset,
                dims.char_dim, rng);
  } else {
    m.char_embedding.resize(0, static_cast<Eigen::Index>(dims.char_dim));
  }
  m.mention_proj = glorot_layer<T>(dims.mention_input(), dims.mention_dim, rng);
  m.context_proj = glorot_layer<T>(dims.context_input(), dims.context_dim, rng);
  m.desc_proj = glorot_layer<T>(dims.word_dim, dims.desc_dim, rng);
  std::size_t in = dims.feature_dim();
  for (std::size_t l = 0; l < dims.hidden_layers; ++l) {
    m.hidden.push_back(glorot_layer<T>(in, dims.hidden, rng));
    in = dims.hidden;
  }
  m.output = glorot_layer<T>(in, 2, rng);
  return m;
}

template <typename T>
void BasicRankerModel<T>::validate() const {
  if (word_embedding.rows() != static_cast<Eigen::Index>(dims.vocab) ||
      word_embedding.cols() != static_cast<Eigen::Index>(dims.word_dim) ||
      words.size() != dims.vocab) {
    throw ValidationError("word embedding shape does not match dimensions");
  }
  if (dims.char_mode &&
      (char_embedding.rows() != static_cast<Eigen::Index>(dims.charset) ||
       char_embedding.cols() != static_cast<Eigen::Index>(dims.char_dim) ||
       chars.size() != dims.charset)) {
    throw ValidationError("char embedding shape does not match dimensions");
  }
  check_layer(mention_proj, dims.mention_input(), dims.mention_dim, "proj.mention");
  check_layer(context_proj, dims.context_input(), dims.context_dim, "proj.context");
  check_layer(desc_proj, dims.word_dim, dims.desc_dim, "proj.description");
  if (hidden.size() != dims.hidden_layers || dims.hidden_layers == 0) {
    throw ValidationError("hidden layer count does not match dimensions");
  }
  std::size_t in = dims.feature_dim();
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    check_layer(hidden[l], in, dims.hidden, "hidden." + std::to_string(l));
    in = dims.hidden;
  }
  check_layer(output, in, 2, "output");
  validate_alphas(alphas);
  for_each_tensor([](const std::string& name, const auto& tensor) {
    if (!all_finite(tensor)) {
      throw ValidationError("tensor " + name + " has non-finite values");
    }
  });
}

template <typename T>
std::size_t BasicRankerModel<T>::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::string&, const auto& tensor) {
    n += static_cast<std::size_t>(tensor.size());
  });
  return n;
}

// ---------------------------------------------------------------------------
// Features

template <typename T>
Vector<T> FeatureVector<T>::concatenated() const {
  Vector<T> out(mention_bow_proj.size() + context_dual_fofe_proj.size() +
                kb_desc_tfidf_proj.size());
  out << mention_bow_proj, context_dual_fofe_proj, kb_desc_tfidf_proj;
  return out;
}

DocumentView::DocumentView(const Document& d) : doc(&d), tokens(tokenize(d.text)) {}

std::pair<std::vector<std::string>, std::vector<std::string>> mention_contexts(
    const Mention& mention, const DocumentView& view, std::size_t window) {
  const std::vector<Token>& tokens = view.tokens;
  std::optional<std::size_t> sentence;
  for (const Token& t : tokens) {
    if (t.begin >= mention.start && t.end <= mention.end) {
      sentence = t.sentence;
      break;
    }
  }
  if (!sentence) {
    for (const Token& t : tokens) {
      if (t.end <= mention.start) sentence = t.sentence;
    }
  }
  std::vector<std::string> left;
  std::vector<std::string> right;
  if (!sentence) return {left, right};
  for (const Token& t : tokens) {
    if (t.sentence != *sentence) continue;
    if (t.end <= mention.start) left.push_back(t.text);
    if (t.begin >= mention.end && right.size() < window) right.push_back(t.text);
  }
  if (left.size() > window) {
    left.erase(left.begin(), left.end() - static_cast<std::ptrdiff_t>(window));
  }
  std::reverse(right.begin(), right.end());
  return {left, right};
}

SparseCode description_vector(const KbStore& kb, std::size_t ordinal,
                              const Vocabulary& words) {
  std::map<std::uint32_t, double> weights;
  for (const auto& [term, weight] : kb.description_tfidf(ordinal)) {
    weights[static_cast<std::uint32_t>(words.lookup(term))] += weight;
  }
  double norm = 0.0;
  for (const auto& [index, w] : weights) norm += w * w;
  norm = std::sqrt(norm);
  SparseCode out;
  out.reserve(weights.size());
  for (const auto& [index, w] : weights) {
    if (w != 0.0) out.emplace_back(index, w / norm);
  }
  return out;
}

template <typename T>
FeatureInputs extract_features(const Mention& mention, const DocumentView& view,
                               std::string_view candidate_id, const KbStore& kb,
                               const BasicRankerModel<T>& model) {
  return extract_with_cache(mention, view, candidate_id, kb, model, nullptr);
}

template <typename T>
FeatureVector<T> project(const FeatureInputs& inputs,
                         const BasicRankerModel<T>& model) {
  return project_full(inputs, model).fv;
}

template <typename T>
FeatureVector<T> featurize(const Mention& mention, const Document& doc,
                           std::string_view candidate_id, const KbStore& kb,
                           const BasicRankerModel<T>& model) {
  const DocumentView view(doc);
  return project(extract_features(mention, view, candidate_id, kb, model), model);
}

// ---------------------------------------------------------------------------
// Network

namespace {

template <typename T>
ForwardResult<T> run_forward(const FeatureVector<T>& fv,
                             const BasicRankerModel<T>& model,
                             std::mt19937_64* rng) {
  ForwardResult<T> result;
  ForwardCache<T>& cache = result.cache;
  cache.input = fv.concatenated();
  if (cache.input.size() != static_cast<Eigen::Index>(model.dims.feature_dim())) {
    throw ValidationError("feature vector has " +
                          std::to_string(cache.input.size()) +
                          " components, model expects " +
                          std::to_string(model.dims.feature_dim()));
  }
  const double p = model.dropout;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  const Vector<T>* in = &cache.input;
  for (const DenseLayer<T>& layer : model.hidden) {
    Vector<T> pre = layer.weight * *in + layer.bias;
    Vector<T> mask(pre.size());
    for (Eigen::Index j = 0; j < pre.size(); ++j) {
      T gate = pre[j] > T(0) ? T(1) : T(0);
      if (rng && p > 0.0) gate *= uniform01(*rng) < p ? T(0) : keep_scale;
      mask[j] = gate;
    }
    cache.activations.push_back(pre.cwiseProduct(mask));
    cache.masks.push_back(std::move(mask));
    in = &cache.activations.back();
  }
  result.logits = model.output.weight * *in + model.output.bias;
  if (!result.logits.allFinite() || !in->allFinite()) {
    throw DivergenceError("non-finite activation in ranker forward pass");
  }
  return result;
}

}  // namespace

template <typename T>
ForwardResult<T> forward(const FeatureVector<T>& fv,
                         const BasicRankerModel<T>& model) {
  return run_forward(fv, model, nullptr);
}

template <typename T>
ForwardResult<T> forward(const FeatureVector<T>& fv,
                         const BasicRankerModel<T>& model, bool training,
                         std::mt19937_64& rng) {
  return run_forward(fv, model, training ? &rng : nullptr);
}

template <typename T>
double pair_loss(const Eigen::Matrix<T, 2, 1>& logits, bool correct) {
  const double a = static_cast<double>(logits[0]);
  const double b = static_cast<double>(logits[1]);
  const double m = std::max(a, b);
  const double lse = m + std::log(std::exp(a - m) + std::exp(b - m));
  return lse - (correct ? a : b);
}

template <typename T>
double loss_and_gradients(const FeatureInputs& inputs, bool correct,
                          const BasicRankerModel<T>& model,
                          RankerGradients<T>& grads, std::mt19937_64* rng) {
  const RankerDims& d = model.dims;
  const Projected<T> pr = project_full(inputs, model);
  const ForwardResult<T> fr = run_forward(pr.fv, model, rng);
  const double loss = pair_loss<T>(fr.logits, correct);

  // d loss / d logits = softmax - onehot(target)
  const double a = static_cast<double>(fr.logits[0]);
  const double b = static_cast<double>(fr.logits[1]);
  const double m = std::max(a, b);
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  Eigen::Matrix<T, 2, 1> dlogits;
  dlogits << static_cast<T>(ea / (ea + eb) - (correct ? 1.0 : 0.0)),
      static_cast<T>(eb / (ea + eb) - (correct ? 0.0 : 1.0));

  const std::size_t layers = model.hidden.size();
  grads.hidden.resize(layers);
  const Vector<T>& last = fr.cache.activations.back();
  grads.output.weight.noalias() = dlogits * last.transpose();
  grads.output.bias = dlogits;
  Vector<T> delta = model.output.weight.transpose() * dlogits;
  for (std::size_t l = layers; l-- > 0;) {
    const Vector<T> dpre = delta.cwiseProduct(fr.cache.masks[l]);
    const Vector<T>& in = l == 0 ? fr.cache.input : fr.cache.activations[l - 1];
    grads.hidden[l].weight.noalias() = dpre * in.transpose();
    grads.hidden[l].bias = dpre;
    delta.noalias() = model.hidden[l].weight.transpose() * dpre;
  }

  const auto md = static_cast<Eigen::Index>(d.mention_dim);
  const auto cd = static_cast<Eigen::Index>(d.context_dim);
  const auto dd = static_cast<Eigen::Index>(d.desc_dim);
  const Vector<T> d_mention = delta.head(md);
  const Vector<T> d_context = delta.segment(md, cd);
  const Vector<T> d_desc = delta.tail(dd);

  grads.mention_proj.weight.noalias() = d_mention * pr.mention_in.transpose();
  grads.mention_proj.bias = d_mention;
  grads.context_proj.weight.noalias() = d_context * pr.context_in.transpose();
  grads.context_proj.bias = d_context;
  grads.desc_proj.weight.noalias() = d_desc * pr.desc_in.transpose();
  grads.desc_proj.bias = d_desc;

  const Vector<T> d_mention_in = model.mention_proj.weight.transpose() * d_mention;
  const Vector<T> d_context_in = model.context_proj.weight.transpose() * d_context;
  const Vector<T> d_desc_in = model.desc_proj.weight.transpose() * d_desc;

  grads.word_rows.clear();
  grads.char_rows.clear();
  if (d.char_mode) {
    const auto cdim = static_cast<Eigen::Index>(d.char_dim);
    scatter_rows<T>(grads.char_rows, inputs.mention_chars_low,
                    d_mention_in.head(cdim));
    scatter_rows<T>(grads.char_rows, inputs.mention_chars_high,
                    d_mention_in.tail(cdim));
  } else {
    scatter_rows<T>(grads.word_rows, inputs.mention_bow, d_mention_in);
  }
  const auto wd = static_cast<Eigen::Index>(d.word_dim);
  scatter_rows<T>(grads.word_rows, inputs.left_low, d_context_in.segment(0, wd));
  scatter_rows<T>(grads.word_rows, inputs.left_high, d_context_in.segment(wd, wd));
  scatter_rows<T>(grads.word_rows, inputs.right_low,
                  d_context_in.segment(2 * wd, wd));
  scatter_rows<T>(grads.word_rows, inputs.right_high,
                  d_context_in.segment(3 * wd, wd));
  scatter_rows<T>(grads.word_rows, inputs.description, d_desc_in);
  return loss;
}

template <typename T>
double gradient_norm(const RankerGradients<T>& grads) {
  double sq = 0.0;
  const auto layer = [&](const DenseLayer<T>& l) {
    sq += static_cast<double>(l.weight.squaredNorm()) +
          static_cast<double>(l.bias.squaredNorm());
  };
  layer(grads.mention_proj);
  layer(grads.context_proj);
  layer(grads.desc_proj);
  for (const auto& h : grads.hidden) layer(h);
  layer(grads.output);
  for (const auto& [row, g] : grads.word_rows) sq += static_cast<double>(g.squaredNorm());
  for (const auto& [row, g] : grads.char_rows) sq += static_cast<double>(g.squaredNorm());
  return std::sqrt(sq);
}

template <typename T>
void apply_sgd(BasicRankerModel<T>& model, const RankerGradients<T>& grads,
               double learning_rate) {
  const T lr = static_cast<T>(learning_rate);
  const auto step = [lr](DenseLayer<T>& layer, const DenseLayer<T>& g) {
    layer.weight.noalias() -= lr * g.weight;
    layer.bias.noalias() -= lr * g.bias;
  };
  step(model.output, grads.output);
  for (std::size_t l = 0; l < model.hidden.size(); ++l) {
    step(model.hidden[l], grads.hidden[l]);
  }
  step(model.mention_proj, grads.mention_proj);
  step(model.context_proj, grads.context_proj);
  step(model.desc_proj, grads.desc_proj);
  for (const auto& [row, g] : grads.word_rows) {
    model.word_embedding.row(row).noalias() -= lr * g.transpose();
  }
  for (const auto& [row, g] : grads.char_rows) {
    model.char_embedding.row(row).noalias() -= lr * g.transpose();
  }
}

// ---------------------------------------------------------------------------
// Ranking

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double m = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

RankResult rank_scores(std::span<const double> scores) {
  RankResult result;
  result.scores.assign(scores.begin(), scores.end());
  result.probabilities = softmax(scores);
  for (std::size_t k = 1; k < result.probabilities.size(); ++k) {
    if (result.probabilities[k] > result.probabilities[result.winner]) {
      result.winner = k;
    }
  }
  return result;
}

RankResult rank(const Mention& mention, const DocumentView& view,
                const CandidateList& list, const KbStore& kb,
                const RankerModel& model) {
  if (list.candidates.empty()) {
    throw ValidationError("cannot rank an empty candidate list");
  }
  std::vector<double> scores;
  scores.reserve(list.candidates.size());
  for (const ScoredCandidate& c : list.candidates) {
    const FeatureInputs in = extract_features(mention, view, c.entity_id, kb, model);
    scores.push_back(static_cast<double>(forward(project(in, model), model).logits[0]));
  }
  return rank_scores(scores);
}

RankResult rank(const Mention& mention, const Document& doc,
                const CandidateList& list, const KbStore& kb,
                const RankerModel& model) {
  return rank(mention, DocumentView(doc), list, kb, model);
}

// ---------------------------------------------------------------------------
// Training

std::pair<Vocabulary, Vocabulary> build_vocabularies(
    const KbStore& kb, std::span<const Document> docs) {
  std::set<std::string> words;
  std::set<std::string> chars;
  const auto add_words = [&](std::string_view text) {
    for (std::string& w : tokenize_words(text)) words.insert(std::move(w));
  };
  const auto add_chars = [&](std::string_view text) {
    for (std::string& c : split_code_points(fold_case(text))) chars.insert(std::move(c));
  };
  for (const KbEntity& e : kb.entities()) {
    add_words(e.name);
    add_chars(e.name);
    for (const std::string& a : e.aliases) {
      add_words(a);
      add_chars(a);
    }
    add_words(e.description);
  }
  for (const Document& doc : docs) {
    add_words(doc.text);
    for (const Mention& m : doc.mentions) add_chars(m.surface);
  }
  words.erase(std::string(Vocabulary::kOovToken));
  chars.erase(std::string(Vocabulary::kOovToken));
  Vocabulary word_vocab(OovPolicy::kReserve);
  for (const std::string& w : words) word_vocab.add(w);
  Vocabulary char_vocab(OovPolicy::kReserve);
  for (const std::string& c : chars) char_vocab.add(c);
  return {std::move(word_vocab), std::move(char_vocab)};
}

RankerDims default_dims(const TrainConfig& config, std::size_t vocab,
                        std::size_t charset) {
  RankerDims dims;
  dims.vocab = vocab;
  dims.charset = config.char_mode ? charset : 0;
  dims.hidden = config.hidden_width;
  dims.char_mode = config.char_mode;
  return dims;
}

template <typename T>
void train_model(BasicRankerModel<T>& model,
                 std::span<const TrainingMention> corpus, const TrainConfig& config,
                 const KbStore& kb,
                 const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  model.validate();
  model.dropout = config.dropout;

  // One SGD step per mention on the mean pair loss of its candidate list.
  struct Pair {
    FeatureInputs inputs;
    bool correct;
  };
  std::vector<std::vector<Pair>> groups;
  std::map<const Document*, DocumentView> views;
  std::map<std::string, SparseCode, std::less<>> descriptions;
  std::size_t pair_count = 0;
  for (const TrainingMention& tm : corpus) {
    if (!tm.doc) throw ValidationError("training mention without a document");
    const Mention& m = tm.candidates.mention;
    const std::string gold = m.gold_id.value_or(std::string(kNilId));
    if (!tm.candidates.contains(gold)) {
      throw ValidationError("training mention " + m.doc_id + ":" +
                            std::to_string(m.start) + " lacks its gold label '" +
                            gold + "' in the candidate list");
    }
    auto it = views.find(tm.doc);
    if (it == views.end()) it = views.emplace(tm.doc, DocumentView(*tm.doc)).first;
    std::vector<Pair>& group = groups.emplace_back();
    for (const ScoredCandidate& c : tm.candidates.candidates) {
      group.push_back({extract_with_cache(m, it->second, c.entity_id, kb, model,
                                          &descriptions),
                       c.entity_id == gold});
    }
    pair_count += group.size();
  }
  if (pair_count == 0) throw ValidationError("no training pairs");

  std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RankerGradients<T> grads;
  RankerGradients<T> sum;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    detail::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const std::vector<Pair>& group = groups[idx];
      for (std::size_t k = 0; k < group.size(); ++k) {
        const double loss =
            loss_and_gradients(group[k].inputs, group[k].correct, model, grads, &rng);
        if (!std::isfinite(loss)) {
          throw DivergenceError("non-finite training loss in epoch " +
                                std::to_string(epoch));
        }
        total += loss;
        if (k == 0) {
          sum = grads;
        } else {
          add_gradients(sum, grads);
        }
      }
      double rate = config.learning_rate / static_cast<double>(group.size());
      if (config.max_grad_norm > 0.0) {
        const double norm = gradient_norm(sum) / static_cast<double>(group.size());
        if (norm > config.max_grad_norm) rate *= config.max_grad_norm / norm;
      }
      apply_sgd(model, sum, rate);
    }
    if (on_epoch) {
      on_epoch({epoch, total / static_cast<double>(pair_count), pair_count});
    }
  }
  model.validate();
}

RankerModel train(std::span<const TrainingMention> corpus,
                  std::span<const Document> docs, const TrainConfig& config,
                  const KbStore& kb,
                  const std::function<void(const EpochStats&)>& on_epoch) {
  config.validate();
  auto [words, chars] = build_vocabularies(kb, docs);
  std::mt19937_64 rng(config.seed);
  const RankerDims dims = default_dims(config, words.size(), chars.size());
  RankerModel model =
      RankerModel::initialize(dims, std::move(words), std::move(chars), config, rng);
  train_model(model, corpus, config, kb, on_epoch);
  return model;
}

// ---------------------------------------------------------------------------
// Gradient check

GradientCheckResult gradient_check(BasicRankerModel<double> model,
                                   const FeatureInputs& inputs, bool correct,
                                   double h) {
  model.dropout = 0.0;
  RankerGradients<double> grads;
  loss_and_gradients(inputs, correct, model, grads, nullptr);

  // Dense copy of the gradient laid out like the model.
  BasicRankerModel<double> dense = model;
  dense.for_each_tensor([](const std::string&, auto& t) { t.setZero(); });
  for (const auto& [row, g] : grads.word_rows) {
    dense.word_embedding.row(row) = g.transpose();
  }
  for (const auto& [row, g] : grads.char_rows) {
    dense.char_embedding.row(row) = g.transpose();
  }
  dense.mention_proj = grads.mention_proj;
  dense.context_proj = grads.context_proj;
  dense.desc_proj = grads.desc_proj;
  dense.hidden = grads.hidden;
  dense.output = grads.output;

  struct Slot {
    std::string name;
    double* data;
    Eigen::Index size;
  };
  std::vector<Slot> params;
  std::vector<Slot> analytic;
  model.for_each_tensor([&](const std::string& name, auto& t) {
    params.push_back({name, t.data(), t.size()});
  });
  dense.for_each_tensor([&](const std::string& name, auto& t) {
    analytic.push_back({name, t.data(), t.size()});
  });

  GradientCheckResult result;
  for (std::size_t s = 0; s < params.size(); ++s) {
    for (Eigen::Index i = 0; i < params[s].size; ++i) {
      double& theta = params[s].data[i];
      const double saved = theta;
      theta = saved + h;
      const double up = loss_of(inputs, correct, model);
      theta = saved - h;
      const double down = loss_of(inputs, correct, model);
      theta = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = analytic[s].data[i];
      const double abs_err = std::abs(numeric - exact);
      const double rel = abs_err / std::max({std::abs(numeric), std::abs(exact),
                                             kGradientCheckFloor});
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = params[s].name + "[" + std::to_string(i) + "]";
      }
      ++result.parameters_checked;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_number(const std::map<std::string, std::string>& meta,
                    const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw ValidationError("model metadata lacks '" + key + "'");
  double v = 0.0;
  const std::string& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("model metadata '" + key + "' is not a number");
  }
  return v;
}

std::size_t parse_size(const std::map<std::string, std::string>& meta,
                       const std::string& key) {
  const double v = parse_number(meta, key);
  if (v < 0 || v != std::floor(v)) {
    throw ValidationError("model metadata '" + key + "' is not a count");
  }
  return static_cast<std::size_t>(v);
}

void write_vocab(BinaryWriter& out, const Vocabulary& vocab) {
  out.write_u8(vocab.reserves_oov() ? 1 : 0);
  out.write_u32(static_cast<std::uint32_t>(vocab.size()));
  for (const std::string& t : vocab.tokens()) out.write_string(t);
}

Vocabulary read_vocab(std::string_view payload) {
  BinaryReader in(payload);
  const bool oov = in.read_u8() != 0;
  const std::uint32_t n = in.read_u32();
  Vocabulary vocab(oov ? OovPolicy::kReserve : OovPolicy::kReject);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::string token = in.read_string();
    if (oov && i == 0) {
      if (token != Vocabulary::kOovToken) {
        throw ValidationError("vocabulary does not start with the OOV token");
      }
      continue;
    }
    if (vocab.add(token) != i) throw ValidationError("duplicate vocabulary token");
  }
  return vocab;
}

}  // namespace

std::string serialize_model(const RankerModel& model) {
  model.validate();
  BinaryWriter out;
  out.write_bytes(kModelMagic);
  out.write_u16(kModelVersion);

  const RankerDims& d = model.dims;
  const std::vector<std::pair<std::string, std::string>> meta = {
      {"alpha_high", format_number(model.alphas.high)},
      {"alpha_low", format_number(model.alphas.low)},
      {"char_dim", std::to_string(d.char_dim)},
      {"char_mode", d.char_mode ? "1" : "0"},
      {"charset", std::to_string(d.charset)},
      {"context_dim", std::to_string(d.context_dim)},
      {"context_window", std::to_string(model.context_window)},
      {"desc_dim", std::to_string(d.desc_dim)},
      {"dropout", format_number(model.dropout)},
      {"hidden", std::to_string(d.hidden)},
      {"hidden_layers", std::to_string(d.hidden_layers)},
      {"mention_dim", std::to_string(d.mention_dim)},
      {"vocab", std::to_string(d.vocab)},
      {"word_dim", std::to_string(d.word_dim)},
  };
  BinaryWriter meta_section;
  meta_section.write_u32(static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    meta_section.write_string(k);
    meta_section.write_string(v);
  }
  out.write_section("META", meta_section);

  BinaryWriter words;
  write_vocab(words, model.words);
  out.write_section("VOCW", words);
  BinaryWriter chars;
  write_vocab(chars, model.chars);
  out.write_section("VOCC", chars);

  BinaryWriter tensors;
  std::uint32_t count = 0;
  model.for_each_tensor([&](const std::string&, const auto&) { ++count; });
  tensors.write_u32(count);
  model.for_each_tensor([&](const std::string& name, const auto& t) {
    tensors.write_string(name);
    tensors.write_u32(2);
    tensors.write_u32(static_cast<std::uint32_t>(t.rows()));
    tensors.write_u32(static_cast<std::uint32_t>(t.cols()));
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) tensors.write_f32(t(r, c));
    }
  });
  out.write_section("TENS", tensors);
  return out.data();
}

RankerModel deserialize_model(std::string_view bytes) {
  BinaryReader in(bytes);
  if (in.read_bytes(kModelMagic.size()) != kModelMagic) {
    throw ValidationError("not a ranker model file (bad magic)");
  }
  const std::uint16_t version = in.read_u16();
  if (version != kModelVersion) {
    throw ValidationError("unsupported model version " + std::to_string(version));
  }
  std::map<std::string, std::string_view> sections;
  while (!in.at_end()) {
    auto s = in.read_section();
    sections[s.tag] = s.payload;
  }
  for (const char* tag : {"META", "VOCW", "VOCC", "TENS"}) {
    if (!sections.contains(tag)) {
      throw ValidationError(std::string("model file missing section ") + tag);
    }
  }

  std::map<std::string, std::string> meta;
  {
    BinaryReader r(sections["META"]);
    const std::uint32_t n = r.read_u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      std::string k = r.read_string();
      meta[std::move(k)] = r.read_string();
    }
  }

  RankerModel model;
  RankerDims& d = model.dims;
  d.vocab = parse_size(meta, "vocab");
  d.charset = parse_size(meta, "charset");
  d.word_dim = parse_size(meta, "word_dim");
  d.char_dim = parse_size(meta, "char_dim");
  d.mention_dim = parse_size(meta, "mention_dim");
  d.context_dim = parse_size(meta, "context_dim");
  d.desc_dim = parse_size(meta, "desc_dim");
  d.hidden = parse_size(meta, "hidden");
  d.hidden_layers = parse_size(meta, "hidden_layers");
  d.char_mode = parse_size(meta, "char_mode") != 0;
  model.alphas = {parse_number(meta, "alpha_low"), parse_number(meta, "alpha_high")};
  model.context_window = parse_size(meta, "context_window");
  model.dropout = parse_number(meta, "dropout");
  model.words = read_vocab(sections["VOCW"]);
  model.chars = read_vocab(sections["VOCC"]);

  std::map<std::string, std::pair<std::vector<std::uint32_t>, std::string_view>> table;
  {
    BinaryReader r(sections["TENS"]);
    const std::uint32_t n = r.read_u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      std::string name = r.read_string();
      std::vector<std::uint32_t> dims(r.read_u32());
      std::uint64_t elements = 1;
      for (std::uint32_t& x : dims) {
        x = r.read_u32();
        elements *= x;
      }
      table[std::move(name)] = {dims, r.read_bytes(elements * 4)};
    }
  }

  // Shape every tensor from the metadata, then fill from the table.
  const auto shape_layer = [](DenseLayer<float>& l, std::size_t in, std::size_t out) {
    l.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    l.bias.resize(static_cast<Eigen::Index>(out));
  };
  model.word_embedding.resize(static_cast<Eigen::Index>(d.vocab),
                              static_cast<Eigen::Index>(d.word_dim));
  model.char_embedding.resize(static_cast<Eigen::Index>(d.char_mode ? d.charset : 0),
                              static_cast<Eigen::Index>(d.char_dim));
  shape_layer(model.mention_proj, d.mention_input(), d.mention_dim);
  shape_layer(model.context_proj, d.context_input(), d.context_dim);
  shape_layer(model.desc_proj, d.word_dim, d.desc_dim);
  model.hidden.resize(d.hidden_layers);
  std::size_t fan_in = d.feature_dim();
  for (auto& h : model.hidden) {
    shape_layer(h, fan_in, d.hidden);
    fan_in = d.hidden;
  }
  shape_layer(model.output, fan_in, 2);

  std::size_t used = 0;
  model.for_each_tensor([&](const std::string& name, auto& t) {
    auto it = table.find(name);
    if (it == table.end()) throw ValidationError("model file lacks tensor " + name);
    const auto& [dims, raw] = it->second;
    if (dims.size() != 2 || dims[0] != t.rows() || dims[1] != t.cols()) {
      throw ValidationError("tensor " + name + " has unexpected shape");
    }
    BinaryReader r(raw);
    for (Eigen::Index row = 0; row < t.rows(); ++row) {
      for (Eigen::Index col = 0; col < t.cols(); ++col) t(row, col) = r.read_f32();
    }
    ++used;
  });
  if (used != table.size()) throw ValidationError("model file has unknown tensors");
  model.validate();
  return model;
}

void save_model(const std::filesystem::path& path, const RankerModel& model) {
  write_file(path, serialize_model(model));
}

RankerModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file(path));
}

// ---------------------------------------------------------------------------
// Explicit instantiations

#define FOFELINK_INSTANTIATE(T)                                                   \
  template struct BasicRankerModel<T>;                                            \
  template struct FeatureVector<T>;                                               \
  template FeatureInputs extract_features<T>(const Mention&, const DocumentView&, \
                                             std::string_view, const KbStore&,    \
                                             const BasicRankerModel<T>&);         \
  template FeatureVector<T> project<T>(const FeatureInputs&,                      \
                                       const BasicRankerModel<T>&);               \
  template FeatureVector<T> featurize<T>(const Mention&, const Document&,         \
                                         std::string_view, const KbStore&,        \
                                         const BasicRankerModel<T>&);             \
  template ForwardResult<T> forward<T>(const FeatureVector<T>&,                   \
                                       const BasicRankerModel<T>&);               \
  template ForwardResult<T> forward<T>(const FeatureVector<T>&,                   \
                                       const BasicRankerModel<T>&, bool,          \
                                       std::mt19937_64&);                         \
  template double pair_loss<T>(const Eigen::Matrix<T, 2, 1>&, bool);              \
  template double loss_and_gradients<T>(const FeatureInputs&, bool,               \
                                        const BasicRankerModel<T>&,               \
                                        RankerGradients<T>&, std::mt19937_64*);   \
  template double gradient_norm<T>(const RankerGradients<T>&);                    \
  template void apply_sgd<T>(BasicRankerModel<T>&, const RankerGradients<T>&,     \
                             double);                                             \
  template void train_model<T>(BasicRankerModel<T>&,                              \
                               std::span<const TrainingMention>,                  \
                               const TrainConfig&, const KbStore&,                \
                               const std::function<void(const EpochStats&)>&);

FOFELINK_INSTANTIATE(float)
FOFELINK_INSTANTIATE(double)

#undef FOFELINK_INSTANTIATE

}  // namespace fofelink
