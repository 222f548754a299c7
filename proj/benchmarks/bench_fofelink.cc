#include <benchmark/benchmark.h>

#include <random>

#include "fofelink/candidates.h"
#include "fofelink/eval.h"
#include "fofelink/fofe.h"
#include "fofelink/pipeline.h"
#include "fofelink/ranker.h"
#include "fofelink/synth.h"

namespace {

using namespace fofelink;

// Shared synthetic world at the shipped scale.
struct World {
  SyntheticData data = synthesize(SyntheticSpec{});
  KbStore kb = KbStore::from_entities(data.entities);
  std::vector<CandidateList> lists = generate_corpus_candidates(data.docs, kb, {});
};

const World& world() {
  static const World w;
  return w;
}

void BM_FofeEncodeProjected(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const Eigen::MatrixXf e = Eigen::MatrixXf::Random(5000, 128);
  std::vector<std::size_t> seq(len);
  for (auto& s : seq) s = std::uniform_int_distribution<std::size_t>(0, 4999)(rng);
  for (auto _ : state) benchmark::DoNotOptimize(encode_projected(seq, e, 0.9));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(len));
}
BENCHMARK(BM_FofeEncodeProjected)->Arg(8)->Arg(64)->Arg(512);

void BM_FuzzyLookup(benchmark::State& state) {
  const World& w = world();
  std::size_t i = 0;
  for (auto _ : state) {
    const Document& d = w.data.docs[i++ % w.data.docs.size()];
    for (const Mention& m : d.mentions) benchmark::DoNotOptimize(w.kb.lookup_fuzzy(m.surface));
  }
}
BENCHMARK(BM_FuzzyLookup);

void BM_GenerateCandidates(benchmark::State& state) {
  const World& w = world();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        generate_candidates(w.data.docs[i++ % w.data.docs.size()], w.kb, {}));
  }
}
BENCHMARK(BM_GenerateCandidates);

void BM_Distill(benchmark::State& state) {
  const World& w = world();
  const Document& doc = w.data.docs.front();
  std::vector<RawCandidates> raw;
  for (const Mention& m : doc.mentions) {
    raw.push_back(generate_raw(extend_mention(m, doc, w.kb, {}), w.kb, 50));
  }
  const DocCandidateGraph g = build_graph(raw, w.kb);
  for (auto _ : state) benchmark::DoNotOptimize(distill(g, 20));
}
BENCHMARK(BM_Distill);

void BM_RankMention(benchmark::State& state) {
  const World& w = world();
  auto [words, chars] = build_vocabularies(w.kb, w.data.docs);
  RankerDims dims;
  dims.vocab = words.size();
  std::mt19937_64 rng(3);
  const RankerModel model =
      RankerModel::initialize(dims, std::move(words), std::move(chars), TrainConfig{}, rng);
  const Document& doc = w.data.docs.front();
  const DocumentView view(doc);
  const CandidateList& list = w.lists.front();
  for (auto _ : state) benchmark::DoNotOptimize(rank(list.mention, view, list, w.kb, model));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(list.candidates.size()));
}
BENCHMARK(BM_RankMention);

void BM_Hungarian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(4);
  std::vector<std::vector<double>> w(n, std::vector<double>(n));
  for (auto& row : w) {
    for (double& v : row) v = std::uniform_int_distribution<int>(0, 20)(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(max_weight_assignment(w));
}
BENCHMARK(BM_Hungarian)->Arg(16)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
