#include "fofelink/pipeline.h"

#include <chrono>
#include <map>
#include <type_traits>

#include <spdlog/spdlog.h>

#include "fofelink/binary_io.h"
#include "fofelink/errors.h"
#include "fofelink/nil_cluster.h"

namespace fofelink {

namespace {

template <typename E>
[[noreturn]] void rethrow_as(std::string_view stage, const E& e) {
  throw E("stage " + std::string(stage) + ": " + e.what());
}

template <typename F>
auto run_stage(std::string_view stage, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto done = [&] {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    spdlog::info("stage {} finished in {:.3f}s", stage, dt.count());
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      done();
    } else {
      auto result = body();
      done();
      return result;
    }
  } catch (const ConfigError& e) {
    rethrow_as(stage, e);
  } catch (const ValidationError& e) {
    rethrow_as(stage, e);
  } catch (const IoError& e) {
    rethrow_as(stage, e);
  } catch (const DivergenceError& e) {
    rethrow_as(stage, e);
  } catch (const OracleFailure& e) {
    rethrow_as(stage, e);
  } catch (const Error& e) {
    rethrow_as(stage, e);
  }
}

}  // namespace

PipelineArtifacts artifact_paths(const std::filesystem::path& dir) {
  return {dir / "kb.jsonl",       dir / "corpus.jsonl", dir / "kb.idx",
          dir / "candidates.jsonl", dir / "model.bin",  dir / "links.jsonl",
          dir / "report.json",    dir / "report.txt"};
}

bool is_heldout(std::size_t doc_index, std::size_t every) {
  return every != 0 && (doc_index + 1) % every == 0;
}

CorpusSplit split_corpus(std::span<const Document> docs, std::size_t every) {
  CorpusSplit split;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    (is_heldout(i, every) ? split.heldout : split.train).push_back(docs[i]);
  }
  if (every == 0) split.heldout = split.train;
  return split;
}

KbStore load_kb(const std::filesystem::path& path, const FuzzyOptions& fuzzy) {
  const std::string bytes = read_file(path);
  if (bytes.starts_with("FOFEKBIX")) return KbStore::deserialize(bytes);
  return KbStore::parse_jsonl(bytes, fuzzy);
}

std::vector<CandidateList> generate_corpus_candidates(std::span<const Document> docs,
                                                      const KbStore& kb,
                                                      const CandidateOptions& options) {
  std::vector<CandidateList> out;
  for (const Document& doc : docs) {
    std::vector<CandidateList> lists = generate_candidates(doc, kb, options);
    std::move(lists.begin(), lists.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<TrainingMention> training_mentions(std::span<const Document> docs,
                                               std::span<const CandidateList> lists,
                                               std::size_t* skipped) {
  std::map<MentionKey, const CandidateList*> by_key;
  for (const CandidateList& l : lists) by_key.emplace(key_of(l.mention), &l);
  std::vector<TrainingMention> out;
  std::size_t missing = 0;
  for (const Document& doc : docs) {
    for (const Mention& m : doc.mentions) {
      auto it = by_key.find(key_of(m));
      if (it == by_key.end()) {
        throw ValidationError("no candidate list for mention " + m.doc_id + ":" +
                              std::to_string(m.start));
      }
      const std::string gold = m.gold_id.value_or(std::string(kNilId));
      if (!it->second->contains(gold)) {
        ++missing;
        continue;
      }
      TrainingMention tm{&doc, *it->second};
      tm.candidates.mention = m;
      out.push_back(std::move(tm));
    }
  }
  if (skipped) *skipped = missing;
  return out;
}

std::vector<LinkRecord> link_corpus(std::span<const Document> docs,
                                    std::span<const CandidateList> lists,
                                    const KbStore& kb, const RankerModel& model) {
  std::map<MentionKey, const CandidateList*> by_key;
  for (const CandidateList& l : lists) by_key.emplace(key_of(l.mention), &l);
  std::vector<LinkRecord> out;
  std::vector<Mention> nil_mentions;
  for (const Document& doc : docs) {
    const DocumentView view(doc);
    for (const Mention& m : doc.mentions) {
      auto it = by_key.find(key_of(m));
      if (it == by_key.end()) {
        throw ValidationError("no candidate list for mention " + m.doc_id + ":" +
                              std::to_string(m.start));
      }
      const CandidateList& list = *it->second;
      const RankResult ranked = rank(m, view, list, kb, model);
      LinkRecord r;
      r.mention = m;
      r.mention.gold_id.reset();
      r.mention.gold_nil_cluster.reset();
      r.entity_id = list.candidates[ranked.winner].entity_id;
      r.probability = ranked.probabilities[ranked.winner];
      for (std::size_t k = 0; k < list.candidates.size(); ++k) {
        r.candidates.emplace_back(list.candidates[k].entity_id, ranked.probabilities[k]);
      }
      if (r.entity_id == kNilId) nil_mentions.push_back(m);
      out.push_back(std::move(r));
    }
  }
  std::map<MentionKey, std::string> cluster_of;
  for (const NilCluster& c : cluster_nils(nil_mentions)) {
    for (const MentionKey& k : c.members) cluster_of[k] = c.cluster_id;
  }
  for (LinkRecord& r : out) {
    if (auto it = cluster_of.find(key_of(r.mention)); it != cluster_of.end()) {
      r.nil_cluster_id = it->second;
    }
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  if (!config.synthesize && (config.kb.empty() || config.corpus.empty())) {
    throw ConfigError("paths.kb and paths.corpus are required unless synth.enabled");
  }
  PipelineResult result;
  const PipelineArtifacts paths = artifact_paths(config.output_dir);
  result.artifacts = paths;
  std::filesystem::path kb_source = config.kb;
  std::filesystem::path corpus_source = config.corpus;

  const KbStore kb = run_stage("build-kb", [&] {
    if (config.synthesize) {
      const SyntheticData data = synthesize(config.synth);
      write_file(paths.kb_jsonl, data.kb_jsonl());
      write_file(paths.corpus, data.corpus_jsonl());
      kb_source = paths.kb_jsonl;
      corpus_source = paths.corpus;
      spdlog::info("synthesized {} entities and {} documents", data.entities.size(),
                   data.docs.size());
    }
    KbStore store = load_kb(kb_source, config.fuzzy);
    store.save_index(paths.kb_index);
    spdlog::info("knowledge base: {} entities", store.size());
    return store;
  });

  const std::vector<Document> docs = run_stage("load-corpus", [&] {
    auto loaded = load_corpus(corpus_source);
    spdlog::info("corpus: {} documents", loaded.size());
    return loaded;
  });

  const std::vector<CandidateList> lists = run_stage("gen-candidates", [&] {
    auto generated = generate_corpus_candidates(docs, kb, config.candidate_options());
    save_candidates(paths.candidates, generated);
    spdlog::info("candidates: {} mentions, recall {:.4f}", generated.size(),
                 candidate_recall(generated));
    return generated;
  });
  result.candidate_recall_all = candidate_recall(lists);

  const CorpusSplit split = split_corpus(docs, config.heldout_every);
  result.train_documents = split.train.size();
  result.heldout_documents = split.heldout.size();

  const RankerModel model = run_stage("train", [&] {
    std::size_t skipped = 0;
    const auto corpus = training_mentions(split.train, lists, &skipped);
    spdlog::info("training on {} mentions ({} skipped without gold candidate)",
                 corpus.size(), skipped);
    RankerModel trained = train(corpus, split.train, config.train, kb,
                                [](const EpochStats& s) {
                                  spdlog::info("epoch {} loss {:.6f} over {} pairs",
                                               s.epoch, s.mean_loss, s.pairs);
                                });
    save_model(paths.model, trained);
    return trained;
  });

  const std::vector<LinkRecord> links = run_stage("link", [&] {
    auto linked = link_corpus(split.heldout, lists, kb, model);
    save_links(paths.links, linked);
    spdlog::info("linked {} mentions", linked.size());
    return linked;
  });

  result.report = run_stage("eval", [&] {
    EvalReport report = evaluate(split.heldout, links);
    write_file(paths.report_json, format_report_json(report));
    write_file(paths.report_text, format_report_text(report));
    spdlog::info("held-out linking accuracy {:.4f}", report.linking_accuracy);
    return report;
  });
  return result;
}

}  // namespace fofelink
