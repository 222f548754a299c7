#pragma once

// End-to-end orchestration: build-kb -> gen-candidates -> train -> link ->
// eval. Every stage logs its wall time and counts to stderr; errors are
// rethrown with the stage name prefixed and their type preserved.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fofelink/candidates.h"
#include "fofelink/config.h"
#include "fofelink/eval.h"
#include "fofelink/ranker.h"

namespace fofelink {

struct PipelineArtifacts {
  std::filesystem::path kb_jsonl;  // only written when synthesizing
  std::filesystem::path corpus;    // only written when synthesizing
  std::filesystem::path kb_index;
  std::filesystem::path candidates;
  std::filesystem::path model;
  std::filesystem::path links;
  std::filesystem::path report_json;
  std::filesystem::path report_text;
};

PipelineArtifacts artifact_paths(const std::filesystem::path& output_dir);

struct PipelineResult {
  EvalReport report;  // on held-out documents
  double candidate_recall_all = 0.0;  // over every document
  std::size_t train_documents = 0;
  std::size_t heldout_documents = 0;
  PipelineArtifacts artifacts;
};

// 1-based: with every = 5, documents 5, 10, ... are held out.
bool is_heldout(std::size_t doc_index, std::size_t every);

struct CorpusSplit {
  std::vector<Document> train;
  std::vector<Document> heldout;
};
CorpusSplit split_corpus(std::span<const Document> docs, std::size_t every);

// Binary index or JSONL, sniffed from the file.
KbStore load_kb(const std::filesystem::path& path, const FuzzyOptions& fuzzy);

std::vector<CandidateList> generate_corpus_candidates(std::span<const Document> docs,
                                                      const KbStore& kb,
                                                      const CandidateOptions& options);

// Pairs each gold mention of `docs` with its list. Mentions whose list lacks
// the gold label cannot be trained on and are counted in `skipped`.
std::vector<TrainingMention> training_mentions(std::span<const Document> docs,
                                               std::span<const CandidateList> lists,
                                               std::size_t* skipped = nullptr);

// Ranks every mention of `docs` and clusters the NIL links across the corpus.
std::vector<LinkRecord> link_corpus(std::span<const Document> docs,
                                    std::span<const CandidateList> lists,
                                    const KbStore& kb, const RankerModel& model);

PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace fofelink
