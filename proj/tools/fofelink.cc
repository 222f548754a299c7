// fofelink command-line tool.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 invalid input
// data, 3 runtime failure (I/O, divergence).

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "fofelink/binary_io.h"
#include "fofelink/config.h"
#include "fofelink/corpus.h"
#include "fofelink/errors.h"
#include "fofelink/eval.h"
#include "fofelink/pipeline.h"
#include "fofelink/ranker.h"
#include "fofelink/synth.h"

namespace fl = fofelink;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    fl::write_file(path, text);
  }
}

std::vector<std::pair<std::string, std::filesystem::path>> parse_dictionaries(
    const std::vector<std::string>& specs) {
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  for (const std::string& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw fl::ConfigError("--dictionary expects name=path, got '" + s + "'");
    }
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("fofelink"));
  spdlog::set_pattern("[%H:%M:%S.%e] %^%l%$ %v");

  CLI::App app{"Entity linking with FOFE context features"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  // build-kb
  auto* build_kb = app.add_subcommand("build-kb", "Validate a KB JSONL file and write its index");
  std::string bk_input, bk_output;
  fl::FuzzyOptions bk_fuzzy;
  build_kb->add_option("--input", bk_input, "KB JSONL")->required();
  build_kb->add_option("--output", bk_output, "Binary index path")->required();
  build_kb->add_option("--gram", bk_fuzzy.gram, "Character n-gram size");
  build_kb->add_option("--fuzzy-floor", bk_fuzzy.floor, "Minimum edit similarity");
  build_kb->add_option("--fuzzy-limit", bk_fuzzy.limit, "Fuzzy hits per query");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic KB and corpus");
  fl::SyntheticSpec sy_spec;
  std::string sy_kb, sy_corpus;
  synth->add_option("--entities", sy_spec.n_entities);
  synth->add_option("--docs", sy_spec.n_docs);
  synth->add_option("--mentions-per-doc", sy_spec.mentions_per_doc);
  synth->add_option("--ambiguity", sy_spec.ambiguity);
  synth->add_option("--nil-fraction", sy_spec.nil_fraction);
  synth->add_option("--link-density", sy_spec.link_density);
  synth->add_option("--seed", sy_spec.seed);
  synth->add_option("--kb-out", sy_kb, "KB JSONL output")->required();
  synth->add_option("--corpus-out", sy_corpus, "Corpus JSONL output")->required();

  // gen-candidates
  auto* gen = app.add_subcommand("gen-candidates", "Generate distilled candidate lists");
  std::string gc_kb, gc_corpus, gc_output;
  fl::FuzzyOptions gc_fuzzy;
  std::size_t gc_tau = 20;
  bool gc_no_ext = false;
  std::vector<std::string> gc_dicts;
  gen->add_option("--kb", gc_kb, "KB index or JSONL")->required();
  gen->add_option("--corpus", gc_corpus, "Corpus JSONL")->required();
  gen->add_option("--tau", gc_tau, "Candidates kept per mention");
  gen->add_option("--fuzzy-limit", gc_fuzzy.limit, "Fuzzy hits per query");
  gen->add_flag("--no-extensions", gc_no_ext, "Disable all mention extensions");
  gen->add_option("--dictionary", gc_dicts, "Extension dictionary name=path.tsv");
  gen->add_option("--output", gc_output, "Candidate JSONL")->required();

  // train
  auto* train = app.add_subcommand("train", "Train the ranker");
  std::string tr_kb, tr_corpus, tr_cands, tr_config, tr_output;
  train->add_option("--kb", tr_kb)->required();
  train->add_option("--corpus", tr_corpus)->required();
  train->add_option("--candidates", tr_cands)->required();
  train->add_option("--config", tr_config, "Config file ([train] section)");
  train->add_option("--output", tr_output, "Model file")->required();

  // link
  auto* link = app.add_subcommand("link", "Link mentions with a trained model");
  std::string ln_model, ln_kb, ln_corpus, ln_cands, ln_output;
  std::size_t ln_tau = 20;
  link->add_option("--model", ln_model)->required();
  link->add_option("--kb", ln_kb)->required();
  link->add_option("--corpus", ln_corpus)->required();
  link->add_option("--candidates", ln_cands, "Precomputed candidates (generated if absent)");
  link->add_option("--tau", ln_tau, "Candidates kept per mention when generating");
  link->add_option("--output", ln_output, "Links JSONL")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Score links against a gold corpus");
  std::string ev_gold, ev_pred, ev_format = "text", ev_output;
  eval->add_option("--gold", ev_gold, "Gold corpus JSONL")->required();
  eval->add_option("--pred", ev_pred, "Links JSONL")->required();
  eval->add_option("--report", ev_format, "Report format")
      ->check(CLI::IsMember({"json", "text"}));
  eval->add_option("--output", ev_output, "Report path (stdout if omitted)");

  // run
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
  std::string rn_config, rn_outdir;
  run->add_option("--config", rn_config)->required();
  run->add_option("--output-dir", rn_outdir, "Override paths.output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  if (quiet) spdlog::set_level(spdlog::level::warn);

  try {
    if (*build_kb) {
      const fl::KbStore kb = fl::KbStore::load_jsonl(bk_input, bk_fuzzy);
      kb.save_index(bk_output);
      spdlog::info("indexed {} entities", kb.size());
    } else if (*synth) {
      fl::PipelineConfig cfg;
      fl::set_seed(cfg, sy_spec.seed);
      fl::apply_seed_override(cfg);
      sy_spec.seed = cfg.seed;
      const fl::SyntheticData data = fl::synthesize(sy_spec);
      fl::write_file(sy_kb, data.kb_jsonl());
      fl::write_file(sy_corpus, data.corpus_jsonl());
      spdlog::info("wrote {} entities, {} documents", data.entities.size(),
                   data.docs.size());
    } else if (*gen) {
      fl::PipelineConfig cfg;
      cfg.train.tau = gc_tau;
      cfg.fuzzy = gc_fuzzy;
      if (gc_no_ext) {
        cfg.substring_extension = cfg.country_extension = cfg.nominal_extension = false;
      }
      cfg.dictionaries = parse_dictionaries(gc_dicts);
      cfg.validate();
      const fl::KbStore kb = fl::load_kb(gc_kb, cfg.fuzzy);
      const auto docs = fl::load_corpus(gc_corpus);
      const auto lists = fl::generate_corpus_candidates(docs, kb, cfg.candidate_options());
      fl::save_candidates(gc_output, lists);
      spdlog::info("{} candidate lists, recall {:.4f}", lists.size(),
                   fl::candidate_recall(lists));
    } else if (*train) {
      fl::PipelineConfig cfg =
          tr_config.empty() ? fl::PipelineConfig{} : fl::load_config(tr_config);
      fl::apply_seed_override(cfg);
      const fl::KbStore kb = fl::load_kb(tr_kb, cfg.fuzzy);
      const auto docs = fl::load_corpus(tr_corpus);
      const auto lists = fl::load_candidates(tr_cands);
      std::size_t skipped = 0;
      const auto corpus = fl::training_mentions(docs, lists, &skipped);
      spdlog::info("training on {} mentions ({} skipped)", corpus.size(), skipped);
      const fl::RankerModel model =
          fl::train(corpus, docs, cfg.train, kb, [](const fl::EpochStats& s) {
            spdlog::info("epoch {} loss {:.6f}", s.epoch, s.mean_loss);
          });
      fl::save_model(tr_output, model);
    } else if (*link) {
      const fl::RankerModel model = fl::load_model(ln_model);
      const fl::KbStore kb = fl::load_kb(ln_kb, {});
      const auto docs = fl::load_corpus(ln_corpus);
      std::vector<fl::CandidateList> lists;
      if (!ln_cands.empty()) {
        lists = fl::load_candidates(ln_cands);
      } else {
        fl::CandidateOptions options;
        options.tau = ln_tau;
        lists = fl::generate_corpus_candidates(docs, kb, options);
      }
      const auto links = fl::link_corpus(docs, lists, kb, model);
      fl::save_links(ln_output, links);
      spdlog::info("linked {} mentions", links.size());
    } else if (*eval) {
      const auto gold = fl::load_corpus(ev_gold);
      const auto links = fl::load_links(ev_pred);
      const fl::EvalReport report = fl::evaluate(gold, links);
      write_or_print(ev_output, ev_format == "json" ? fl::format_report_json(report)
                                                    : fl::format_report_text(report));
    } else if (*run) {
      fl::PipelineConfig cfg = fl::load_config(rn_config);
      if (!rn_outdir.empty()) cfg.output_dir = rn_outdir;
      fl::apply_seed_override(cfg);
      const fl::PipelineResult result = fl::run_pipeline(cfg);
      std::cout << fl::format_report_text(result.report);
    }
  } catch (const fl::ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const fl::ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return 0;
}
