// segale: segment, align, and evaluate document-level machine translations.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "segale/pipeline.hpp"

namespace {

using segale::kExitInputError;
using segale::kExitInternalError;

segale::PipelineConfig load_config(const std::string& config_path) {
  std::string path = config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("SEGALE_CONFIG")) path = env;
  }
  if (path.empty()) return {};
  return segale::load_config_file(path);
}

std::ifstream open_or_die(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

segale::Corpus read_corpus(const std::string& path) {
  auto in = open_or_die(path);
  return segale::read_corpus_jsonl(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SEGALE: document-level MT evaluation via segment, align, evaluate"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file (default: $SEGALE_CONFIG)");
  bool verbose = false;
  app.add_flag("--verbose", verbose, "emit per-step search traces to stderr");
  int jobs = 0;
  app.add_option("--jobs", jobs, "parallel documents (default: all cores)");
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  app.add_option("--seed", seed_override, "root RNG seed")
      ->each([&](const std::string&) { seed_set = true; });

  // segment
  auto* seg = app.add_subcommand("segment", "split raw text into sentences");
  std::string seg_lang = "en", seg_input;
  seg->add_option("--lang", seg_lang, "language tag");
  seg->add_option("input", seg_input, "input text file (default: stdin)");

  // align
  auto* align = app.add_subcommand("align", "align corpus documents");
  std::string align_corpus;
  align->add_option("corpus", align_corpus, "corpus JSONL")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "score aligned blocks");
  std::string eval_corpus, eval_alignments;
  eval->add_option("corpus", eval_corpus, "corpus JSONL")->required();
  eval->add_option("alignments", eval_alignments, "alignment JSONL")->required();

  // metaeval
  auto* meta = app.add_subcommand("metaeval", "correlate scores with MQM judgments");
  std::string meta_scores, meta_mqm, meta_gold;
  meta->add_option("scores", meta_scores, "score JSONL")->required();
  meta->add_option("mqm", meta_mqm, "MQM TSV")->required();
  meta->add_option("--gold-manifest", meta_gold, "deletion manifest JSONL");

  // perturb
  auto* perturb = app.add_subcommand("perturb", "synthetic corpus perturbation");
  std::string perturb_corpus, perturb_kind = "under_translate", perturb_manifest;
  double perturb_rate = 0.10;
  perturb->add_option("corpus", perturb_corpus, "corpus JSONL")->required();
  perturb->add_option("--kind", perturb_kind,
                      "over_translate | under_translate | flex_boundary");
  perturb->add_option("--rate", perturb_rate, "perturbation rate");
  perturb->add_option("--manifest", perturb_manifest, "manifest output path")
      ->required();

  // triplets
  auto* triplets = app.add_subcommand("triplets", "build embedding-training triplets");
  std::string triplets_tsv;
  triplets->add_option("parallel", triplets_tsv, "TSV of src<TAB>tgt sentences")
      ->required();

  // chunk
  auto* chunk = app.add_subcommand("chunk", "token-budget document chunking");
  std::string chunk_input, chunk_lang = "en";
  int chunk_tokens = 1024;
  chunk->add_option("input", chunk_input, "input text file (default: stdin)");
  chunk->add_option("--max-tokens", chunk_tokens, "token budget per chunk");
  chunk->add_option("--lang", chunk_lang, "language tag");

  // estimate-overlap
  auto* est = app.add_subcommand("estimate-overlap",
                                 "overlap size from gold/auto segmentations");
  std::string est_gold, est_auto, est_lang = "en";
  est->add_option("gold", est_gold, "gold sentence file")->required();
  est->add_option("auto", est_auto, "auto sentence file")->required();
  est->add_option("--lang", est_lang, "language tag");

  CLI11_PARSE(app, argc, argv);

  try {
    segale::PipelineConfig config = load_config(config_path);
    if (verbose) config.verbose = true;
    if (jobs > 0) config.jobs = jobs;
    if (seed_set) config.root_seed = seed_override;

    if (seg->parsed()) {
      if (seg_input.empty())
        return segale::cmd_segment(std::cin, std::cout, seg_lang, std::cerr);
      auto in = open_or_die(seg_input);
      return segale::cmd_segment(in, std::cout, seg_lang, std::cerr);
    }
    if (align->parsed()) {
      auto corpus = read_corpus(align_corpus);
      return segale::cmd_align(corpus, config, std::cout, std::cerr);
    }
    if (eval->parsed()) {
      auto corpus = read_corpus(eval_corpus);
      auto alignments = open_or_die(eval_alignments);
      return segale::cmd_evaluate(corpus, alignments, config, std::cout, std::cerr);
    }
    if (meta->parsed()) {
      auto scores = open_or_die(meta_scores);
      auto mqm = open_or_die(meta_mqm);
      std::optional<std::ifstream> gold;
      if (!meta_gold.empty()) gold.emplace(open_or_die(meta_gold));
      return segale::cmd_metaeval(scores, mqm, gold ? &*gold : nullptr, config,
                                  std::cout, std::cerr);
    }
    if (perturb->parsed()) {
      auto corpus = read_corpus(perturb_corpus);
      segale::PerturbationSpec spec;
      if (perturb_kind == "over_translate")
        spec.kind = segale::PerturbationKind::over_translate;
      else if (perturb_kind == "under_translate")
        spec.kind = segale::PerturbationKind::under_translate;
      else if (perturb_kind == "flex_boundary")
        spec.kind = segale::PerturbationKind::flex_boundary;
      else {
        std::cerr << "perturb: unknown kind " << perturb_kind << '\n';
        return kExitInputError;
      }
      spec.rate = perturb_rate;
      spec.rng_seed = config.root_seed;
      std::ofstream manifest(perturb_manifest);
      if (!manifest) {
        std::cerr << "perturb: cannot write manifest " << perturb_manifest << '\n';
        return kExitInputError;
      }
      return segale::cmd_perturb(corpus, spec, std::cout, manifest, std::cerr);
    }
    if (triplets->parsed()) {
      auto in = open_or_die(triplets_tsv);
      return segale::cmd_triplets(in, config.root_seed, std::cout, std::cerr);
    }
    if (chunk->parsed()) {
      if (chunk_input.empty())
        return segale::cmd_chunk(std::cin, chunk_tokens, chunk_lang, std::cout,
                                 std::cerr);
      auto in = open_or_die(chunk_input);
      return segale::cmd_chunk(in, chunk_tokens, chunk_lang, std::cout, std::cerr);
    }
    if (est->parsed()) {
      auto gold = open_or_die(est_gold);
      auto autoseg = open_or_die(est_auto);
      return segale::cmd_estimate_overlap(gold, autoseg, est_lang, std::cout,
                                          std::cerr);
    }
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
  return kExitInternalError;
}
