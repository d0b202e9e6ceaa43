#ifndef SEGALE_PIPELINE_HPP
#define SEGALE_PIPELINE_HPP

#include <iosfwd>
#include <map>
#include <memory>
#include <string>

#include "segale/corpus.hpp"
#include "segale/datagen.hpp"
#include "segale/metaeval.hpp"
#include "segale/penalty_search.hpp"
#include "segale/score.hpp"

namespace segale {

struct ProviderSpec {
  std::string kind = "synthetic";  // synthetic | file | http
  std::uint64_t seed = 1;
  int dim = 256;
  double noise = 0.0;
  std::string path;  // file provider
  std::string host;  // http provider
  int port = 0;
};

struct MetricBackendSpec {
  std::string kind = "cosine";  // cosine | http
  std::string host;
  int port = 0;
};

/// All pipeline knobs; defaults match the shipped alignment constants.
struct PipelineConfig {
  AlignParams align;
  SearchParams search;
  ProviderSpec provider;
  MetricBackendSpec metric_backend;
  MetricSpec metric = cosine_pseudo_metric_spec();
  std::string segmenter_lang = "en";
  std::uint64_t root_seed = 0;
  int jobs = 0;  // 0 = hardware concurrency
  bool verbose = false;
};

/// Parse a JSON config document; unknown keys are rejected so typos fail fast.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config_file(const std::string& path);

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec);
std::unique_ptr<MetricBackend> make_metric_backend(const PipelineConfig& config);

// Exit codes shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitBackendError = 3;
constexpr int kExitInternalError = 4;

/// Segment raw text (or each document's hyp_text) to one sentence per line.
int cmd_segment(std::istream& in, std::ostream& out, const std::string& lang,
                std::ostream& err);

/// Align every document and emit AlignmentResult JSONL in input order.
int cmd_align(const Corpus& corpus, const PipelineConfig& config,
              std::ostream& out, std::ostream& err);

/// Score aligned blocks against the metric backend; DocumentScore JSONL.
int cmd_evaluate(const Corpus& corpus, std::istream& alignments,
                 const PipelineConfig& config, std::ostream& out,
                 std::ostream& err);

/// Correlate score JSONL with MQM judgments; JSON report + text table.
int cmd_metaeval(std::istream& scores, std::istream& mqm_tsv,
                 std::istream* gold_manifest, const PipelineConfig& config,
                 std::ostream& out, std::ostream& err);

/// Apply a perturbation; writes the corpus then a manifest file.
int cmd_perturb(const Corpus& corpus, const PerturbationSpec& spec,
                std::ostream& out, std::ostream& manifest, std::ostream& err);

/// Build embedding-training triplets from TSV parallel sentences.
int cmd_triplets(std::istream& parallel_tsv, std::uint64_t seed,
                 std::ostream& out, std::ostream& err);

/// Token-budget chunking of raw text.
int cmd_chunk(std::istream& in, int max_tokens, const std::string& lang,
              std::ostream& out, std::ostream& err);

/// Overlap-size estimate from gold/auto sentence files.
int cmd_estimate_overlap(std::istream& gold, std::istream& autoseg,
                         const std::string& lang, std::ostream& out,
                         std::ostream& err);

// JSONL encoders, exposed for tests.
std::string alignment_result_to_json(const std::string& doc_id,
                                     const AlignmentResult& result);
std::string document_score_to_json(const DocumentScore& score);

}  // namespace segale

#endif
