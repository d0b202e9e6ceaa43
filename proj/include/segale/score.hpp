#ifndef SEGALE_SCORE_HPP
#define SEGALE_SCORE_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "segale/align.hpp"
#include "segale/embeddings.hpp"
#include "segale/textseg.hpp"

namespace segale {

enum class Polarity { higher_better, lower_better };

struct MetricSpec {
  std::string name;
  Polarity polarity = Polarity::higher_better;
  double worst_value = 0.0;  // extreme of the range in the bad direction
  bool needs_reference = false;
};

struct ScorePair {
  std::string src;
  std::string hyp;
  std::optional<std::string> ref;
};

/// Segment-level metric backend. Must be safe for concurrent batch calls.
class MetricBackend {
 public:
  virtual ~MetricBackend() = default;
  virtual std::vector<double> score(const std::vector<ScorePair>& pairs) = 0;
};

struct ScoredBlock {
  AlignmentBlock block;
  std::string src_text;
  std::string hyp_text;
  std::optional<std::string> ref_text;
  double score = 0.0;
  bool is_null = false;
};

struct DocumentScore {
  std::string doc_id;
  double avg_score = 0.0;  // mean over all blocks, nulls at worst_value
  double na_ratio = 0.0;
  std::string metric;
  std::vector<ScoredBlock> blocks;
};

/// Concatenate the spanned sentences into per-block texts. Null blocks keep
/// the non-empty side's text and an empty string on the other. References,
/// when present, are 1:1 with source sentences; a block's ref_text joins the
/// same source span.
std::vector<ScoredBlock> materialize_blocks(const AlignmentPath& path,
                                            const SentenceList& src,
                                            const SentenceList& hyp,
                                            const SentenceList* ref = nullptr);

/// Score non-null blocks with the backend; null blocks get spec.worst_value
/// without a backend call. The document average runs over every block.
DocumentScore score_document(std::vector<ScoredBlock> blocks,
                             MetricBackend& backend, const MetricSpec& spec,
                             const std::string& doc_id = "");

/// Reference-free test backend: (1 + cos(src, hyp)) / 2 under the given
/// embedding provider. Range [0,1], higher better, worst 0.
std::unique_ptr<MetricBackend> cosine_pseudo_metric(
    std::shared_ptr<EmbeddingProvider> provider);

MetricSpec cosine_pseudo_metric_spec();

struct HttpMetricOptions {
  int batch_size = 64;
  int max_in_flight = 4;
  int max_retries = 3;
  int backoff_base_ms = 100;
};

/// Client for the POST /score service.
std::unique_ptr<MetricBackend> http_metric_backend(const std::string& host,
                                                   int port,
                                                   const std::string& metric_name,
                                                   HttpMetricOptions opts = {});

}  // namespace segale

#endif
