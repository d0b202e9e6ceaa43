#ifndef SEGALE_METAEVAL_HPP
#define SEGALE_METAEVAL_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace segale {

/// One MQM segment annotation (0 = perfect, 25 = worst).
struct MqmAnnotation {
  std::string doc_id;
  std::string seg_id;
  std::string system_id;
  std::string annotator_id;
  double mqm_score = 0.0;
};

struct ZScored {
  MqmAnnotation annotation;
  double z = 0.0;
};

/// Per-annotator z-normalization with population standard deviation.
/// Annotators with fewer than two annotations or zero variance get z = 0.
std::vector<ZScored> zscore_normalize(const std::vector<MqmAnnotation>& annotations);

/// Identifies a null block for human-score injection.
struct NullBlockRef {
  std::string doc_id;
  std::string system_id;
  int position = 0;
};

/// Insert one synthetic MQM annotation of 25 per null block, attributed to
/// the annotator who covered that (doc, system); with several annotators the
/// document's majority annotator absorbs them. Must run before
/// zscore_normalize. Throws if a referenced document has no annotator.
std::vector<MqmAnnotation> inject_null_judgments(
    std::vector<MqmAnnotation> annotations,
    const std::vector<NullBlockRef>& null_blocks);

/// Mean z-score over a (doc, system)'s segments.
double doc_human_score(const std::vector<ZScored>& z_annotations,
                       const std::string& doc_id, const std::string& system_id);

enum class TauVariant { tau_b, tau_a };

/// Kendall rank correlation; tau-b (tie corrected) by default.
/// Throws on degenerate (all-tied) rankings.
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y,
                   TauVariant variant = TauVariant::tau_b);

/// Drop documents whose fraction of unannotated segments exceeds the ceiling.
/// `doc_segments` maps doc_id -> total segment count.
std::vector<std::string> filter_documents(
    const std::map<std::string, int>& doc_segments,
    const std::vector<MqmAnnotation>& annotations,
    double missing_ceiling = 0.20);

struct CorrelationCell {
  std::optional<double> tau;  // absent when fewer than 2 common docs
  int n_docs = 0;
  double na_ratio_mean = 0.0;
  std::optional<double> delta_gold;
};

struct CorrelationReport {
  // (language_pair, metric) -> cell
  std::map<std::pair<std::string, std::string>, CorrelationCell> cells;
};

/// Document-level metric score point used as correlation input.
struct DocMetricScore {
  std::string lang_pair;
  std::string metric;
  std::string doc_id;
  std::string system_id;
  double score = 0.0;
  bool lower_better = false;
  double na_ratio = 0.0;
};

struct DocHumanScore {
  std::string lang_pair;
  std::string doc_id;
  std::string system_id;
  double score = 0.0;
};

/// Pool (doc, system) points per language pair and correlate each metric
/// against human scores. Lower-better metric scores are negated first.
CorrelationReport correlation_report(
    const std::vector<DocMetricScore>& metric_scores,
    const std::vector<DocHumanScore>& human_scores,
    const std::map<std::string, double>& gold_na_ratios = {});

/// Aligned-column text rendering of the report.
std::string format_report(const CorrelationReport& report);

/// WMT-style TSV with header "system\tdoc\tseg\tannotator\tscore".
std::vector<MqmAnnotation> parse_mqm_tsv(std::istream& in);

}  // namespace segale

#endif
