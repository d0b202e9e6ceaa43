#include "segale/metaeval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace segale {

std::vector<ZScored> zscore_normalize(const std::vector<MqmAnnotation>& annotations) {
  std::map<std::string, std::pair<double, int>> sums;  // annotator -> (sum, n)
  for (const auto& a : annotations) {
    auto& [sum, n] = sums[a.annotator_id];
    sum += a.mqm_score;
    ++n;
  }
  std::map<std::string, std::pair<double, double>> stats;  // -> (mean, pop std)
  for (const auto& [annotator, sn] : sums) {
    double mean = sn.first / sn.second;
    double var = 0.0;
    for (const auto& a : annotations) {
      if (a.annotator_id != annotator) continue;
      var += (a.mqm_score - mean) * (a.mqm_score - mean);
    }
    var /= sn.second;
    stats[annotator] = {mean, std::sqrt(var)};
  }

  std::vector<ZScored> out;
  out.reserve(annotations.size());
  for (const auto& a : annotations) {
    const auto& [mean, sd] = stats[a.annotator_id];
    int n = sums[a.annotator_id].second;
    double z = (n < 2 || sd == 0.0) ? 0.0 : (a.mqm_score - mean) / sd;
    out.push_back({a, z});
  }
  return out;
}

std::vector<MqmAnnotation> inject_null_judgments(
    std::vector<MqmAnnotation> annotations,
    const std::vector<NullBlockRef>& null_blocks) {
  // (doc, system) -> annotator with the most annotations there
  std::map<std::pair<std::string, std::string>, std::map<std::string, int>> counts;
  for (const auto& a : annotations)
    counts[{a.doc_id, a.system_id}][a.annotator_id]++;

  for (const auto& nb : null_blocks) {
    auto it = counts.find({nb.doc_id, nb.system_id});
    if (it == counts.end() || it->second.empty())
      throw std::runtime_error("no annotator covers document " + nb.doc_id +
                               " / system " + nb.system_id);
    const std::string* majority = nullptr;
    int best = -1;
    for (const auto& [annotator, n] : it->second) {
      if (n > best) {
        best = n;
        majority = &annotator;
      }
    }
    MqmAnnotation synthetic;
    synthetic.doc_id = nb.doc_id;
    synthetic.system_id = nb.system_id;
    synthetic.seg_id = "null#" + std::to_string(nb.position);
    synthetic.annotator_id = *majority;
    synthetic.mqm_score = 25.0;
    annotations.push_back(std::move(synthetic));
  }
  return annotations;
}

double doc_human_score(const std::vector<ZScored>& z_annotations,
                       const std::string& doc_id, const std::string& system_id) {
  double sum = 0.0;
  int n = 0;
  for (const auto& za : z_annotations) {
    if (za.annotation.doc_id != doc_id) continue;
    if (!system_id.empty() && za.annotation.system_id != system_id) continue;
    sum += za.z;
    ++n;
  }
  if (n == 0)
    throw std::runtime_error("no annotations for document " + doc_id);
  return sum / n;
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y,
                   TauVariant variant) {
  const size_t n = x.size();
  if (n != y.size() || n < 2)
    throw std::invalid_argument("kendall_tau needs two equal lists of size >= 2");

  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double dx = x[i] - x[j];
      double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;  // tied in both: counted in neither
      if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }

  const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  double denom;
  if (variant == TauVariant::tau_a) {
    denom = static_cast<double>(n0);
  } else {
    // tau-b: tie corrections from pairwise tie counts
    long long tied_both = n0 - concordant - discordant - ties_x - ties_y;
    double nx = static_cast<double>(n0 - ties_x - tied_both);
    double ny = static_cast<double>(n0 - ties_y - tied_both);
    denom = std::sqrt(nx * ny);
  }
  if (denom == 0.0) throw std::runtime_error("degenerate ranking");
  return static_cast<double>(concordant - discordant) / denom;
}

std::vector<std::string> filter_documents(
    const std::map<std::string, int>& doc_segments,
    const std::vector<MqmAnnotation>& annotations, double missing_ceiling) {
  std::map<std::string, std::set<std::string>> annotated;
  for (const auto& a : annotations) annotated[a.doc_id].insert(a.seg_id);

  std::vector<std::string> kept;
  for (const auto& [doc_id, total] : doc_segments) {
    int have = 0;
    auto it = annotated.find(doc_id);
    if (it != annotated.end()) have = static_cast<int>(it->second.size());
    int missing = std::max(0, total - have);
    double frac = total > 0 ? static_cast<double>(missing) / total : 0.0;
    if (frac > missing_ceiling) continue;  // strictly "more than"
    kept.push_back(doc_id);
  }
  return kept;
}

CorrelationReport correlation_report(
    const std::vector<DocMetricScore>& metric_scores,
    const std::vector<DocHumanScore>& human_scores,
    const std::map<std::string, double>& gold_na_ratios) {
  std::map<std::tuple<std::string, std::string, std::string>, double> human;
  for (const auto& h : human_scores)
    human[{h.lang_pair, h.doc_id, h.system_id}] = h.score;

  std::map<std::pair<std::string, std::string>, std::vector<const DocMetricScore*>>
      by_cell;
  for (const auto& m : metric_scores)
    by_cell[{m.lang_pair, m.metric}].push_back(&m);

  CorrelationReport report;
  for (const auto& [cell_key, points] : by_cell) {
    std::vector<double> xs, ys;
    double na_sum = 0.0;
    for (const auto* p : points) {
      auto it = human.find({p->lang_pair, p->doc_id, p->system_id});
      if (it == human.end()) continue;
      double score = p->lower_better ? -p->score : p->score;
      xs.push_back(score);
      // human MQM-derived scores: higher z = worse translation
      ys.push_back(-it->second);
      na_sum += p->na_ratio;
    }
    CorrelationCell cell;
    cell.n_docs = static_cast<int>(xs.size());
    if (cell.n_docs >= 2) {
      cell.tau = kendall_tau(xs, ys);
      cell.na_ratio_mean = na_sum / cell.n_docs;
      auto git = gold_na_ratios.find(cell_key.first);
      if (git != gold_na_ratios.end())
        cell.delta_gold = std::abs(cell.na_ratio_mean - git->second);
    }
    report.cells[cell_key] = cell;
  }
  return report;
}

std::string format_report(const CorrelationReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "lang_pair" << std::setw(14) << "metric"
     << std::right << std::setw(10) << "tau" << std::setw(8) << "n_docs"
     << std::setw(12) << "na_ratio" << std::setw(12) << "|d_gold|" << '\n';
  for (const auto& [key, cell] : report.cells) {
    os << std::left << std::setw(12) << key.first << std::setw(14) << key.second
       << std::right << std::fixed << std::setprecision(4);
    if (cell.tau)
      os << std::setw(10) << *cell.tau;
    else
      os << std::setw(10) << "--";
    os << std::setw(8) << cell.n_docs << std::setw(12) << cell.na_ratio_mean;
    if (cell.delta_gold)
      os << std::setw(12) << *cell.delta_gold;
    else
      os << std::setw(12) << "--";
    os << '\n';
  }
  return os.str();
}

std::vector<MqmAnnotation> parse_mqm_tsv(std::istream& in) {
  std::vector<MqmAnnotation> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (first) {
      first = false;
      if (!fields.empty() && fields[0] == "system") continue;  // header
    }
    if (fields.size() != 5)
      throw std::runtime_error("malformed MQM TSV line: " + line);
    MqmAnnotation a;
    a.system_id = fields[0];
    a.doc_id = fields[1];
    a.seg_id = fields[2];
    a.annotator_id = fields[3];
    a.mqm_score = std::stod(fields[4]);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace segale
