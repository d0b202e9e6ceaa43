#include "segale/score.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace segale {

namespace {

std::string join_span(const std::vector<std::string>& sentences, int lo, int hi,
                      const std::string& joiner) {
  if (lo < 0 || hi > static_cast<int>(sentences.size()) || lo > hi)
    throw std::out_of_range("block span out of range");
  std::string out;
  for (int i = lo; i < hi; ++i) {
    if (i > lo) out += joiner;
    out += sentences[i];
  }
  return out;
}

}  // namespace

std::vector<ScoredBlock> materialize_blocks(const AlignmentPath& path,
                                            const SentenceList& src,
                                            const SentenceList& hyp,
                                            const SentenceList* ref) {
  if (path.src_len != static_cast<int>(src.sentences.size()) ||
      path.tgt_len != static_cast<int>(hyp.sentences.size()))
    throw std::out_of_range("path does not cover the sentence lists");
  validate_path(path);
  if (ref && ref->sentences.size() != src.sentences.size())
    throw std::out_of_range("reference must be 1:1 with source sentences");

  const std::string src_joiner = joiner_for_lang(src.lang);
  const std::string hyp_joiner = joiner_for_lang(hyp.lang);

  std::vector<ScoredBlock> blocks;
  blocks.reserve(path.blocks.size());
  for (const auto& b : path.blocks) {
    ScoredBlock sb;
    sb.block = b;
    sb.is_null = b.is_null();
    sb.src_text = join_span(src.sentences, b.src_lo, b.src_hi, src_joiner);
    sb.hyp_text = join_span(hyp.sentences, b.tgt_lo, b.tgt_hi, hyp_joiner);
    if (ref && b.src_len() > 0)
      sb.ref_text = join_span(ref->sentences, b.src_lo, b.src_hi, hyp_joiner);
    blocks.push_back(std::move(sb));
  }
  return blocks;
}

DocumentScore score_document(std::vector<ScoredBlock> blocks,
                             MetricBackend& backend, const MetricSpec& spec,
                             const std::string& doc_id) {
  if (blocks.empty()) throw std::invalid_argument("no blocks to score");

  std::vector<size_t> to_score;
  std::vector<ScorePair> pairs;
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].is_null) {
      blocks[i].score = spec.worst_value;
      continue;
    }
    if (spec.needs_reference && !blocks[i].ref_text)
      throw std::invalid_argument("metric requires references but block " +
                                  std::to_string(i) + " has none");
    to_score.push_back(i);
    pairs.push_back({blocks[i].src_text, blocks[i].hyp_text, blocks[i].ref_text});
  }

  if (!pairs.empty()) {
    std::vector<double> scores = backend.score(pairs);
    if (scores.size() != pairs.size())
      throw std::runtime_error("metric backend returned " +
                               std::to_string(scores.size()) + " scores for " +
                               std::to_string(pairs.size()) + " blocks");
    for (size_t k = 0; k < to_score.size(); ++k)
      blocks[to_score[k]].score = scores[k];
  }

  DocumentScore doc;
  doc.doc_id = doc_id;
  doc.metric = spec.name;
  double sum = 0.0;
  int nulls = 0;
  for (const auto& b : blocks) {
    sum += b.score;
    if (b.is_null) ++nulls;
  }
  doc.avg_score = sum / blocks.size();
  doc.na_ratio = static_cast<double>(nulls) / blocks.size();
  doc.blocks = std::move(blocks);
  return doc;
}

// ---------------------------------------------------------------------------
// Cosine pseudo-metric
// ---------------------------------------------------------------------------

namespace {

class CosinePseudoMetric : public MetricBackend {
 public:
  explicit CosinePseudoMetric(std::shared_ptr<EmbeddingProvider> provider)
      : provider_(std::move(provider)) {}

  std::vector<double> score(const std::vector<ScorePair>& pairs) override {
    std::vector<std::string> texts;
    texts.reserve(2 * pairs.size());
    for (const auto& p : pairs) {
      texts.push_back(p.src);
      texts.push_back(p.hyp);
    }
    Matrix rows = provider_->embed(texts);
    std::vector<double> out;
    out.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
      Eigen::RowVectorXf a = rows.row(2 * i).normalized();
      Eigen::RowVectorXf b = rows.row(2 * i + 1).normalized();
      double s = (1.0 + static_cast<double>(a.dot(b))) / 2.0;
      out.push_back(std::clamp(s, 0.0, 1.0));
    }
    return out;
  }

 private:
  std::shared_ptr<EmbeddingProvider> provider_;
};

}  // namespace

std::unique_ptr<MetricBackend> cosine_pseudo_metric(
    std::shared_ptr<EmbeddingProvider> provider) {
  return std::make_unique<CosinePseudoMetric>(std::move(provider));
}

MetricSpec cosine_pseudo_metric_spec() {
  return {"cosine", Polarity::higher_better, 0.0, false};
}

// ---------------------------------------------------------------------------
// HTTP metric backend
// ---------------------------------------------------------------------------

namespace {

class HttpMetricBackend : public MetricBackend {
 public:
  HttpMetricBackend(std::string host, int port, std::string metric_name,
                    HttpMetricOptions opts)
      : host_(std::move(host)),
        port_(port),
        metric_name_(std::move(metric_name)),
        opts_(opts) {}

  std::vector<double> score(const std::vector<ScorePair>& pairs) override {
    const int n = static_cast<int>(pairs.size());
    const int bs = opts_.batch_size;
    const int num_batches = (n + bs - 1) / bs;

    std::vector<std::vector<double>> results(num_batches);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mu;

    auto worker = [&] {
      while (!failed.load()) {
        int b = next.fetch_add(1);
        if (b >= num_batches) return;
        int lo = b * bs;
        int hi = std::min(n, lo + bs);
        try {
          results[b] = post_batch(pairs, lo, hi);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mu);
          error = e.what();
          failed.store(true);
          return;
        }
      }
    };

    int threads = std::min(opts_.max_in_flight, num_batches);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed.load()) throw std::runtime_error("metric service: " + error);

    std::vector<double> out;
    out.reserve(n);
    for (const auto& batch : results)
      out.insert(out.end(), batch.begin(), batch.end());
    if (static_cast<int>(out.size()) != n)
      throw std::runtime_error("metric service score count mismatch");
    return out;
  }

 private:
  std::vector<double> post_batch(const std::vector<ScorePair>& pairs, int lo,
                                 int hi) {
    nlohmann::json req;
    req["metric"] = metric_name_;
    auto& arr = req["pairs"] = nlohmann::json::array();
    for (int i = lo; i < hi; ++i) {
      nlohmann::json p = {{"src", pairs[i].src}, {"hyp", pairs[i].hyp}};
      if (pairs[i].ref) p["ref"] = *pairs[i].ref;
      arr.push_back(std::move(p));
    }
    const std::string body = req.dump();

    httplib::Client client(host_, port_);
    client.set_read_timeout(60, 0);
    for (int attempt = 0;; ++attempt) {
      auto res = client.Post("/score", body, "application/json");
      if (res && res->status < 500) {
        if (res->status != 200)
          throw std::runtime_error("metric service returned status " +
                                   std::to_string(res->status));
        auto json = nlohmann::json::parse(res->body);
        auto scores = json.at("scores").get<std::vector<double>>();
        if (scores.size() != static_cast<size_t>(hi - lo))
          throw std::runtime_error("metric service score count mismatch");
        return scores;
      }
      if (attempt >= opts_.max_retries)
        throw std::runtime_error("metric service unreachable after " +
                                 std::to_string(opts_.max_retries) + " retries");
      std::this_thread::sleep_for(
          std::chrono::milliseconds(opts_.backoff_base_ms << attempt));
    }
  }

  std::string host_;
  int port_;
  std::string metric_name_;
  HttpMetricOptions opts_;
};

}  // namespace

std::unique_ptr<MetricBackend> http_metric_backend(const std::string& host,
                                                   int port,
                                                   const std::string& metric_name,
                                                   HttpMetricOptions opts) {
  return std::make_unique<HttpMetricBackend>(host, port, metric_name, opts);
}

}  // namespace segale
