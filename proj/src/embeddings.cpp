#include "segale/embeddings.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace segale {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void normalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    float n = m.row(i).norm();
    if (!std::isfinite(n) || n == 0.0f)
      throw std::runtime_error("embedding row " + std::to_string(i) +
                               " is zero or non-finite");
    if (std::abs(n - 1.0f) > 1e-6f) m.row(i) /= n;
  }
}

}  // namespace

OverlapIndex build_overlaps(const SentenceList& sentences, int max_overlap) {
  if (max_overlap < 2) throw std::invalid_argument("max_overlap must be >= 2");
  const int n = static_cast<int>(sentences.sentences.size());
  if (n == 0) throw std::invalid_argument("empty sentence list");
  const int cap = max_overlap - 1;  // per-side length cap
  const std::string joiner = joiner_for_lang(sentences.lang);

  OverlapIndex index;
  index.max_overlap = max_overlap;
  index.num_sentences = n;
  for (int start = 0; start < n; ++start) {
    for (int len = 1; len <= cap && start + len <= n; ++len) {
      std::string text = sentences.sentences[start];
      for (int k = 1; k < len; ++k) {
        text += joiner;
        text += sentences.sentences[start + k];
      }
      index.entries.push_back({{start, len}, std::move(text)});
    }
  }
  return index;
}

EmbeddingMatrix::EmbeddingMatrix(std::vector<BlockKey> keys, Matrix rows)
    : keys_(std::move(keys)), rows_(std::move(rows)) {
  if (static_cast<Eigen::Index>(keys_.size()) != rows_.rows())
    throw std::invalid_argument("key/row count mismatch");
  normalize_rows(rows_);
  for (size_t i = 0; i < keys_.size(); ++i) {
    if (!index_.emplace(keys_[i], static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate block key");
  }
}

int EmbeddingMatrix::row_of(BlockKey key) const {
  auto it = index_.find(key);
  if (it == index_.end())
    throw std::out_of_range("no embedding for block (" +
                            std::to_string(key.start) + "," +
                            std::to_string(key.length) + ")");
  return it->second;
}

int EmbeddingMatrix::num_sentences() const {
  int n = 0;
  for (const auto& k : keys_)
    if (k.length == 1) ++n;
  return n;
}

EmbeddingMatrix embed(EmbeddingProvider& provider, const OverlapIndex& index) {
  std::vector<std::string> texts;
  texts.reserve(index.entries.size());
  std::vector<BlockKey> keys;
  keys.reserve(index.entries.size());
  for (const auto& e : index.entries) {
    texts.push_back(e.text);
    keys.push_back(e.key);
  }
  Matrix rows = provider.embed(texts);
  if (rows.rows() != static_cast<Eigen::Index>(texts.size()))
    throw std::runtime_error("provider returned wrong row count");
  return EmbeddingMatrix(std::move(keys), std::move(rows));
}

// ---------------------------------------------------------------------------
// Synthetic embedder
// ---------------------------------------------------------------------------

namespace {

// Extract canonical keys delimited by U+27E6 / U+27E7 markers.
std::vector<std::string> extract_keys(const std::string& text) {
  static const std::string kOpen = "\xe2\x9f\xa6";   // ⟦
  static const std::string kClose = "\xe2\x9f\xa7";  // ⟧
  std::vector<std::string> keys;
  size_t pos = 0;
  while (true) {
    size_t open = text.find(kOpen, pos);
    if (open == std::string::npos) break;
    size_t close = text.find(kClose, open + kOpen.size());
    if (close == std::string::npos) break;
    keys.push_back(text.substr(open + kOpen.size(), close - open - kOpen.size()));
    pos = close + kClose.size();
  }
  if (keys.empty()) keys.push_back(text);
  return keys;
}

class SyntheticEmbedder : public EmbeddingProvider {
 public:
  SyntheticEmbedder(std::uint64_t seed, int dim, double noise)
      : seed_(seed), dim_(dim), noise_(noise) {
    if (dim < 8) throw std::invalid_argument("dim must be >= 8");
    if (noise < 0.0 || noise >= 0.5)
      throw std::invalid_argument("noise must be in [0, 0.5)");
  }

  Matrix embed(const std::vector<std::string>& texts) override {
    Matrix out(texts.size(), dim_);
    for (size_t i = 0; i < texts.size(); ++i)
      out.row(i) = text_vector(texts[i]);
    return out;
  }

 private:
  Eigen::RowVectorXf key_vector(const std::string& key) const {
    std::mt19937_64 rng(seed_ ^ fnv1a(key));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::RowVectorXf v(dim_);
    for (int d = 0; d < dim_; ++d) v[d] = static_cast<float>(gauss(rng));
    v /= v.norm();
    return v;
  }

  Eigen::RowVectorXf text_vector(const std::string& text) const {
    auto keys = extract_keys(text);
    Eigen::RowVectorXf v = Eigen::RowVectorXf::Zero(dim_);
    for (const auto& k : keys) v += key_vector(k);
    v /= static_cast<float>(keys.size());
    if (noise_ > 0.0) {
      // per-text perturbation of relative scale `noise` on the unit sphere
      std::mt19937_64 rng(~seed_ ^ fnv1a(text));
      std::normal_distribution<double> gauss(0.0, 1.0);
      const float scale =
          static_cast<float>(noise_ / std::sqrt(static_cast<double>(dim_)));
      for (int d = 0; d < dim_; ++d)
        v[d] += scale * static_cast<float>(gauss(rng));
    }
    v /= v.norm();
    return v;
  }

  std::uint64_t seed_;
  int dim_;
  double noise_;
};

}  // namespace

std::unique_ptr<EmbeddingProvider> synthetic_bilingual_embedder(
    std::uint64_t seed, int dim, double noise) {
  return std::make_unique<SyntheticEmbedder>(seed, dim, noise);
}

// ---------------------------------------------------------------------------
// SGEM file format
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'S', 'G', 'E', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("truncated embedding file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

Matrix read_sgem_rows(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open embedding file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad magic in embedding file: " + path);
  std::uint32_t version = get_u32(is);
  if (version != kVersion)
    throw std::runtime_error("unsupported embedding file version " +
                             std::to_string(version));
  std::uint32_t count = get_u32(is);
  std::uint32_t dim = get_u32(is);
  if (dim == 0) throw std::runtime_error("zero dim in embedding file");
  Matrix rows(count, dim);
  static_assert(sizeof(float) == 4);
  is.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(count) * dim * 4);
  if (!is) throw std::runtime_error("truncated embedding file: " + path);
  return rows;
}

}  // namespace

void write_embedding_file(const std::string& path, const EmbeddingMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write embedding file: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(m.size()));
  put_u32(os, static_cast<std::uint32_t>(m.dim()));
  os.write(reinterpret_cast<const char*>(m.rows().data()),
           static_cast<std::streamsize>(m.size()) * m.dim() * 4);
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_embedding_texts(const std::string& path, const OverlapIndex& index) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write text file: " + path);
  for (const auto& e : index.entries) os << e.text << '\n';
}

EmbeddingMatrix read_embedding_file(const std::string& path,
                                    const std::vector<BlockKey>& keys) {
  Matrix rows = read_sgem_rows(path);
  if (rows.rows() != static_cast<Eigen::Index>(keys.size()))
    throw std::runtime_error("embedding file row count mismatch: " + path);
  return EmbeddingMatrix(keys, std::move(rows));
}

EmbeddingMatrix read_embedding_file(const std::string& path) {
  Matrix rows = read_sgem_rows(path);
  std::vector<BlockKey> keys(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    keys[i] = {static_cast<int>(i), 1};
  return EmbeddingMatrix(std::move(keys), std::move(rows));
}

// ---------------------------------------------------------------------------
// File-backed provider
// ---------------------------------------------------------------------------

namespace {

class FileProvider : public EmbeddingProvider {
 public:
  explicit FileProvider(const std::string& path) : rows_(read_sgem_rows(path)) {}

  Matrix embed(const std::vector<std::string>& texts) override {
    if (rows_.rows() != static_cast<Eigen::Index>(texts.size()))
      throw std::runtime_error(
          "file provider row count (" + std::to_string(rows_.rows()) +
          ") does not match requested texts (" + std::to_string(texts.size()) +
          ")");
    return rows_;
  }

 private:
  Matrix rows_;
};

}  // namespace

std::unique_ptr<EmbeddingProvider> file_embedding_provider(
    const std::string& path) {
  return std::make_unique<FileProvider>(path);
}

// ---------------------------------------------------------------------------
// HTTP provider
// ---------------------------------------------------------------------------

namespace {

class HttpProvider : public EmbeddingProvider {
 public:
  HttpProvider(std::string host, int port, HttpProviderOptions opts)
      : host_(std::move(host)), port_(port), opts_(opts) {}

  Matrix embed(const std::vector<std::string>& texts) override {
    const int n = static_cast<int>(texts.size());
    const int bs = opts_.batch_size;
    const int num_batches = (n + bs - 1) / bs;

    std::vector<std::vector<std::vector<float>>> results(num_batches);
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
          results[b] = post_batch(texts, lo, hi);
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
    if (failed.load()) throw std::runtime_error("embedding service: " + error);

    int dim = -1;
    for (const auto& batch : results)
      for (const auto& row : batch) {
        if (dim < 0) dim = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != dim)
          throw std::runtime_error("dimension mismatch across batches");
      }
    if (dim <= 0) throw std::runtime_error("embedding service returned no rows");

    Matrix out(n, dim);
    int r = 0;
    for (const auto& batch : results)
      for (const auto& row : batch) {
        for (int d = 0; d < dim; ++d) out(r, d) = row[d];
        ++r;
      }
    if (r != n) throw std::runtime_error("embedding service row count mismatch");
    return out;
  }

 private:
  std::vector<std::vector<float>> post_batch(const std::vector<std::string>& texts,
                                             int lo, int hi) {
    nlohmann::json req;
    req["texts"] = std::vector<std::string>(texts.begin() + lo, texts.begin() + hi);
    const std::string body = req.dump();

    httplib::Client client(host_, port_);
    client.set_read_timeout(60, 0);
    for (int attempt = 0;; ++attempt) {
      auto res = client.Post("/embed", body, "application/json");
      if (res && res->status < 500) {
        if (res->status != 200)
          throw std::runtime_error("embedding service returned status " +
                                   std::to_string(res->status) + " for rows [" +
                                   std::to_string(lo) + "," + std::to_string(hi) +
                                   ")");
        auto json = nlohmann::json::parse(res->body);
        auto rows = json.at("embeddings").get<std::vector<std::vector<float>>>();
        if (rows.size() != static_cast<size_t>(hi - lo))
          throw std::runtime_error("embedding service row count mismatch for rows [" +
                                   std::to_string(lo) + "," + std::to_string(hi) + ")");
        return rows;
      }
      if (attempt >= opts_.max_retries)
        throw std::runtime_error("embedding service unreachable after " +
                                 std::to_string(opts_.max_retries) +
                                 " retries for rows [" + std::to_string(lo) + "," +
                                 std::to_string(hi) + ")");
      std::this_thread::sleep_for(
          std::chrono::milliseconds(opts_.backoff_base_ms << attempt));
    }
  }

  std::string host_;
  int port_;
  HttpProviderOptions opts_;
};

}  // namespace

std::unique_ptr<EmbeddingProvider> http_embedding_provider(
    const std::string& host, int port, HttpProviderOptions opts) {
  return std::make_unique<HttpProvider>(host, port, opts);
}

}  // namespace segale
