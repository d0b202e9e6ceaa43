#ifndef SEGALE_EMBEDDINGS_HPP
#define SEGALE_EMBEDDINGS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "segale/textseg.hpp"

namespace segale {

using Matrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXf;

/// (start sentence index, block length) key for an overlap block.
struct BlockKey {
  int start = 0;
  int length = 1;
  friend auto operator<=>(const BlockKey&, const BlockKey&) = default;
};

/// Inventory of consecutive-sentence blocks considered by the aligner.
/// Per-side block length is capped at max_overlap - 1 so that a non-null
/// alignment block of size N-M always satisfies N + M <= max_overlap.
struct OverlapIndex {
  struct Entry {
    BlockKey key;
    std::string text;
  };
  std::vector<Entry> entries;  // (start, length) lexicographic order
  int max_overlap = 16;
  int num_sentences = 0;
};

OverlapIndex build_overlaps(const SentenceList& sentences, int max_overlap);

/// Unit-norm float32 embedding rows covering exactly one OverlapIndex.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<BlockKey> keys, Matrix rows);

  int dim() const { return static_cast<int>(rows_.cols()); }
  int size() const { return static_cast<int>(rows_.rows()); }
  const Matrix& rows() const { return rows_; }
  const std::vector<BlockKey>& keys() const { return keys_; }

  bool has(BlockKey key) const { return index_.count(key) > 0; }
  int row_of(BlockKey key) const;
  Eigen::Ref<const Eigen::RowVectorXf> vec(BlockKey key) const {
    return rows_.row(row_of(key));
  }

  /// Number of length-1 rows (sentence count covered by the index).
  int num_sentences() const;

 private:
  std::vector<BlockKey> keys_;
  Matrix rows_;
  std::map<BlockKey, int> index_;
};

/// Text -> embedding backend. Implementations must be callable from
/// multiple threads.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One row per input text. Throws on failure; error message carries the
  /// failing batch range.
  virtual Matrix embed(const std::vector<std::string>& texts) = 0;
};

/// Embed every entry of an overlap index; rows are L2-normalized on ingestion.
EmbeddingMatrix embed(EmbeddingProvider& provider, const OverlapIndex& index);

/// Deterministic test embedder. Texts carry canonical keys as
/// "⟦key⟧" markers; each key maps to a seeded unit vector, a text
/// with several keys maps to the normalized mean of its key vectors, and
/// Gaussian noise of relative scale `noise` is added per distinct text.
std::unique_ptr<EmbeddingProvider> synthetic_bilingual_embedder(
    std::uint64_t seed, int dim, double noise);

/// Reads vectors from an SGEM file, served in row order against the index.
std::unique_ptr<EmbeddingProvider> file_embedding_provider(
    const std::string& path);

struct HttpProviderOptions {
  int batch_size = 64;
  int max_in_flight = 4;
  int max_retries = 3;
  int backoff_base_ms = 100;
};

/// Client for the POST /embed service.
std::unique_ptr<EmbeddingProvider> http_embedding_provider(
    const std::string& host, int port, HttpProviderOptions opts = {});

/// SGEM binary format: magic "SGEM", u32 LE version (=1), u32 row count,
/// u32 dim, then float32 LE rows in index order.
void write_embedding_file(const std::string& path, const EmbeddingMatrix& m);
void write_embedding_texts(const std::string& path, const OverlapIndex& index);
EmbeddingMatrix read_embedding_file(const std::string& path,
                                    const std::vector<BlockKey>& keys);
/// Read rows only (keys synthesized as (i,1)); for raw round-trip checks.
EmbeddingMatrix read_embedding_file(const std::string& path);

}  // namespace segale

#endif
