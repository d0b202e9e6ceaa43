#ifndef SEGALE_DATAGEN_HPP
#define SEGALE_DATAGEN_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "segale/textseg.hpp"

namespace segale {

enum class PerturbationKind { over_translate, under_translate, flex_boundary };

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::under_translate;
  double rate = 0.10;
  std::uint64_t rng_seed = 0;
};

/// Parallel document used by the perturbation and chunking tools.
struct ParallelDoc {
  std::string doc_id;
  std::vector<std::string> src;
  std::vector<std::string> hyp;
  std::vector<std::string> ref;  // may be empty
};

enum class Side { source, reference, hypothesis };

struct DeletionRecord {
  std::string doc_id;
  int seg_index = 0;
  Side side = Side::hypothesis;
};

struct DropResult {
  std::vector<ParallelDoc> corpus;
  std::vector<DeletionRecord> manifest;
};

/// Remove round(rate * eligible segments) segments uniformly without
/// replacement, never from single-segment documents. over_translate deletes
/// from source and reference, under_translate from the hypothesis side.
DropResult drop_segments(const std::vector<ParallelDoc>& corpus,
                         const PerturbationSpec& spec);

using SimilarityFn = std::function<double(const std::string& merged,
                                          const std::string& original_pair)>;
using RewriterFn = std::function<std::string(const std::string& first,
                                             const std::string& second)>;

struct MergeRecord {
  std::string doc_id;
  int first_index = 0;  // merged with first_index + 1
  std::string merged_text;
};

struct MergeResult {
  std::vector<ParallelDoc> corpus;
  std::vector<MergeRecord> manifest;
  bool exhausted = false;  // quota not met before running out of candidates
};

/// Flex-boundary perturbation: sample eligible adjacent source pairs (neither
/// first nor last in a document), rewrite them into one sentence, and accept
/// iff similarity(merged, pair) > accept_threshold (strict). Rejected pairs
/// are resampled until the quota of round(rate * mergeable segments) merges
/// is met or candidates run out.
MergeResult merge_candidates(const std::vector<ParallelDoc>& source_docs,
                             double rate, const SimilarityFn& similarity,
                             const RewriterFn& rewriter,
                             double accept_threshold = 0.85,
                             std::uint64_t rng_seed = 0);

enum class NegativeKind { dropped_sentence, nearby_substitution };

struct Triplet {
  std::string query;
  std::string positive;
  std::string negative;
  NegativeKind negative_kind = NegativeKind::dropped_sentence;
};

/// Contrastive triplets from a sentence-parallel corpus: each adjacent pair
/// gives a 2-sentence query/positive plus two negatives (one sentence
/// dropped; one nearby-substituted, looking forward 1..3 sentences).
std::vector<Triplet> build_triplets(
    const std::vector<std::pair<std::string, std::string>>& corpus,
    std::uint64_t rng_seed);

using TokenCounter = std::function<int(const std::string&)>;

/// Whitespace tokens for space-delimited scripts, characters for CJK.
TokenCounter builtin_token_counter(const std::string& lang);

struct Chunk {
  std::string text;
  int token_count = 0;
  bool over_budget = false;  // single sentence exceeding max_tokens
};

/// Greedy whole-sentence packing under a token budget. An over-long sentence
/// becomes its own over-budget chunk.
std::vector<Chunk> chunk_document(const std::string& text, int max_tokens,
                                  const TokenCounter& counter,
                                  const std::string& lang);

/// Overlap size estimate from a gold/auto segmentation pair of the same
/// text: the maximum number of auto segments overlapping one gold segment,
/// plus a safety margin of 1.
int estimate_overlap_size(const SentenceList& gold_segments,
                          const SentenceList& auto_segments);

}  // namespace segale

#endif
