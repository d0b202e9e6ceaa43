#ifndef SEGALE_ALIGN_HPP
#define SEGALE_ALIGN_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "segale/embeddings.hpp"

namespace segale {

/// One step of an alignment path. Half-open spans; a block with exactly one
/// empty span is a null alignment (always unit-sized on the non-empty side).
struct AlignmentBlock {
  int src_lo = 0, src_hi = 0;
  int tgt_lo = 0, tgt_hi = 0;
  double cost = 0.0;

  int src_len() const { return src_hi - src_lo; }
  int tgt_len() const { return tgt_hi - tgt_lo; }
  bool is_null() const { return src_len() == 0 || tgt_len() == 0; }
  friend bool operator==(const AlignmentBlock&, const AlignmentBlock&) = default;
};

struct AlignmentPath {
  std::vector<AlignmentBlock> blocks;
  int src_len = 0;
  int tgt_len = 0;

  double total_cost() const;
  friend bool operator==(const AlignmentPath&, const AlignmentPath&) = default;
};

struct AlignParams {
  int max_overlap = 16;
  double beta_skip = 0.2;
  int random_samples = 128;
  std::uint64_t rng_seed = 0;
  int band_width = 10;
  int coarse_min_len = 64;
};

/// Size-penalized cosine cost of aligning an N-M block. Both vectors must be
/// unit-norm; clamped below at zero.
double block_cost(const Eigen::Ref<const Eigen::RowVectorXf>& src_vec,
                  const Eigen::Ref<const Eigen::RowVectorXf>& tgt_vec,
                  int src_len, int tgt_len, double normalizer);

/// Scale estimate for block costs: mean of (1 - cos) over seeded random
/// draws of 1-1 source/target rows, floored at 1e-6.
double cost_normalizer(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                       const AlignParams& params);

/// beta_skip-quantile (linear interpolation between order statistics) of the
/// 1-1 candidate cost distribution.
double skip_cost(std::vector<double> one_to_one_costs, double beta_skip);

/// Exhaustive DP over all monotonic block paths; guarded at N*M <= 1e6.
AlignmentPath exact_align(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                          const AlignParams& params);

/// Vecalign-style recursive coarse-to-fine approximation. Identical to
/// exact_align whenever min(N, M) <= coarse_min_len.
AlignmentPath coarse_to_fine_align(const EmbeddingMatrix& src,
                                   const EmbeddingMatrix& tgt,
                                   const AlignParams& params);

/// (avg cost over non-null blocks, null blocks / total blocks).
std::pair<double, double> path_stats(const AlignmentPath& path);

/// Throws std::logic_error if the path violates coverage or monotonicity.
void validate_path(const AlignmentPath& path);

}  // namespace segale

#endif
