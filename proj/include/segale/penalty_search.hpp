#ifndef SEGALE_PENALTY_SEARCH_HPP
#define SEGALE_PENALTY_SEARCH_HPP

#include <string>
#include <vector>

#include "segale/align.hpp"

namespace segale {

struct SearchParams {
  double beta_start = 0.2;
  double beta_step = 0.005;
  double avg_cost_floor = 0.3;
  double step_na_ceiling = 0.15;
  double avg_cost_ceiling = 0.7;
  int max_steps = 40;
};

enum class TerminationReason {
  cost_floor,
  na_spike,
  cost_increase,
  cost_ceiling,
  exhausted,
};

const char* to_string(TerminationReason reason);

struct SearchStep {
  double beta = 0.0;
  double na_ratio = 0.0;
  double avg_cost = 0.0;
  std::string verdict;  // "accepted" or the triggered condition
};

struct AlignmentResult {
  AlignmentPath path;
  double na_ratio = 0.0;
  double avg_cost = 0.0;
  double beta_final = 0.0;
  std::vector<SearchStep> trace;
  TerminationReason termination_reason = TerminationReason::exhausted;
};

/// Downward sweep over beta_skip with over-deletion monitoring. Conditions
/// are evaluated per step in fixed order: avg-cost increase (vs the previous
/// accepted step), cost ceiling, cost floor, NA spike. The first three revert
/// or stop; otherwise the step is accepted and the sweep continues.
AlignmentResult adaptive_align(const EmbeddingMatrix& src,
                               const EmbeddingMatrix& tgt,
                               const AlignParams& align_params,
                               const SearchParams& search_params);

}  // namespace segale

#endif
