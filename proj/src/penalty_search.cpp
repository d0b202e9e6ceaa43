#include "segale/penalty_search.hpp"

#include <optional>
#include <stdexcept>

namespace segale {

const char* to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::cost_floor: return "cost_floor";
    case TerminationReason::na_spike: return "na_spike";
    case TerminationReason::cost_increase: return "cost_increase";
    case TerminationReason::cost_ceiling: return "cost_ceiling";
    case TerminationReason::exhausted: return "exhausted";
  }
  return "unknown";
}

namespace {

struct Accepted {
  AlignmentPath path;
  double beta;
  double na_ratio;
  double avg_cost;
};

}  // namespace

AlignmentResult adaptive_align(const EmbeddingMatrix& src,
                               const EmbeddingMatrix& tgt,
                               const AlignParams& align_params,
                               const SearchParams& search_params) {
  if (search_params.beta_step <= 0.0 ||
      search_params.beta_step >= search_params.beta_start)
    throw std::invalid_argument("beta_step must be in (0, beta_start)");
  if (search_params.avg_cost_floor <= 0.0 ||
      search_params.avg_cost_floor >= search_params.avg_cost_ceiling)
    throw std::invalid_argument("avg_cost_floor must be in (0, avg_cost_ceiling)");

  AlignmentResult result;
  std::vector<Accepted> accepted;

  auto finish = [&](const Accepted& pick, TerminationReason reason) {
    result.path = pick.path;
    result.beta_final = pick.beta;
    result.na_ratio = pick.na_ratio;
    result.avg_cost = pick.avg_cost;
    result.termination_reason = reason;
    return result;
  };

  // Under cost_ceiling the pick is the accepted step with the lowest avg cost
  // whose NA ratio stayed under the step ceiling; falls back to the last step.
  auto best_so_far = [&](const Accepted& fallback) -> const Accepted& {
    const Accepted* best = nullptr;
    for (const auto& a : accepted) {
      if (a.na_ratio > search_params.step_na_ceiling) continue;
      if (!best || a.avg_cost < best->avg_cost) best = &a;
    }
    return best ? *best : fallback;
  };

  double beta = search_params.beta_start;
  for (int step = 0; step < search_params.max_steps && beta > 0.0;
       ++step, beta -= search_params.beta_step) {
    AlignParams ap = align_params;
    ap.beta_skip = beta;
    AlignmentPath path = coarse_to_fine_align(src, tgt, ap);
    auto [avg_cost, na_ratio] = path_stats(path);

    Accepted current{std::move(path), beta, na_ratio, avg_cost};
    SearchStep trace_step{beta, na_ratio, avg_cost, ""};

    // Revert targets: previous accepted step, or this very step when it is
    // the first evaluation.
    const Accepted& revert_to = accepted.empty() ? current : accepted.back();

    if (!accepted.empty() && avg_cost > accepted.back().avg_cost) {
      trace_step.verdict = "cost_increase";
      result.trace.push_back(trace_step);
      return finish(revert_to, TerminationReason::cost_increase);
    }
    if (avg_cost > search_params.avg_cost_ceiling) {
      trace_step.verdict = "cost_ceiling";
      result.trace.push_back(trace_step);
      return finish(best_so_far(current), TerminationReason::cost_ceiling);
    }
    if (avg_cost < search_params.avg_cost_floor) {
      trace_step.verdict = "cost_floor";
      result.trace.push_back(trace_step);
      return finish(revert_to, TerminationReason::cost_floor);
    }
    if (na_ratio > search_params.step_na_ceiling) {
      trace_step.verdict = "na_spike";
      result.trace.push_back(trace_step);
      return finish(revert_to, TerminationReason::na_spike);
    }

    trace_step.verdict = "accepted";
    result.trace.push_back(trace_step);
    accepted.push_back(std::move(current));
  }

  if (accepted.empty())
    throw std::logic_error("adaptive search made no steps");
  return finish(accepted.back(), TerminationReason::exhausted);
}

}  // namespace segale
