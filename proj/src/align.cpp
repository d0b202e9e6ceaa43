#include "segale/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace segale {

double AlignmentPath::total_cost() const {
  double total = 0.0;
  for (const auto& b : blocks) total += b.cost;
  return total;
}

double block_cost(const Eigen::Ref<const Eigen::RowVectorXf>& src_vec,
                  const Eigen::Ref<const Eigen::RowVectorXf>& tgt_vec,
                  int src_len, int tgt_len, double normalizer) {
  if (normalizer <= 0.0) throw std::invalid_argument("normalizer must be > 0");
  if (src_len < 1 || tgt_len < 1)
    throw std::invalid_argument("block sides must be >= 1");
  double dot = static_cast<double>(src_vec.dot(tgt_vec));
  if (!std::isfinite(dot)) throw std::invalid_argument("non-finite embedding");
  double c = (1.0 - dot) * src_len * tgt_len /
             (normalizer * (src_len + tgt_len) / 2.0);
  return std::max(0.0, c);
}

double cost_normalizer(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                       const AlignParams& params) {
  std::vector<int> src_rows, tgt_rows;
  for (size_t i = 0; i < src.keys().size(); ++i)
    if (src.keys()[i].length == 1) src_rows.push_back(static_cast<int>(i));
  for (size_t i = 0; i < tgt.keys().size(); ++i)
    if (tgt.keys()[i].length == 1) tgt_rows.push_back(static_cast<int>(i));
  if (src_rows.empty() || tgt_rows.empty())
    throw std::invalid_argument("empty embedding matrix");

  std::mt19937_64 rng(params.rng_seed);
  std::uniform_int_distribution<size_t> src_pick(0, src_rows.size() - 1);
  std::uniform_int_distribution<size_t> tgt_pick(0, tgt_rows.size() - 1);
  double sum = 0.0;
  for (int s = 0; s < params.random_samples; ++s) {
    int i = src_rows[src_pick(rng)];
    int j = tgt_rows[tgt_pick(rng)];
    sum += 1.0 - static_cast<double>(src.rows().row(i).dot(tgt.rows().row(j)));
  }
  return std::max(1e-6, sum / params.random_samples);
}

double skip_cost(std::vector<double> one_to_one_costs, double beta_skip) {
  if (one_to_one_costs.empty())
    throw std::invalid_argument("empty 1-1 cost list");
  if (beta_skip <= 0.0 || beta_skip >= 1.0)
    throw std::invalid_argument("beta_skip must be in (0,1)");
  std::sort(one_to_one_costs.begin(), one_to_one_costs.end());
  const size_t n = one_to_one_costs.size();
  if (n == 1) return one_to_one_costs[0];
  double pos = beta_skip * static_cast<double>(n - 1);
  size_t lo = static_cast<size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= n) return one_to_one_costs[n - 1];
  return one_to_one_costs[lo] + frac * (one_to_one_costs[lo + 1] - one_to_one_costs[lo]);
}

namespace {

// One side of an instance at some resolution level. `full` carries the
// precomputed overlap blocks at the original resolution; at coarser levels
// block vectors are normalized means of the per-sentence rows.
struct SideView {
  Matrix base;                          // one unit row per sentence
  const EmbeddingMatrix* full = nullptr;

  int n() const { return static_cast<int>(base.rows()); }

  Eigen::RowVectorXf block_vec(int start, int len) const {
    if (len == 1) return base.row(start);
    if (full) {
      BlockKey key{start, len};
      if (full->has(key)) return full->vec(key);
    }
    Eigen::RowVectorXf v = base.middleRows(start, len).colwise().sum();
    float norm = v.norm();
    if (norm > 0.0f) v /= norm;
    return v;
  }
};

SideView make_side_view(const EmbeddingMatrix& m) {
  std::vector<int> rows;
  for (size_t i = 0; i < m.keys().size(); ++i)
    if (m.keys()[i].length == 1) rows.push_back(static_cast<int>(i));
  if (rows.empty()) throw std::invalid_argument("matrix has no 1-1 rows");
  SideView view;
  view.base.resize(rows.size(), m.dim());
  for (size_t r = 0; r < rows.size(); ++r) view.base.row(r) = m.rows().row(rows[r]);
  view.full = &m;
  return view;
}

SideView downsample(const SideView& side) {
  int n = side.n();
  int half = (n + 1) / 2;
  SideView out;
  out.base.resize(half, side.base.cols());
  for (int k = 0; k < half; ++k) {
    Eigen::RowVectorXf v = side.base.row(2 * k);
    if (2 * k + 1 < n) v += side.base.row(2 * k + 1);
    float norm = v.norm();
    if (norm > 0.0f) v /= norm;
    out.base.row(k) = v;
  }
  return out;
}

// Inclusive target band [lo, hi] per DP state index i in 0..N.
struct Band {
  std::vector<int> lo, hi;
};

Band full_band(int n, int m) {
  Band b;
  b.lo.assign(n + 1, 0);
  b.hi.assign(n + 1, m);
  return b;
}

// Candidate moves in tie-break preference order: substantive blocks before
// skips (so exact cost ties resolve to alignments, not nulls), smaller blocks
// before larger, then smaller source advancement.
struct Move {
  int n, m;  // sentences consumed per side; (1,0)/(0,1) are nulls
};

std::vector<Move> enumerate_moves(int max_overlap, bool one_to_one_only) {
  std::vector<Move> moves;
  if (one_to_one_only) {
    moves.push_back({1, 1});
  } else {
    const int cap = max_overlap - 1;
    for (int total = 2; total <= max_overlap; ++total)
      for (int n = std::max(1, total - cap); n <= std::min(cap, total - 1); ++n)
        moves.push_back({n, total - n});
  }
  moves.push_back({0, 1});
  moves.push_back({1, 0});
  return moves;
}

std::vector<double> banded_one_to_one_costs(const SideView& src, const SideView& tgt,
                                            const Band& band, double normalizer) {
  std::vector<double> costs;
  const int n = src.n(), m = tgt.n();
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, band.lo[i]);
    int hi = std::min(m - 1, band.hi[i]);
    for (int j = lo; j <= hi; ++j)
      costs.push_back(block_cost(src.base.row(i), tgt.base.row(j), 1, 1, normalizer));
  }
  if (costs.empty()) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j)
        costs.push_back(block_cost(src.base.row(i), tgt.base.row(j), 1, 1, normalizer));
  }
  return costs;
}

AlignmentPath banded_dp(const SideView& src, const SideView& tgt, const Band& band,
                        double skip, double normalizer, int max_overlap,
                        bool one_to_one_only) {
  const int n = src.n(), m = tgt.n();
  const double inf = std::numeric_limits<double>::infinity();
  const auto moves = enumerate_moves(max_overlap, one_to_one_only);

  // Row-sliced DP table: state (i, j) lives at row i, offset j - band.lo[i].
  std::vector<std::vector<double>> cost(n + 1);
  std::vector<std::vector<Move>> back(n + 1);
  auto in_band = [&](int i, int j) {
    return j >= band.lo[i] && j <= band.hi[i];
  };
  for (int i = 0; i <= n; ++i) {
    int width = band.hi[i] - band.lo[i] + 1;
    cost[i].assign(width, inf);
    back[i].assign(width, {0, 0});
  }
  if (!in_band(0, 0) || !in_band(n, m))
    throw std::logic_error("band excludes DP endpoints");
  cost[0][0 - band.lo[0]] = 0.0;

  for (int i = 0; i <= n; ++i) {
    for (int j = band.lo[i]; j <= band.hi[i]; ++j) {
      if (i == 0 && j == 0) continue;
      double best = inf;
      Move best_move{0, 0};
      for (const auto& mv : moves) {
        int pi = i - mv.n, pj = j - mv.m;
        if (pi < 0 || pj < 0 || !in_band(pi, pj)) continue;
        double prev = cost[pi][pj - band.lo[pi]];
        if (prev == inf) continue;
        double step;
        if (mv.n == 0 || mv.m == 0) {
          step = skip;
        } else {
          step = block_cost(src.block_vec(pi, mv.n), tgt.block_vec(pj, mv.m),
                            mv.n, mv.m, normalizer);
        }
        double total = prev + step;
        if (total < best) {
          best = total;
          best_move = mv;
        }
      }
      cost[i][j - band.lo[i]] = best;
      back[i][j - band.lo[i]] = best_move;
    }
  }

  if (cost[n][m - band.lo[n]] == inf)
    throw std::logic_error("DP found no path within band");

  AlignmentPath path;
  path.src_len = n;
  path.tgt_len = m;
  int i = n, j = m;
  while (i != 0 || j != 0) {
    Move mv = back[i][j - band.lo[i]];
    AlignmentBlock block;
    block.src_lo = i - mv.n;
    block.src_hi = i;
    block.tgt_lo = j - mv.m;
    block.tgt_hi = j;
    if (mv.n == 0 || mv.m == 0) {
      block.cost = skip;
    } else {
      block.cost = block_cost(src.block_vec(i - mv.n, mv.n),
                              tgt.block_vec(j - mv.m, mv.m), mv.n, mv.m,
                              normalizer);
    }
    path.blocks.push_back(block);
    i -= mv.n;
    j -= mv.m;
  }
  std::reverse(path.blocks.begin(), path.blocks.end());
  return path;
}

AlignmentPath exact_core(const SideView& src, const SideView& tgt,
                         const AlignParams& params, double normalizer) {
  Band band = full_band(src.n(), tgt.n());
  auto costs = banded_one_to_one_costs(src, tgt, band, normalizer);
  double skip = skip_cost(std::move(costs), params.beta_skip);
  return banded_dp(src, tgt, band, skip, normalizer, params.max_overlap, false);
}

// Band of +-band_width target sentences around the up-scaled coarse path.
Band band_from_coarse_path(const AlignmentPath& coarse, int n, int m,
                           int band_width) {
  // Anchor points (src boundary -> tgt boundary) at twice the coarse scale.
  std::vector<std::pair<int, int>> anchors;
  anchors.emplace_back(0, 0);
  for (const auto& b : coarse.blocks)
    anchors.emplace_back(2 * b.src_hi, 2 * b.tgt_hi);
  anchors.emplace_back(n, m);

  Band band;
  band.lo.assign(n + 1, 0);
  band.hi.assign(n + 1, m);
  size_t a = 0;
  for (int i = 0; i <= n; ++i) {
    while (a + 1 < anchors.size() && anchors[a + 1].first < i) ++a;
    // interpolate target position between surrounding anchors
    int j;
    if (a + 1 >= anchors.size() || anchors[a + 1].first == anchors[a].first) {
      j = anchors[a].second;
    } else {
      const auto& [s0, t0] = anchors[a];
      const auto& [s1, t1] = anchors[a + 1];
      j = t0 + (t1 - t0) * (i - s0) / (s1 - s0);
    }
    band.lo[i] = std::clamp(j - band_width, 0, m);
    band.hi[i] = std::clamp(j + band_width, 0, m);
  }
  // monotone envelope; keep endpoints reachable
  for (int i = 1; i <= n; ++i) {
    band.lo[i] = std::max(band.lo[i], band.lo[i - 1]);
    band.hi[i] = std::max(band.hi[i], band.hi[i - 1]);
  }
  band.lo[0] = 0;
  band.hi[n] = m;
  for (int i = 0; i <= n; ++i) band.lo[i] = std::min(band.lo[i], band.hi[i]);
  return band;
}

AlignmentPath coarse_recurse(const SideView& src, const SideView& tgt,
                             const AlignParams& params, double normalizer) {
  const int n = src.n(), m = tgt.n();
  if (std::min(n, m) <= params.coarse_min_len) {
    // coarsest level: 1-1 and skip moves only, full band
    Band band = full_band(n, m);
    auto costs = banded_one_to_one_costs(src, tgt, band, normalizer);
    double skip = skip_cost(std::move(costs), params.beta_skip);
    return banded_dp(src, tgt, band, skip, normalizer, params.max_overlap, true);
  }
  AlignmentPath coarse =
      coarse_recurse(downsample(src), downsample(tgt), params, normalizer);
  Band band = band_from_coarse_path(coarse, n, m, params.band_width);
  auto costs = banded_one_to_one_costs(src, tgt, band, normalizer);
  double skip = skip_cost(std::move(costs), params.beta_skip);
  return banded_dp(src, tgt, band, skip, normalizer, params.max_overlap, false);
}

}  // namespace

AlignmentPath exact_align(const EmbeddingMatrix& src, const EmbeddingMatrix& tgt,
                          const AlignParams& params) {
  SideView s = make_side_view(src);
  SideView t = make_side_view(tgt);
  if (static_cast<long long>(s.n()) * t.n() > 1'000'000)
    throw std::invalid_argument(
        "instance too large for exact_align; use coarse_to_fine_align");
  double normalizer = cost_normalizer(src, tgt, params);
  return exact_core(s, t, params, normalizer);
}

AlignmentPath coarse_to_fine_align(const EmbeddingMatrix& src,
                                   const EmbeddingMatrix& tgt,
                                   const AlignParams& params) {
  SideView s = make_side_view(src);
  SideView t = make_side_view(tgt);
  double normalizer = cost_normalizer(src, tgt, params);
  if (std::min(s.n(), t.n()) <= params.coarse_min_len &&
      static_cast<long long>(s.n()) * t.n() <= 1'000'000) {
    return exact_core(s, t, params, normalizer);
  }
  AlignmentPath coarse =
      coarse_recurse(downsample(s), downsample(t), params, normalizer);
  Band band = band_from_coarse_path(coarse, s.n(), t.n(), params.band_width);
  auto costs = banded_one_to_one_costs(s, t, band, normalizer);
  double skip = skip_cost(std::move(costs), params.beta_skip);
  return banded_dp(s, t, band, skip, normalizer, params.max_overlap, false);
}

std::pair<double, double> path_stats(const AlignmentPath& path) {
  if (path.blocks.empty()) throw std::invalid_argument("empty path");
  double sum = 0.0;
  int non_null = 0, null_count = 0;
  for (const auto& b : path.blocks) {
    if (b.is_null()) {
      ++null_count;
    } else {
      sum += b.cost;
      ++non_null;
    }
  }
  double avg = non_null > 0 ? sum / non_null : 0.0;
  double na = static_cast<double>(null_count) / path.blocks.size();
  return {avg, na};
}

void validate_path(const AlignmentPath& path) {
  int src_pos = 0, tgt_pos = 0;
  for (const auto& b : path.blocks) {
    if (b.src_len() == 0 && b.tgt_len() == 0)
      throw std::logic_error("block with both spans empty");
    if (b.src_len() < 0 || b.tgt_len() < 0)
      throw std::logic_error("negative span");
    if (b.src_lo != src_pos || b.tgt_lo != tgt_pos)
      throw std::logic_error("non-contiguous path");
    src_pos = b.src_hi;
    tgt_pos = b.tgt_hi;
  }
  if (src_pos != path.src_len || tgt_pos != path.tgt_len)
    throw std::logic_error("path does not cover both sides");
}

}  // namespace segale
