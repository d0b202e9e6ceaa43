#include "segale/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace segale {

namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

std::string strip_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

}  // namespace

DropResult drop_segments(const std::vector<ParallelDoc>& corpus,
                         const PerturbationSpec& spec) {
  if (spec.rate <= 0.0 || spec.rate >= 1.0)
    throw std::invalid_argument("rate must be in (0,1)");
  const bool from_hyp = spec.kind == PerturbationKind::under_translate;

  // eligible (doc index, segment index) pairs; single-segment docs excluded
  std::vector<std::pair<int, int>> eligible;
  for (size_t d = 0; d < corpus.size(); ++d) {
    const auto& side = from_hyp ? corpus[d].hyp : corpus[d].src;
    if (side.size() < 2) continue;
    for (size_t i = 0; i < side.size(); ++i)
      eligible.emplace_back(static_cast<int>(d), static_cast<int>(i));
  }
  if (eligible.empty())
    throw std::invalid_argument("all documents are single-segment");

  const int quota =
      std::min<int>(round_half_up(spec.rate * eligible.size()),
                    static_cast<int>(eligible.size()));
  std::mt19937_64 rng(spec.rng_seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  std::vector<std::pair<int, int>> picked(eligible.begin(), eligible.begin() + quota);
  std::sort(picked.begin(), picked.end());

  DropResult result;
  result.corpus = corpus;
  std::map<int, std::vector<int>> by_doc;
  for (const auto& [d, i] : picked) by_doc[d].push_back(i);

  for (auto& [d, indices] : by_doc) {
    std::sort(indices.rbegin(), indices.rend());  // remove back-to-front
    auto& doc = result.corpus[d];
    for (int i : indices) {
      if (from_hyp) {
        doc.hyp.erase(doc.hyp.begin() + i);
        result.manifest.push_back({doc.doc_id, i, Side::hypothesis});
      } else {
        doc.src.erase(doc.src.begin() + i);
        result.manifest.push_back({doc.doc_id, i, Side::source});
        if (!doc.ref.empty() && i < static_cast<int>(doc.ref.size())) {
          doc.ref.erase(doc.ref.begin() + i);
          result.manifest.push_back({doc.doc_id, i, Side::reference});
        }
      }
    }
  }
  return result;
}

MergeResult merge_candidates(const std::vector<ParallelDoc>& source_docs,
                             double rate, const SimilarityFn& similarity,
                             const RewriterFn& rewriter, double accept_threshold,
                             std::uint64_t rng_seed) {
  if (rate <= 0.0 || rate >= 1.0)
    throw std::invalid_argument("rate must be in (0,1)");

  // Eligible adjacent pairs (i, i+1) with both segments interior to the doc.
  std::vector<std::pair<int, int>> candidates;  // (doc index, first index)
  for (size_t d = 0; d < source_docs.size(); ++d) {
    const int n = static_cast<int>(source_docs[d].src.size());
    for (int i = 1; i + 1 <= n - 2; ++i)
      candidates.emplace_back(static_cast<int>(d), i);
  }

  const int quota = round_half_up(rate * candidates.size());
  std::mt19937_64 rng(rng_seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);

  MergeResult result;
  result.corpus = source_docs;
  std::map<int, std::set<int>> merged_indices;  // doc -> segment indices consumed

  size_t cursor = 0;
  while (static_cast<int>(result.manifest.size()) < quota &&
         cursor < candidates.size()) {
    auto [d, i] = candidates[cursor++];
    const auto& used = merged_indices[d];
    if (used.count(i) || used.count(i + 1)) continue;  // overlaps an accepted merge

    const auto& doc = source_docs[d];
    std::string merged = rewriter(doc.src[i], doc.src[i + 1]);
    std::string original = doc.src[i] + " " + doc.src[i + 1];
    if (!(similarity(merged, original) > accept_threshold)) continue;  // strict

    merged_indices[d].insert(i);
    merged_indices[d].insert(i + 1);
    result.manifest.push_back({doc.doc_id, i, std::move(merged)});
  }
  result.exhausted = static_cast<int>(result.manifest.size()) < quota;

  // Apply accepted merges back-to-front per document.
  std::map<std::string, int> doc_index;
  for (size_t d = 0; d < result.corpus.size(); ++d)
    doc_index[result.corpus[d].doc_id] = static_cast<int>(d);
  std::vector<MergeRecord> ordered = result.manifest;
  std::sort(ordered.begin(), ordered.end(),
            [](const MergeRecord& a, const MergeRecord& b) {
              if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
              return a.first_index > b.first_index;
            });
  for (const auto& m : ordered) {
    auto& doc = result.corpus[doc_index[m.doc_id]];
    doc.src[m.first_index] = m.merged_text;
    doc.src.erase(doc.src.begin() + m.first_index + 1);
  }
  return result;
}

std::vector<Triplet> build_triplets(
    const std::vector<std::pair<std::string, std::string>>& corpus,
    std::uint64_t rng_seed) {
  if (corpus.size() < 5)
    throw std::invalid_argument("triplet corpus must have >= 5 pairs");
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> lookahead(1, 3);

  std::vector<Triplet> out;
  const int n = static_cast<int>(corpus.size());
  for (int i = 0; i + 1 < n; ++i) {
    std::string query = corpus[i].first + " " + corpus[i + 1].first;
    std::string positive = corpus[i].second + " " + corpus[i + 1].second;

    Triplet dropped;
    dropped.query = query;
    dropped.positive = positive;
    dropped.negative = coin(rng) == 0 ? corpus[i + 1].second : corpus[i].second;
    dropped.negative_kind = NegativeKind::dropped_sentence;
    if (dropped.negative != positive) out.push_back(std::move(dropped));

    int d = lookahead(rng);
    if (i + 1 + d < n) {
      Triplet nearby;
      nearby.query = query;
      nearby.positive = positive;
      nearby.negative = corpus[i].second + " " + corpus[i + 1 + d].second;
      nearby.negative_kind = NegativeKind::nearby_substitution;
      if (nearby.negative != positive) out.push_back(std::move(nearby));
    }
  }
  return out;
}

TokenCounter builtin_token_counter(const std::string& lang) {
  if (is_cjk_lang(lang)) {
    return [](const std::string& text) {
      // count code points, skipping whitespace
      int count = 0;
      for (size_t i = 0; i < text.size();) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : 4;
        if (!(len == 1 && std::isspace(c))) ++count;
        i += len;
      }
      return count;
    };
  }
  return [](const std::string& text) {
    int count = 0;
    bool in_token = false;
    for (char ch : text) {
      bool space = std::isspace(static_cast<unsigned char>(ch));
      if (!space && !in_token) ++count;
      in_token = !space;
    }
    return count;
  };
}

std::vector<Chunk> chunk_document(const std::string& text, int max_tokens,
                                  const TokenCounter& counter,
                                  const std::string& lang) {
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  SentenceList sentences = segment(text, lang);
  if (sentences.sentences.empty()) return {};
  const std::string joiner = joiner_for_lang(lang);

  std::vector<Chunk> chunks;
  Chunk current;
  for (const auto& s : sentences.sentences) {
    int tokens = counter(s);
    if (tokens > max_tokens) {
      if (current.token_count > 0) {
        chunks.push_back(std::move(current));
        current = {};
      }
      chunks.push_back({s, tokens, true});
      continue;
    }
    if (current.token_count > 0 && current.token_count + tokens > max_tokens) {
      chunks.push_back(std::move(current));
      current = {};
    }
    if (current.token_count > 0) current.text += joiner;
    current.text += s;
    current.token_count += tokens;
  }
  if (current.token_count > 0) chunks.push_back(std::move(current));
  return chunks;
}

int estimate_overlap_size(const SentenceList& gold_segments,
                          const SentenceList& auto_segments) {
  // Character spans in whitespace-stripped coordinates; both segmentations
  // must cover the same underlying text.
  auto spans = [](const SentenceList& list) {
    std::vector<std::pair<size_t, size_t>> out;
    size_t pos = 0;
    for (const auto& s : list.sentences) {
      size_t len = strip_whitespace(s).size();
      out.emplace_back(pos, pos + len);
      pos += len;
    }
    return out;
  };
  std::string gold_text, auto_text;
  for (const auto& s : gold_segments.sentences) gold_text += strip_whitespace(s);
  for (const auto& s : auto_segments.sentences) auto_text += strip_whitespace(s);
  if (gold_text != auto_text)
    throw std::invalid_argument("segmentations cover different text");

  auto gold_spans = spans(gold_segments);
  auto auto_spans = spans(auto_segments);

  int max_cover = 0;
  for (const auto& [glo, ghi] : gold_spans) {
    int cover = 0;
    for (const auto& [alo, ahi] : auto_spans) {
      if (alo < ghi && glo < ahi) ++cover;  // spans intersect
    }
    max_cover = std::max(max_cover, cover);
  }
  return max_cover + 1;  // safety margin
}

}  // namespace segale
