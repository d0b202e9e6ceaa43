#ifndef SEGALE_CORPUS_HPP
#define SEGALE_CORPUS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace segale {

/// One evaluation unit: source sentences plus either a raw document-level
/// hypothesis (hyp_text) or pre-segmented hypothesis sentences.
struct CorpusDoc {
  std::string doc_id;
  std::string lang_pair;  // e.g. "en-de"
  std::string system_id;
  std::vector<std::string> src;
  std::optional<std::string> hyp_text;
  std::vector<std::string> hyp;
  std::vector<std::string> ref;  // 1:1 with src when present

  std::string src_lang() const;
  std::string tgt_lang() const;
};

struct Corpus {
  std::vector<CorpusDoc> documents;
};

/// JSONL, one document per line. Throws std::runtime_error with the line
/// number on malformed input; duplicate doc_ids and ref/src length mismatch
/// are rejected.
Corpus read_corpus_jsonl(std::istream& in);
void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);

}  // namespace segale

#endif
