#ifndef SEGALE_TEXTSEG_HPP
#define SEGALE_TEXTSEG_HPP

#include <string>
#include <vector>

namespace segale {

/// Sentence-segmented text with the language tag it was segmented under.
struct SentenceList {
  std::vector<std::string> sentences;
  std::string lang;
  bool lang_fallback = false;  // true when the tag had no rule set and the
                               // default Latin-script rules were used
};

bool is_cjk_lang(const std::string& lang);

/// Joiner used when reconstructing document text from sentences:
/// single space for space-delimited scripts, empty for zh/ja.
std::string joiner_for_lang(const std::string& lang);

/// Rule-based sentence segmentation. Splits after terminal punctuation
/// (. ! ? … and fullwidth 。！？) followed by whitespace or closing
/// quotes/brackets; CJK terminal marks split unconditionally. A per-language
/// abbreviation guard suppresses splits after known abbreviations.
SentenceList segment(const std::string& text, const std::string& lang);

/// Ingest an externally produced segmentation, one sentence per line.
/// Blank lines are dropped; throws std::runtime_error on all-blank input.
SentenceList ingest_segmentation(const std::vector<std::string>& lines,
                                 const std::string& lang = "en");

/// Join sentences back into a single document string (simulates a
/// document-level system translation with merged boundaries).
std::string merge_boundaries(const SentenceList& sentences);

/// Abbreviation guard list for a language tag ("en", "de", "es" built in).
const std::vector<std::string>& abbreviations_for_lang(const std::string& lang);

}  // namespace segale

#endif
