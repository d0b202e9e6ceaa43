#include "segale/textseg.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace segale {

namespace {

// Decode one UTF-8 code point starting at byte i; advances i past it.
// Invalid bytes are passed through as single-byte code points.
char32_t decode_utf8(const std::string& s, size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return b0;
  }
  if (i + len > s.size()) {
    ++i;
    return b0;
  }
  for (int k = 1; k < len; ++k) {
    unsigned char bk = static_cast<unsigned char>(s[i + k]);
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += len;
  return cp;
}

bool is_latin_terminal(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == U'…';  // …
}

bool is_cjk_terminal(char32_t c) {
  return c == U'。' || c == U'！' || c == U'？';  // 。！？
}

bool is_closing_quote(char32_t c) {
  switch (c) {
    case U'"':
    case U'\'':
    case U')':
    case U']':
    case U'”':  // ”
    case U'’':  // ’
    case U'」':  // 」
    case U'』':  // 』
    case U'）':  // ）
    case U'»':  // »
      return true;
    default:
      return false;
  }
}

bool is_space_cp(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' ||
         c == 0x00A0 || c == 0x3000;
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string base_lang(const std::string& tag) {
  auto pos = tag.find_first_of("-_");
  std::string base = pos == std::string::npos ? tag : tag.substr(0, pos);
  std::transform(base.begin(), base.end(), base.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return base;
}

const std::vector<std::string> kAbbrevEn = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st",  "vs", "etc",
    "e.g", "i.e", "fig", "no", "vol", "dept", "inc", "ltd", "co", "gen",
    "col", "capt", "sgt", "rev", "hon", "jan", "feb", "mar", "apr", "jun",
    "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "approx"};

const std::vector<std::string> kAbbrevDe = {
    "z.b", "d.h", "u.a", "usw", "bzw", "ca", "evtl", "ggf",  "nr",
    "s",   "str", "dr",  "prof", "hr", "fr", "bspw", "vgl", "inkl",
    "zzgl", "mio", "mrd", "abs", "art", "jh"};

const std::vector<std::string> kAbbrevEs = {
    "sr",  "sra", "srta", "dr",  "dra", "ud",  "uds", "etc", "p.ej",
    "pág", "núm", "tel",  "av",  "avda", "gral", "cía", "dpto", "aprox"};

}  // namespace

bool is_cjk_lang(const std::string& lang) {
  std::string b = base_lang(lang);
  return b == "zh" || b == "ja";
}

std::string joiner_for_lang(const std::string& lang) {
  return is_cjk_lang(lang) ? "" : " ";
}

const std::vector<std::string>& abbreviations_for_lang(const std::string& lang) {
  static const std::vector<std::string> empty;
  std::string b = base_lang(lang);
  if (b == "en") return kAbbrevEn;
  if (b == "de") return kAbbrevDe;
  if (b == "es") return kAbbrevEs;
  return empty;
}

namespace {

bool has_rule_set(const std::string& lang) {
  std::string b = base_lang(lang);
  return b == "en" || b == "de" || b == "es" || b == "zh" || b == "ja";
}

// Last word before byte position `end` (exclusive), lowercased, with any
// leading opening punctuation stripped. Used for the abbreviation guard.
std::string word_before(const std::string& text, size_t end) {
  size_t b = end;
  while (b > 0) {
    unsigned char c = static_cast<unsigned char>(text[b - 1]);
    if (std::isspace(c)) break;
    --b;
  }
  std::string w = text.substr(b, end - b);
  while (!w.empty() && (w.front() == '(' || w.front() == '"' || w.front() == '\'')) {
    w.erase(w.begin());
  }
  std::transform(w.begin(), w.end(), w.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return w;
}

bool is_abbreviation(const std::string& token, const std::vector<std::string>& abbrevs) {
  if (token.empty()) return false;
  for (const auto& a : abbrevs) {
    if (token == a) return true;
  }
  return false;
}

}  // namespace

SentenceList segment(const std::string& text, const std::string& lang) {
  SentenceList out;
  out.lang = lang;
  out.lang_fallback = !has_rule_set(lang);
  const bool cjk = is_cjk_lang(lang);
  const auto& abbrevs = abbreviations_for_lang(lang);

  std::vector<size_t> breaks;  // byte offsets where a sentence ends (exclusive)
  size_t i = 0;
  while (i < text.size()) {
    size_t cp_start = i;
    char32_t c = decode_utf8(text, i);
    bool terminal = false;
    if (is_cjk_terminal(c)) {
      terminal = true;  // CJK marks break without requiring whitespace
    } else if (is_latin_terminal(c)) {
      // consume runs like "..." or "?!"
      size_t j = i;
      while (j < text.size()) {
        size_t k = j;
        char32_t n = decode_utf8(text, k);
        if (is_latin_terminal(n))
          j = k;
        else
          break;
      }
      i = j;
      if (c == U'.') {
        std::string tok = word_before(text, cp_start);
        if (is_abbreviation(tok, abbrevs)) continue;
        // decimal number: "3.14"
        if (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) &&
            cp_start > 0 && std::isdigit(static_cast<unsigned char>(text[cp_start - 1])))
          continue;
      }
      // require whitespace, end of text, or a closing quote after the mark
      size_t k = i;
      if (k >= text.size()) {
        terminal = true;
      } else {
        char32_t n = decode_utf8(text, k);
        if (is_space_cp(n)) terminal = true;
        else if (is_closing_quote(n)) {
          terminal = true;
          i = k;  // include the quote in this sentence
          // further closers
          while (i < text.size()) {
            size_t k2 = i;
            char32_t n2 = decode_utf8(text, k2);
            if (is_closing_quote(n2)) i = k2;
            else break;
          }
        }
      }
      (void)cjk;
    }
    if (terminal) {
      // trailing closing quotes after a CJK terminal
      while (i < text.size()) {
        size_t k2 = i;
        char32_t n2 = decode_utf8(text, k2);
        if (is_closing_quote(n2)) i = k2;
        else break;
      }
      breaks.push_back(i);
    }
  }

  size_t start = 0;
  for (size_t b : breaks) {
    std::string s = trim(text.substr(start, b - start));
    if (!s.empty()) out.sentences.push_back(std::move(s));
    start = b;
  }
  std::string tail = trim(text.substr(start));
  if (!tail.empty()) out.sentences.push_back(std::move(tail));
  return out;
}

SentenceList ingest_segmentation(const std::vector<std::string>& lines,
                                 const std::string& lang) {
  SentenceList out;
  out.lang = lang;
  for (const auto& line : lines) {
    std::string s = trim(line);
    if (!s.empty()) out.sentences.push_back(std::move(s));
  }
  if (out.sentences.empty()) throw std::runtime_error("empty segmentation");
  return out;
}

std::string merge_boundaries(const SentenceList& sentences) {
  if (sentences.sentences.empty())
    throw std::runtime_error("merge_boundaries: empty sentence list");
  const std::string joiner = joiner_for_lang(sentences.lang);
  std::string out;
  for (size_t i = 0; i < sentences.sentences.size(); ++i) {
    if (i > 0) out += joiner;
    out += sentences.sentences[i];
  }
  return out;
}

}  // namespace segale
