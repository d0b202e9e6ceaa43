#include "segale/corpus.hpp"

#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace segale {

std::string CorpusDoc::src_lang() const {
  auto pos = lang_pair.find('-');
  return pos == std::string::npos ? lang_pair : lang_pair.substr(0, pos);
}

std::string CorpusDoc::tgt_lang() const {
  auto pos = lang_pair.find('-');
  return pos == std::string::npos ? lang_pair : lang_pair.substr(pos + 1);
}

Corpus read_corpus_jsonl(std::istream& in) {
  Corpus corpus;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": invalid JSON: " + e.what());
    }
    CorpusDoc doc;
    try {
      doc.doc_id = j.at("doc_id").get<std::string>();
      doc.lang_pair = j.value("lang_pair", std::string{});
      doc.system_id = j.value("system_id", std::string{});
      doc.src = j.at("src").get<std::vector<std::string>>();
      if (j.contains("hyp_text"))
        doc.hyp_text = j["hyp_text"].get<std::string>();
      if (j.contains("hyp"))
        doc.hyp = j["hyp"].get<std::vector<std::string>>();
      if (j.contains("ref"))
        doc.ref = j["ref"].get<std::vector<std::string>>();
    } catch (const std::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    if (!doc.hyp_text && doc.hyp.empty())
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": document needs hyp or hyp_text");
    if (!doc.ref.empty() && doc.ref.size() != doc.src.size())
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": ref must be 1:1 with src");
    if (!seen.insert(doc.doc_id).second)
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": duplicate doc_id " + doc.doc_id);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.documents) {
    nlohmann::json j;
    j["doc_id"] = doc.doc_id;
    j["lang_pair"] = doc.lang_pair;
    j["system_id"] = doc.system_id;
    j["src"] = doc.src;
    if (doc.hyp_text) j["hyp_text"] = *doc.hyp_text;
    if (!doc.hyp.empty()) j["hyp"] = doc.hyp;
    if (!doc.ref.empty()) j["ref"] = doc.ref;
    out << j.dump() << '\n';
  }
}

}  // namespace segale
