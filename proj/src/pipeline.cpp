#include "segale/pipeline.hpp"

#include <atomic>
#include <fstream>
#include <set>
#include <iostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace segale {

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok)
      throw std::runtime_error("config: unknown key \"" + it.key() + "\" in " +
                               where);
  }
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text);
  reject_unknown_keys(j,
                      {"align", "search", "provider", "metric_backend", "metric",
                       "segmenter_lang", "root_seed", "jobs", "verbose"},
                      "top level");
  PipelineConfig c;
  if (j.contains("align")) {
    const auto& a = j["align"];
    reject_unknown_keys(a,
                        {"max_overlap", "beta_skip", "random_samples", "rng_seed",
                         "band_width", "coarse_min_len"},
                        "align");
    c.align.max_overlap = a.value("max_overlap", c.align.max_overlap);
    c.align.beta_skip = a.value("beta_skip", c.align.beta_skip);
    c.align.random_samples = a.value("random_samples", c.align.random_samples);
    c.align.rng_seed = a.value("rng_seed", c.align.rng_seed);
    c.align.band_width = a.value("band_width", c.align.band_width);
    c.align.coarse_min_len = a.value("coarse_min_len", c.align.coarse_min_len);
    if (c.align.max_overlap < 2)
      throw std::runtime_error("config: align.max_overlap must be >= 2");
    if (c.align.band_width < 1)
      throw std::runtime_error("config: align.band_width must be >= 1");
  }
  if (j.contains("search")) {
    const auto& s = j["search"];
    reject_unknown_keys(s,
                        {"beta_start", "beta_step", "avg_cost_floor",
                         "step_na_ceiling", "avg_cost_ceiling", "max_steps"},
                        "search");
    c.search.beta_start = s.value("beta_start", c.search.beta_start);
    c.search.beta_step = s.value("beta_step", c.search.beta_step);
    c.search.avg_cost_floor = s.value("avg_cost_floor", c.search.avg_cost_floor);
    c.search.step_na_ceiling = s.value("step_na_ceiling", c.search.step_na_ceiling);
    c.search.avg_cost_ceiling = s.value("avg_cost_ceiling", c.search.avg_cost_ceiling);
    c.search.max_steps = s.value("max_steps", c.search.max_steps);
    if (c.search.beta_step <= 0 || c.search.beta_step >= c.search.beta_start)
      throw std::runtime_error("config: search.beta_step must be in (0, beta_start)");
    if (c.search.avg_cost_floor <= 0 ||
        c.search.avg_cost_floor >= c.search.avg_cost_ceiling)
      throw std::runtime_error(
          "config: search.avg_cost_floor must be in (0, avg_cost_ceiling)");
  }
  if (j.contains("provider")) {
    const auto& p = j["provider"];
    reject_unknown_keys(p, {"kind", "seed", "dim", "noise", "path", "host", "port"},
                        "provider");
    c.provider.kind = p.value("kind", c.provider.kind);
    c.provider.seed = p.value("seed", c.provider.seed);
    c.provider.dim = p.value("dim", c.provider.dim);
    c.provider.noise = p.value("noise", c.provider.noise);
    c.provider.path = p.value("path", c.provider.path);
    c.provider.host = p.value("host", c.provider.host);
    c.provider.port = p.value("port", c.provider.port);
    if (c.provider.kind != "synthetic" && c.provider.kind != "file" &&
        c.provider.kind != "http")
      throw std::runtime_error("config: provider.kind must be synthetic, file, or http");
  }
  if (j.contains("metric_backend")) {
    const auto& m = j["metric_backend"];
    reject_unknown_keys(m, {"kind", "host", "port"}, "metric_backend");
    c.metric_backend.kind = m.value("kind", c.metric_backend.kind);
    c.metric_backend.host = m.value("host", c.metric_backend.host);
    c.metric_backend.port = m.value("port", c.metric_backend.port);
  }
  if (j.contains("metric")) {
    const auto& m = j["metric"];
    reject_unknown_keys(m, {"name", "polarity", "worst_value", "needs_reference"},
                        "metric");
    c.metric.name = m.value("name", c.metric.name);
    std::string pol = m.value("polarity", std::string("higher_better"));
    if (pol == "higher_better")
      c.metric.polarity = Polarity::higher_better;
    else if (pol == "lower_better")
      c.metric.polarity = Polarity::lower_better;
    else
      throw std::runtime_error("config: metric.polarity must be higher_better or lower_better");
    c.metric.worst_value = m.value("worst_value", c.metric.worst_value);
    c.metric.needs_reference = m.value("needs_reference", c.metric.needs_reference);
  }
  c.segmenter_lang = j.value("segmenter_lang", c.segmenter_lang);
  c.root_seed = j.value("root_seed", c.root_seed);
  c.jobs = j.value("jobs", c.jobs);
  c.verbose = j.value("verbose", c.verbose);
  return c;
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderSpec& spec) {
  if (spec.kind == "synthetic")
    return synthetic_bilingual_embedder(spec.seed, spec.dim, spec.noise);
  if (spec.kind == "file") return file_embedding_provider(spec.path);
  if (spec.kind == "http") return http_embedding_provider(spec.host, spec.port);
  throw std::runtime_error("unknown provider kind: " + spec.kind);
}

std::unique_ptr<MetricBackend> make_metric_backend(const PipelineConfig& config) {
  if (config.metric_backend.kind == "cosine") {
    std::shared_ptr<EmbeddingProvider> provider = make_provider(config.provider);
    return cosine_pseudo_metric(std::move(provider));
  }
  if (config.metric_backend.kind == "http")
    return http_metric_backend(config.metric_backend.host,
                               config.metric_backend.port, config.metric.name);
  throw std::runtime_error("unknown metric backend kind: " +
                           config.metric_backend.kind);
}

std::string alignment_result_to_json(const std::string& doc_id,
                                     const AlignmentResult& result) {
  json j;
  j["doc_id"] = doc_id;
  auto& blocks = j["blocks"] = json::array();
  for (const auto& b : result.path.blocks) {
    blocks.push_back({{"src", {b.src_lo, b.src_hi}},
                      {"tgt", {b.tgt_lo, b.tgt_hi}},
                      {"cost", b.cost}});
  }
  j["na_ratio"] = result.na_ratio;
  j["avg_cost"] = result.avg_cost;
  j["beta_skip_final"] = result.beta_final;
  return j.dump();
}

std::string document_score_to_json(const DocumentScore& score) {
  json j;
  j["doc_id"] = score.doc_id;
  j["avg_score"] = score.avg_score;
  j["na_ratio"] = score.na_ratio;
  j["metric"] = score.metric;
  auto& blocks = j["blocks"] = json::array();
  for (const auto& b : score.blocks) {
    blocks.push_back({{"src", {b.block.src_lo, b.block.src_hi}},
                      {"tgt", {b.block.tgt_lo, b.block.tgt_hi}},
                      {"score", b.score},
                      {"is_null", b.is_null}});
  }
  return j.dump();
}

namespace {

SentenceList doc_src_sentences(const CorpusDoc& doc) {
  SentenceList s;
  s.sentences = doc.src;
  s.lang = doc.src_lang();
  return s;
}

SentenceList doc_hyp_sentences(const CorpusDoc& doc) {
  if (!doc.hyp.empty()) {
    SentenceList s;
    s.sentences = doc.hyp;
    s.lang = doc.tgt_lang();
    return s;
  }
  return segment(*doc.hyp_text, doc.tgt_lang());
}

struct DocAlignment {
  AlignmentResult result;
  std::string error;
};

// Align all documents with bounded parallelism; results keep input order.
std::vector<DocAlignment> align_corpus(const Corpus& corpus,
                                       const PipelineConfig& config,
                                       EmbeddingProvider& provider) {
  const int n = static_cast<int>(corpus.documents.size());
  std::vector<DocAlignment> results(n);
  std::atomic<int> next{0};

  auto worker = [&] {
    while (true) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      const auto& doc = corpus.documents[i];
      try {
        SentenceList src = doc_src_sentences(doc);
        SentenceList hyp = doc_hyp_sentences(doc);
        OverlapIndex src_index = build_overlaps(src, config.align.max_overlap);
        OverlapIndex hyp_index = build_overlaps(hyp, config.align.max_overlap);
        EmbeddingMatrix src_m = embed(provider, src_index);
        EmbeddingMatrix hyp_m = embed(provider, hyp_index);
        AlignParams ap = config.align;
        ap.rng_seed = config.root_seed ^ fnv1a("align:" + doc.doc_id);
        results[i].result = adaptive_align(src_m, hyp_m, ap, config.search);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };

  int jobs = config.jobs > 0
                 ? config.jobs
                 : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, n);
  std::vector<std::thread> pool;
  for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace

int cmd_segment(std::istream& in, std::ostream& out, const std::string& lang,
                std::ostream& err) {
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  SentenceList sentences = segment(text, lang);
  if (sentences.sentences.empty()) {
    err << "segment: input contains no sentences\n";
    return kExitInputError;
  }
  if (sentences.lang_fallback)
    err << "segment: no rule set for language \"" << lang
        << "\", using default rules\n";
  for (const auto& s : sentences.sentences) out << s << '\n';
  return kExitOk;
}

int cmd_align(const Corpus& corpus, const PipelineConfig& config,
              std::ostream& out, std::ostream& err) {
  std::unique_ptr<EmbeddingProvider> provider;
  try {
    provider = make_provider(config.provider);
  } catch (const std::exception& e) {
    err << "align: " << e.what() << '\n';
    return kExitBackendError;
  }

  auto results = align_corpus(corpus, config, *provider);
  int completed = 0;
  for (size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.error.empty()) {
      err << "align: document " << corpus.documents[i].doc_id << ": " << r.error
          << " (" << completed << " documents completed)\n";
      return kExitBackendError;
    }
    if (config.verbose) {
      for (const auto& step : r.result.trace) {
        json t = {{"doc_id", corpus.documents[i].doc_id},
                  {"beta", step.beta},
                  {"na_ratio", step.na_ratio},
                  {"avg_cost", step.avg_cost},
                  {"verdict", step.verdict}};
        err << t.dump() << '\n';
      }
    }
    out << alignment_result_to_json(corpus.documents[i].doc_id, r.result) << '\n';
    ++completed;
  }
  return kExitOk;
}

namespace {

AlignmentPath parse_alignment_blocks(const json& j) {
  AlignmentPath path;
  for (const auto& b : j.at("blocks")) {
    AlignmentBlock block;
    block.src_lo = b.at("src")[0];
    block.src_hi = b.at("src")[1];
    block.tgt_lo = b.at("tgt")[0];
    block.tgt_hi = b.at("tgt")[1];
    block.cost = b.at("cost");
    path.blocks.push_back(block);
    path.src_len = std::max(path.src_len, block.src_hi);
    path.tgt_len = std::max(path.tgt_len, block.tgt_hi);
  }
  return path;
}

}  // namespace

int cmd_evaluate(const Corpus& corpus, std::istream& alignments,
                 const PipelineConfig& config, std::ostream& out,
                 std::ostream& err) {
  std::map<std::string, AlignmentPath> paths;
  std::string line;
  int line_no = 0;
  while (std::getline(alignments, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      paths[j.at("doc_id").get<std::string>()] = parse_alignment_blocks(j);
    } catch (const std::exception& e) {
      err << "evaluate: alignment line " << line_no << ": " << e.what() << '\n';
      return kExitInputError;
    }
  }

  std::unique_ptr<MetricBackend> backend;
  try {
    backend = make_metric_backend(config);
  } catch (const std::exception& e) {
    err << "evaluate: " << e.what() << '\n';
    return kExitBackendError;
  }

  for (const auto& doc : corpus.documents) {
    auto it = paths.find(doc.doc_id);
    if (it == paths.end()) {
      err << "evaluate: no alignment for document " << doc.doc_id << '\n';
      return kExitInputError;
    }
    try {
      SentenceList src = doc_src_sentences(doc);
      SentenceList hyp = doc_hyp_sentences(doc);
      SentenceList ref;
      const SentenceList* ref_ptr = nullptr;
      if (!doc.ref.empty()) {
        ref.sentences = doc.ref;
        ref.lang = doc.tgt_lang();
        ref_ptr = &ref;
      }
      auto blocks = materialize_blocks(it->second, src, hyp, ref_ptr);
      DocumentScore score =
          score_document(std::move(blocks), *backend, config.metric, doc.doc_id);
      json j = json::parse(document_score_to_json(score));
      j["lang_pair"] = doc.lang_pair;
      j["system_id"] = doc.system_id;
      j["lower_better"] = config.metric.polarity == Polarity::lower_better;
      out << j.dump() << '\n';
    } catch (const std::exception& e) {
      err << "evaluate: document " << doc.doc_id << ": " << e.what() << '\n';
      return kExitBackendError;
    }
  }
  return kExitOk;
}

int cmd_metaeval(std::istream& scores, std::istream& mqm_tsv,
                 std::istream* gold_manifest, const PipelineConfig& config,
                 std::ostream& out, std::ostream& err) {
  struct ScoreLine {
    std::string doc_id, lang_pair, system_id, metric;
    double avg_score = 0.0, na_ratio = 0.0;
    bool lower_better = false;
    int total_blocks = 0;
    std::vector<int> null_positions;
  };
  std::vector<ScoreLine> score_lines;
  std::string line;
  int line_no = 0;
  try {
    while (std::getline(scores, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j = json::parse(line);
      ScoreLine s;
      s.doc_id = j.at("doc_id");
      s.lang_pair = j.value("lang_pair", std::string{});
      s.system_id = j.value("system_id", std::string{});
      s.metric = j.at("metric");
      s.avg_score = j.at("avg_score");
      s.na_ratio = j.at("na_ratio");
      s.lower_better = j.value("lower_better", false);
      int pos = 0;
      for (const auto& b : j.at("blocks")) {
        if (b.value("is_null", false)) s.null_positions.push_back(pos);
        ++pos;
      }
      s.total_blocks = pos;
      score_lines.push_back(std::move(s));
    }
  } catch (const std::exception& e) {
    err << "metaeval: score line " << line_no << ": " << e.what() << '\n';
    return kExitInputError;
  }

  std::vector<MqmAnnotation> annotations;
  try {
    annotations = parse_mqm_tsv(mqm_tsv);
  } catch (const std::exception& e) {
    err << "metaeval: " << e.what() << '\n';
    return kExitInputError;
  }

  // Optional deletion manifest: planted NA ratio per language pair.
  std::map<std::string, double> gold_na;
  if (gold_manifest) {
    std::map<std::string, int> removed_by_doc;
    try {
      while (std::getline(*gold_manifest, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.value("op", std::string{}) != "drop") continue;
        removed_by_doc[j.at("doc_id").get<std::string>()] +=
            static_cast<int>(j.at("indices").size());
      }
    } catch (const std::exception& e) {
      err << "metaeval: gold manifest: " << e.what() << '\n';
      return kExitInputError;
    }
    std::map<std::string, std::pair<int, int>> per_pair;  // (removed, blocks)
    for (const auto& s : score_lines) {
      auto& [removed, blocks] = per_pair[s.lang_pair];
      auto it = removed_by_doc.find(s.doc_id);
      if (it != removed_by_doc.end()) removed += it->second;
      blocks += s.total_blocks;
    }
    for (const auto& [pair, rb] : per_pair)
      if (rb.second > 0)
        gold_na[pair] = static_cast<double>(rb.first) / rb.second;
  }

  try {
    // Drop under-annotated documents before any score math.
    std::map<std::string, int> doc_segments;
    for (const auto& s : score_lines) doc_segments[s.doc_id] = s.total_blocks;
    auto kept_list = filter_documents(doc_segments, annotations);
    std::set<std::string> kept(kept_list.begin(), kept_list.end());

    std::vector<MqmAnnotation> filtered;
    for (auto& a : annotations)
      if (kept.count(a.doc_id)) filtered.push_back(std::move(a));

    // Null-judgment injection precedes z-normalization.
    std::vector<NullBlockRef> nulls;
    for (const auto& s : score_lines) {
      if (!kept.count(s.doc_id)) continue;
      for (int p : s.null_positions) nulls.push_back({s.doc_id, s.system_id, p});
    }
    auto injected = inject_null_judgments(std::move(filtered), nulls);
    auto z = zscore_normalize(injected);

    std::vector<DocMetricScore> metric_scores;
    std::vector<DocHumanScore> human_scores;
    std::set<std::pair<std::string, std::string>> seen_docs;
    for (const auto& s : score_lines) {
      if (!kept.count(s.doc_id)) continue;
      metric_scores.push_back({s.lang_pair, s.metric, s.doc_id, s.system_id,
                               s.avg_score, s.lower_better, s.na_ratio});
      if (seen_docs.insert({s.doc_id, s.system_id}).second) {
        human_scores.push_back({s.lang_pair, s.doc_id, s.system_id,
                                doc_human_score(z, s.doc_id, s.system_id)});
      }
    }

    CorrelationReport report =
        correlation_report(metric_scores, human_scores, gold_na);

    json j;
    auto& cells = j["cells"] = json::array();
    for (const auto& [key, cell] : report.cells) {
      json c = {{"lang_pair", key.first},
                {"metric", key.second},
                {"n_docs", cell.n_docs},
                {"na_ratio_mean", cell.na_ratio_mean}};
      if (cell.tau) c["tau"] = *cell.tau;
      if (cell.delta_gold) c["delta_gold"] = *cell.delta_gold;
      cells.push_back(std::move(c));
    }
    out << j.dump() << '\n';
    out << format_report(report);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "metaeval: " << e.what() << '\n';
    return kExitInputError;
  }
}

namespace {

std::vector<ParallelDoc> to_parallel(const Corpus& corpus) {
  std::vector<ParallelDoc> out;
  for (const auto& doc : corpus.documents) {
    ParallelDoc p;
    p.doc_id = doc.doc_id;
    p.src = doc.src;
    p.hyp = doc.hyp.empty() && doc.hyp_text
                ? doc_hyp_sentences(doc).sentences
                : doc.hyp;
    p.ref = doc.ref;
    out.push_back(std::move(p));
  }
  return out;
}

const char* side_name(Side side) {
  switch (side) {
    case Side::source: return "source";
    case Side::reference: return "reference";
    case Side::hypothesis: return "hypothesis";
  }
  return "unknown";
}

}  // namespace

int cmd_perturb(const Corpus& corpus, const PerturbationSpec& spec,
                std::ostream& out, std::ostream& manifest, std::ostream& err) {
  try {
    auto docs = to_parallel(corpus);
    if (spec.kind == PerturbationKind::flex_boundary) {
      // Built-in stub adapters: concatenation rewriter, similarity 1.0.
      // External GPT-4o/BLEURT adapters plug in through the library API.
      auto result = merge_candidates(
          docs, spec.rate,
          [](const std::string&, const std::string&) { return 1.0; },
          [](const std::string& a, const std::string& b) { return a + " " + b; },
          0.85, spec.rng_seed);
      if (result.exhausted)
        err << "perturb: merge candidates exhausted before quota\n";
      Corpus perturbed = corpus;
      for (size_t i = 0; i < perturbed.documents.size(); ++i)
        perturbed.documents[i].src = result.corpus[i].src;
      write_corpus_jsonl(out, perturbed);
      for (const auto& m : result.manifest) {
        json j = {{"doc_id", m.doc_id},
                  {"op", "merge"},
                  {"indices", {m.first_index, m.first_index + 1}},
                  {"side", "source"}};
        manifest << j.dump() << '\n';
      }
      return kExitOk;
    }

    auto result = drop_segments(docs, spec);
    Corpus perturbed = corpus;
    for (size_t i = 0; i < perturbed.documents.size(); ++i) {
      perturbed.documents[i].src = result.corpus[i].src;
      perturbed.documents[i].hyp = result.corpus[i].hyp;
      perturbed.documents[i].hyp_text.reset();
      perturbed.documents[i].ref = result.corpus[i].ref;
    }
    write_corpus_jsonl(out, perturbed);
    // group manifest entries per (doc, side)
    std::map<std::pair<std::string, Side>, std::vector<int>> grouped;
    for (const auto& d : result.manifest)
      grouped[{d.doc_id, d.side}].push_back(d.seg_index);
    for (const auto& [key, indices] : grouped) {
      json j = {{"doc_id", key.first},
                {"op", "drop"},
                {"indices", indices},
                {"side", side_name(key.second)}};
      manifest << j.dump() << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "perturb: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_triplets(std::istream& parallel_tsv, std::uint64_t seed,
                 std::ostream& out, std::ostream& err) {
  std::vector<std::pair<std::string, std::string>> corpus;
  std::string line;
  while (std::getline(parallel_tsv, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      err << "triplets: line without tab separator: " << line << '\n';
      return kExitInputError;
    }
    corpus.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  try {
    auto triplets = build_triplets(corpus, seed);
    for (const auto& t : triplets) {
      json j = {{"query", t.query},
                {"positive", t.positive},
                {"negative", t.negative},
                {"negative_kind", t.negative_kind == NegativeKind::dropped_sentence
                                      ? "dropped_sentence"
                                      : "nearby_substitution"}};
      out << j.dump() << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "triplets: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_chunk(std::istream& in, int max_tokens, const std::string& lang,
              std::ostream& out, std::ostream& err) {
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    auto chunks =
        chunk_document(ss.str(), max_tokens, builtin_token_counter(lang), lang);
    for (const auto& c : chunks) {
      if (c.over_budget)
        err << "chunk: sentence of " << c.token_count
            << " tokens exceeds budget, emitted as its own chunk\n";
      json j = {{"text", c.text},
                {"tokens", c.token_count},
                {"over_budget", c.over_budget}};
      out << j.dump() << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "chunk: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_estimate_overlap(std::istream& gold, std::istream& autoseg,
                         const std::string& lang, std::ostream& out,
                         std::ostream& err) {
  auto read_lines = [](std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
  };
  try {
    SentenceList g = ingest_segmentation(read_lines(gold), lang);
    SentenceList a = ingest_segmentation(read_lines(autoseg), lang);
    out << estimate_overlap_size(g, a) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "estimate-overlap: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace segale
