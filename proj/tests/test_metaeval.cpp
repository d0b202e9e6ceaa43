#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "segale/metaeval.hpp"

using namespace segale;

namespace {

MqmAnnotation ann(const std::string& doc, const std::string& seg,
                  const std::string& sys, const std::string& rater, double score) {
  return {doc, seg, sys, rater, score};
}

// independent tau-b oracle using the per-value tie-group formula
double tau_b_groups(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  long long c = 0, d = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      double px = x[i] - x[j], py = y[i] - y[j];
      if (px == 0 || py == 0) continue;
      ((px > 0) == (py > 0)) ? ++c : ++d;
    }
  auto tie_term = [](const std::vector<double>& v) {
    std::map<double, long long> groups;
    for (double t : v) groups[t]++;
    long long s = 0;
    for (auto& [val, k] : groups) s += k * (k - 1) / 2;
    return s;
  };
  long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  double nx = static_cast<double>(n0 - tie_term(x));
  double ny = static_cast<double>(n0 - tie_term(y));
  return (c - d) / std::sqrt(nx * ny);
}

}  // namespace

TEST_CASE("z-score basics") {
  auto z = zscore_normalize({ann("d", "1", "s", "a", 0.0), ann("d", "2", "s", "a", 10.0)});
  REQUIRE(z.size() == 2);
  CHECK(z[0].z == doctest::Approx(-1.0));
  CHECK(z[1].z == doctest::Approx(1.0));

  // constant annotator and singleton annotator both collapse to zero
  auto flat = zscore_normalize({ann("d", "1", "s", "a", 5.0), ann("d", "2", "s", "a", 5.0),
                                ann("d", "3", "s", "b", 9.0)});
  for (const auto& za : flat) CHECK(za.z == doctest::Approx(0.0));
}

TEST_CASE("z-score three-point example uses population std") {
  auto z = zscore_normalize({ann("d", "1", "s", "a", 0.0), ann("d", "2", "s", "a", 5.0),
                             ann("d", "3", "s", "a", 25.0)});
  CHECK(z[0].z == doctest::Approx(-0.92582).epsilon(1e-4));
  CHECK(z[1].z == doctest::Approx(-0.46291).epsilon(1e-4));
  CHECK(z[2].z == doctest::Approx(1.38873).epsilon(1e-4));
}

TEST_CASE("z-scores are independent per annotator") {
  auto z = zscore_normalize({ann("d", "1", "s", "a", 0.0), ann("d", "2", "s", "a", 10.0),
                             ann("d", "3", "s", "b", 100.0), ann("d", "4", "s", "b", 200.0)});
  CHECK(z[0].z == doctest::Approx(-1.0));
  CHECK(z[2].z == doctest::Approx(-1.0));
  CHECK(z[3].z == doctest::Approx(1.0));
}

TEST_CASE("null judgments go to the majority annotator at score 25") {
  std::vector<MqmAnnotation> anns = {
      ann("doc1", "1", "sysA", "r1", 2.0),
      ann("doc1", "2", "sysA", "r1", 3.0),
      ann("doc1", "3", "sysA", "r2", 4.0),
  };
  auto out = inject_null_judgments(anns, {{"doc1", "sysA", 7}});
  REQUIRE(out.size() == 4);
  const auto& synth = out.back();
  CHECK(synth.annotator_id == "r1");
  CHECK(synth.mqm_score == doctest::Approx(25.0));
  CHECK(synth.seg_id == "null#7");
  CHECK(synth.doc_id == "doc1");

  CHECK_THROWS(inject_null_judgments(anns, {{"doc_unseen", "sysA", 0}}));
}

TEST_CASE("injection must precede normalization to shift the annotator mean") {
  std::vector<MqmAnnotation> anns = {
      ann("doc1", "1", "s", "a", 0.0),
      ann("doc1", "2", "s", "a", 10.0),
  };
  auto plain = zscore_normalize(anns);
  auto injected = zscore_normalize(inject_null_judgments(anns, {{"doc1", "s", 0}}));
  // with the synthetic 25 in the pool, the same raw 10 now sits below the mean
  CHECK(plain[1].z == doctest::Approx(1.0));
  CHECK(injected[1].z < 0.0);
  CHECK(injected.back().z > 0.0);  // the null judgment is the worst point
}

TEST_CASE("document human score averages z over its segments") {
  std::vector<ZScored> z = {
      {ann("d1", "1", "s", "a", 0), -1.0},
      {ann("d1", "2", "s", "a", 0), 0.5},
      {ann("d2", "1", "s", "a", 0), 2.0},
  };
  CHECK(doc_human_score(z, "d1", "s") == doctest::Approx(-0.25));
  CHECK(doc_human_score(z, "d2", "s") == doctest::Approx(2.0));
  CHECK_THROWS(doc_human_score(z, "d3", "s"));
}

TEST_CASE("kendall tau on exact rankings") {
  CHECK(kendall_tau({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(kendall_tau({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(kendall_tau({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS(kendall_tau({1, 1, 1}, {1, 2, 3}));
  CHECK_THROWS(kendall_tau({1, 2}, {1, 2, 3}));
  CHECK_THROWS(kendall_tau({1}, {1}));
}

TEST_CASE("tau-a divides by all pairs") {
  // one x-tie: tau-a denominator stays n0 = 6
  double t = kendall_tau({1, 1, 2, 3}, {1, 2, 3, 4}, TauVariant::tau_a);
  CHECK(t == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("tau-b matches the tie-group oracle on random data") {
  std::mt19937 rng(13);
  std::uniform_int_distribution<int> val(0, 5);  // small range forces ties
  for (int trial = 0; trial < 300; ++trial) {
    size_t n = 3 + rng() % 10;
    std::vector<double> x, y;
    for (size_t i = 0; i < n; ++i) {
      x.push_back(val(rng));
      y.push_back(val(rng));
    }
    bool degenerate_x = std::equal(x.begin() + 1, x.end(), x.begin());
    bool degenerate_y = std::equal(y.begin() + 1, y.end(), y.begin());
    if (degenerate_x || degenerate_y) {
      CHECK_THROWS(kendall_tau(x, y));
      continue;
    }
    CHECK(kendall_tau(x, y) == doctest::Approx(tau_b_groups(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("tau is invariant under monotone transforms of either list") {
  std::vector<double> x = {3, 1, 4, 1.5, 9, 2.6};
  std::vector<double> y = {2, 7, 1, 8, 2.8, 1.8};
  double base = kendall_tau(x, y);
  std::vector<double> affine, cubic;
  for (double v : x) affine.push_back(2.0 * v + 3.0);
  for (double v : y) cubic.push_back(v * v * v);  // monotone on positive values
  CHECK(kendall_tau(affine, y) == doctest::Approx(base));
  CHECK(kendall_tau(x, cubic) == doctest::Approx(base));
}

TEST_CASE("documents past the missing-annotation ceiling are dropped") {
  std::map<std::string, int> docs = {{"d1", 10}, {"d2", 10}, {"d3", 10}};
  std::vector<MqmAnnotation> anns;
  for (int i = 0; i < 7; ++i) anns.push_back(ann("d1", std::to_string(i), "s", "a", 1));
  for (int i = 0; i < 8; ++i) anns.push_back(ann("d2", std::to_string(i), "s", "a", 1));
  for (int i = 0; i < 10; ++i) anns.push_back(ann("d3", std::to_string(i), "s", "a", 1));
  auto kept = filter_documents(docs, anns);
  // 3/10 missing is over the 20% ceiling; exactly 2/10 is not
  REQUIRE(kept.size() == 2);
  CHECK(kept[0] == "d2");
  CHECK(kept[1] == "d3");
}

TEST_CASE("correlation report pools per language pair and flips polarities") {
  std::vector<DocMetricScore> metric = {
      {"en-de", "m", "d1", "s1", 0.9, false, 0.10},
      {"en-de", "m", "d2", "s1", 0.8, false, 0.12},
      {"en-de", "m", "d3", "s1", 0.7, false, 0.14},
      // lower-better metric with the same ranking once negated
      {"en-de", "mx", "d1", "s1", 1.0, true, 0.0},
      {"en-de", "mx", "d2", "s1", 2.0, true, 0.0},
      {"en-de", "mx", "d3", "s1", 3.0, true, 0.0},
  };
  // higher human z = worse, so the best doc has the lowest z
  std::vector<DocHumanScore> human = {
      {"en-de", "d1", "s1", -1.0},
      {"en-de", "d2", "s1", 0.2},
      {"en-de", "d3", "s1", 1.0},
  };
  auto report = correlation_report(metric, human, {{"en-de", 0.10}});
  const auto& cell = report.cells.at({"en-de", "m"});
  REQUIRE(cell.tau.has_value());
  CHECK(*cell.tau == doctest::Approx(1.0));
  CHECK(cell.n_docs == 3);
  CHECK(cell.na_ratio_mean == doctest::Approx(0.12));
  REQUIRE(cell.delta_gold.has_value());
  CHECK(*cell.delta_gold == doctest::Approx(0.02));

  const auto& flipped = report.cells.at({"en-de", "mx"});
  CHECK(*flipped.tau == doctest::Approx(1.0));
  REQUIRE(flipped.delta_gold.has_value());
  CHECK(*flipped.delta_gold == doctest::Approx(0.10));
}

TEST_CASE("correlation report skips metric points without human scores") {
  std::vector<DocMetricScore> metric = {
      {"en-de", "m", "d1", "s1", 0.9, false, 0.0},
      {"en-de", "m", "d2", "s1", 0.8, false, 0.0},
      {"en-de", "m", "dX", "s1", 0.1, false, 0.0},
  };
  std::vector<DocHumanScore> human = {
      {"en-de", "d1", "s1", -1.0},
      {"en-de", "d2", "s1", 1.0},
  };
  auto report = correlation_report(metric, human);
  CHECK(report.cells.at({"en-de", "m"}).n_docs == 2);

  // a single overlapping doc gives no tau
  auto thin = correlation_report({{"fr-en", "m", "d1", "s1", 0.5, false, 0.0}},
                                 {{"fr-en", "d1", "s1", 0.0}});
  CHECK_FALSE(thin.cells.at({"fr-en", "m"}).tau.has_value());
}

TEST_CASE("report renders one row per cell") {
  auto report = correlation_report(
      {{"en-de", "m", "d1", "s1", 0.9, false, 0.1},
       {"en-de", "m", "d2", "s1", 0.8, false, 0.1}},
      {{"en-de", "d1", "s1", -1.0}, {"en-de", "d2", "s1", 1.0}});
  std::string text = format_report(report);
  CHECK(text.find("lang_pair") != std::string::npos);
  CHECK(text.find("en-de") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("MQM TSV parsing") {
  std::istringstream in(
      "system\tdoc\tseg\tannotator\tscore\n"
      "sysA\tdoc1\t1\trater1\t5\n"
      "\n"
      "sysB\tdoc1\t2\trater2\t0.5\n");
  auto anns = parse_mqm_tsv(in);
  REQUIRE(anns.size() == 2);
  CHECK(anns[0].system_id == "sysA");
  CHECK(anns[0].doc_id == "doc1");
  CHECK(anns[0].seg_id == "1");
  CHECK(anns[0].annotator_id == "rater1");
  CHECK(anns[0].mqm_score == doctest::Approx(5.0));
  CHECK(anns[1].mqm_score == doctest::Approx(0.5));

  std::istringstream bad("sysA\tdoc1\t1\trater1\n");
  CHECK_THROWS(parse_mqm_tsv(bad));
}
