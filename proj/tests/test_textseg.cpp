#include <doctest.h>

#include <random>

#include "segale/textseg.hpp"

using namespace segale;

TEST_CASE("single sentence stays whole") {
  auto s = segment("Hello world.", "en");
  REQUIRE(s.sentences.size() == 1);
  CHECK(s.sentences[0] == "Hello world.");
}

TEST_CASE("three terminal marks split into three sentences") {
  auto s = segment("A. B? C!", "en");
  REQUIRE(s.sentences.size() == 3);
  CHECK(s.sentences[0] == "A.");
  CHECK(s.sentences[1] == "B?");
  CHECK(s.sentences[2] == "C!");
}

TEST_CASE("chinese splits on fullwidth stop without whitespace") {
  auto s = segment("你好。再见。", "zh");
  REQUIRE(s.sentences.size() == 2);
  CHECK(s.sentences[0] == "你好。");
  CHECK(s.sentences[1] == "再见。");
}

TEST_CASE("abbreviations do not break sentences") {
  auto s = segment("Dr. Smith met Mr. Jones. They talked.", "en");
  REQUIRE(s.sentences.size() == 2);
  CHECK(s.sentences[0] == "Dr. Smith met Mr. Jones.");
}

TEST_CASE("decimal numbers do not break sentences") {
  auto s = segment("Pi is 3.14 roughly. Yes.", "en");
  REQUIRE(s.sentences.size() == 2);
}

TEST_CASE("closing quote is kept with its sentence") {
  auto s = segment("He said \"stop.\" Then left.", "en");
  REQUIRE(s.sentences.size() == 2);
  CHECK(s.sentences[0] == "He said \"stop.\"");
}

TEST_CASE("ellipsis run counts as one terminal") {
  auto s = segment("Wait... Done.", "en");
  REQUIRE(s.sentences.size() == 2);
  CHECK(s.sentences[0] == "Wait...");
}

TEST_CASE("unsupported language falls back with flag") {
  auto s = segment("Ceci est une phrase. Et une autre.", "fr");
  CHECK(s.lang_fallback);
  CHECK(s.sentences.size() == 2);
  CHECK_FALSE(segment("x.", "en").lang_fallback);
}

TEST_CASE("empty and whitespace input give no sentences") {
  CHECK(segment("", "en").sentences.empty());
  CHECK(segment("   \n\t ", "en").sentences.empty());
  CHECK(segment("no terminal punctuation", "en").sentences.size() == 1);
}

TEST_CASE("ingest drops blank lines and preserves order") {
  auto s = ingest_segmentation({"a", "", "b"});
  REQUIRE(s.sentences.size() == 2);
  CHECK(s.sentences[0] == "a");
  CHECK(s.sentences[1] == "b");
  CHECK(ingest_segmentation({"x"}).sentences.size() == 1);
  CHECK_THROWS(ingest_segmentation({}));
  CHECK_THROWS(ingest_segmentation({"", "  "}));
}

TEST_CASE("merge joins with space for latin and nothing for cjk") {
  SentenceList en{{"a.", "b."}, "en"};
  CHECK(merge_boundaries(en) == "a. b.");
  SentenceList zh{{"你好。", "再见。"}, "zh"};
  CHECK(merge_boundaries(zh) == "你好。再见。");
}

TEST_CASE("segment is idempotent on an already-single sentence") {
  std::string text = "One clean sentence here.";
  auto once = segment(text, "en");
  REQUIRE(once.sentences.size() == 1);
  auto twice = segment(once.sentences[0], "en");
  REQUIRE(twice.sentences.size() == 1);
  CHECK(twice.sentences[0] == once.sentences[0]);
}

// merge then re-segment round-trips sentence-for-sentence for generated
// corpora of unambiguously terminated sentences
TEST_CASE("merge/segment round trip property") {
  std::mt19937 rng(7);
  const std::vector<std::string> words = {"alpha", "bravo", "charlie", "delta",
                                          "echo",  "fox",   "golf",    "hotel"};
  std::uniform_int_distribution<int> n_sent(1, 8);
  std::uniform_int_distribution<int> n_words(1, 6);
  std::uniform_int_distribution<size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> term(0, 2);

  for (int trial = 0; trial < 100; ++trial) {
    SentenceList original;
    original.lang = "en";
    int n = n_sent(rng);
    for (int i = 0; i < n; ++i) {
      std::string s;
      int w = n_words(rng);
      for (int k = 0; k < w; ++k) {
        if (k) s += ' ';
        s += words[pick(rng)];
      }
      s += ".!?"[term(rng)];
      original.sentences.push_back(std::move(s));
    }
    auto round = segment(merge_boundaries(original), "en");
    REQUIRE(round.sentences.size() == original.sentences.size());
    for (size_t i = 0; i < original.sentences.size(); ++i)
      CHECK(round.sentences[i] == original.sentences[i]);
  }
}
