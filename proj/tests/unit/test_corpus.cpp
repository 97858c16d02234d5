#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "geoterms/corpus.hpp"
#include "geoterms/error.hpp"
#include "support.hpp"

using namespace geoterms;

namespace {
ReferenceCorpus parse_text(const std::string& text) {
  std::istringstream in(text);
  return ReferenceCorpus::parse(in, "test");
}
}  // namespace

TEST_CASE("load single entry") {
  auto c = parse_text("the\t1081168\n");
  CHECK(c.vocab_size() == 1);
  CHECK(c.total_tokens() == 1081168);
  CHECK(c.rank("the") == 1u);
}

TEST_CASE("ties ranked lexicographically") {
  auto c = parse_text("a\t5\nb\t5\nc\t9\n");
  CHECK(c.rank("c") == 1u);
  CHECK(c.rank("a") == 2u);
  CHECK(c.rank("b") == 3u);
  CHECK(c.words_by_rank() == std::vector<std::string>{"c", "a", "b"});
}

TEST_CASE("totals and lowercasing") {
  auto c = parse_text("The\t100\ndata\t10\nMagnetosphere\t1\n");
  CHECK(c.total_tokens() == 111);
  CHECK(c.vocab_size() == 3);
  CHECK(c.frequency("the") == 100);
  CHECK(c.contains("magnetosphere"));
  CHECK_FALSE(c.contains("The"));
}

TEST_CASE("malformed files report line numbers") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_text(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of("a\t1\nb 2\n") == 2);
  CHECK(line_of("a\t1\nb\t0\n") == 2);
  CHECK(line_of("a\t1\nb\tx\n") == 2);
  CHECK(line_of("a\t1\nc\t3\nA\t2\n") == 3);
  CHECK_THROWS_AS(parse_text(""), ParseError);
  CHECK_THROWS_AS(ReferenceCorpus::load("/nonexistent/corpus.tsv"), IoError);
}

TEST_CASE("rarity on the toy corpus") {
  auto c = testing::toy_corpus();
  CHECK(c.rarity("the") == doctest::Approx(std::log(112.0 / 101.0)));
  CHECK(c.rarity("the") == doctest::Approx(0.103378).epsilon(1e-5));
  CHECK(c.rarity("magnetosphere") == doctest::Approx(4.0254).epsilon(1e-4));
  CHECK(c.rarity("qzx") == doctest::Approx(4.7185).epsilon(1e-4));
  for (const auto& w : c.words_by_rank()) CHECK(c.rarity("qzx") > c.rarity(w));
}

TEST_CASE("rank scorer") {
  auto c = testing::toy_corpus();
  CHECK(c.rarity("the", RarityScorer::kLogRank) == doctest::Approx(std::log(2.0)));
  CHECK(c.rarity("magnetosphere", RarityScorer::kLogRank) == doctest::Approx(std::log(4.0)));
  CHECK(c.rarity("qzx", RarityScorer::kLogRank) == doctest::Approx(std::log(5.0)));
  CHECK(parse_rarity_scorer(to_string(RarityScorer::kLogRank)) == RarityScorer::kLogRank);
}

TEST_CASE("stopwords") {
  auto c = testing::toy_corpus();
  CHECK(c.is_stopword("the", 150));
  CHECK_FALSE(c.is_stopword("magnetosphere", 2));
  CHECK(c.is_stopword("data", 2));
  CHECK(c.is_stopword("42", 0));
  CHECK(c.is_stopword("x", 0));
  CHECK_FALSE(c.is_stopword("qzx", 150));
}

TEST_CASE("property: rarity non-increasing in frequency") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> freq(1, 1000);
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (int i = 0; i < 300; ++i) entries.push_back({"w" + std::to_string(i), static_cast<std::uint64_t>(freq(rng))});
  auto c = ReferenceCorpus::from_entries(entries);
  auto words = c.words_by_rank();
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    CHECK(c.frequency(words[i]) >= c.frequency(words[i + 1]));
    CHECK(c.rarity(words[i]) <= c.rarity(words[i + 1]));
    CHECK(c.rank(words[i]).value() == i + 1);
  }
}

TEST_CASE("load is deterministic and bundled corpora load") {
  auto a = ReferenceCorpus::load(testing::data_dir() / "corpus" / "written.tsv");
  auto b = ReferenceCorpus::load(testing::data_dir() / "corpus" / "written.tsv");
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.words_by_rank() == b.words_by_rank());
  CHECK(a.rank("the") == 1u);
  auto s = ReferenceCorpus::load(testing::data_dir() / "corpus" / "spoken.tsv");
  CHECK(s.vocab_size() > 1000);
  CHECK(s.content_hash() != a.content_hash());
}
