#include <doctest.h>

#include "attnseek/errors.hpp"
#include "attnseek/ranking.hpp"
#include "synthetic.hpp"

using namespace attnseek;
using namespace attnseek::testing;

namespace {

CandidatePhrase phrase(std::vector<std::string> words, std::vector<Occurrence> occurrences) {
  CandidatePhrase p;
  p.stem_key = make_stem_key(words);
  p.words = std::move(words);
  p.occurrences = std::move(occurrences);
  return p;
}

Occurrence occ(std::size_t segment, std::vector<std::size_t> tokens) { return {segment, {0, 0}, std::move(tokens)}; }

}  // namespace

TEST_CASE("multi-word candidate sums its token scores") {
  CandidateSet set;
  set.phrases.push_back(phrase({"graph", "model"}, {occ(0, {0, 2})}));
  auto r = score_candidates_short(std::vector<double>{0.5, 0.2, 0.3}, set);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].score == doctest::Approx(0.8));
  CHECK(r.entries[0].surface == "graph model");
  CHECK(r.entries[0].stem_key == "graph model");
}

TEST_CASE("single-word candidate is divided by its frequency") {
  CandidateSet set;
  set.phrases.push_back(phrase({"graph"}, {occ(0, {0}), occ(0, {2})}));
  set.phrases.push_back(phrase({"neural", "nets"}, {occ(0, {1, 3}), occ(0, {1, 3})}));
  auto r = score_candidates_short(std::vector<double>{0.25, 0.1, 0.35, 0.2}, set);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].stem_key == "neural net");
  CHECK(r.entries[0].score == doctest::Approx(0.6));
  CHECK(r.entries[1].score == doctest::Approx(0.3));
}

TEST_CASE("empty candidate list ranks nothing") {
  CHECK(score_candidates_short(std::vector<double>{1, 2}, CandidateSet{}).entries.empty());
  CHECK(score_candidates_long(std::vector<SegmentScore>{}, CandidateSet{}).entries.empty());
}

TEST_CASE("ties keep first-occurrence order") {
  CandidateSet set;
  set.phrases.push_back(phrase({"alpha"}, {occ(0, {0})}));
  set.phrases.push_back(phrase({"beta"}, {occ(0, {1})}));
  set.phrases.push_back(phrase({"gamma"}, {occ(0, {2})}));
  auto r = score_candidates_short(std::vector<double>{0.1, 0.5, 0.1}, set);
  CHECK(ranking_keys(r) == std::vector<std::string>{"beta", "alpha", "gamma"});
}

TEST_CASE("short ranking rejects occurrences outside segment 0 or the score vector") {
  CandidateSet set;
  set.phrases.push_back(phrase({"graph"}, {occ(1, {0})}));
  CHECK_THROWS_AS(score_candidates_short(std::vector<double>{1}, set), alignment_error);
  set.phrases[0].occurrences[0].segment = 0;
  set.phrases[0].occurrences[0].token_indices = {4};
  CHECK_THROWS_AS(score_candidates_short(std::vector<double>{1}, set), alignment_error);
}

TEST_CASE("long ranking weights per-segment sums by segment relevance") {
  CandidateSet set;
  set.phrases.push_back(phrase({"graph", "model"}, {occ(0, {0}), occ(1, {0, 1})}));
  std::vector<SegmentScore> scores = {{0, {{0.4}}, 1.0}, {1, {{0.25, 0.35}}, 0.5}};
  auto r = score_candidates_long(scores, set);
  CHECK(r.entries[0].score == doctest::Approx(0.4 + 0.3));

  scores[1].relevance = 0.0;
  CHECK(score_candidates_long(scores, set).entries[0].score == doctest::Approx(0.4));

  set.phrases[0].occurrences.push_back(occ(2, {0}));
  CHECK_THROWS_AS(score_candidates_long(scores, set), alignment_error);
}

TEST_CASE("one segment with unit relevance reduces to the short ranking exactly") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto doc = random_short_bundle(rng, 1, 1, 24);
    auto set = build_candidates(doc.document);
    std::vector<double> b(doc.bundle.segments[0].n());
    for (auto& v : b) v = std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<SegmentScore> one = {{0, {b}, 1.0}};
    auto s = score_candidates_short(b, set);
    auto l = score_candidates_long(one, set);
    REQUIRE(s.entries.size() == l.entries.size());
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
      CHECK(s.entries[i].stem_key == l.entries[i].stem_key);
      CHECK(s.entries[i].score == l.entries[i].score);
    }
  }
}

TEST_CASE("deduplicate keeps the first entry per stem key") {
  RankedKeyphrases r{{{"net", "nets", 0.9}, {"graph", "graph", 0.5}, {"net", "net", 0.4}}};
  auto d = deduplicate(r);
  REQUIRE(d.entries.size() == 2);
  CHECK(d.entries[0].surface == "nets");
  CHECK(d.entries[1].stem_key == "graph");
}
