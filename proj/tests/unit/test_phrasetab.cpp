#include <gtest/gtest.h>

#include <set>

#include "desksmt/error.hpp"
#include "desksmt/phrasetab.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace desksmt;
using namespace desksmt::phrasetab;
using align::LinkSet;

namespace {

align::AlignModel unit_model(const std::string& e, const std::string& f) {
  align::AlignModel m;
  m.t.set(m.src_vocab.add(e), m.tgt_vocab.add(f), 1.0);
  return m;
}

std::vector<PhraseSpan> sorted(std::set<PhraseSpan> s) { return {s.begin(), s.end()}; }

}  // namespace

TEST(Extract, MonotoneTwoWords) {
  auto spans = extract_phrases(2, 2, {{0, 0}, {1, 1}});
  EXPECT_EQ(spans, (std::vector<PhraseSpan>{{0, 0, 0, 0}, {0, 1, 0, 1}, {1, 1, 1, 1}}));
}

TEST(Extract, EmptyLinksGiveNothing) { EXPECT_TRUE(extract_phrases(3, 3, {}).empty()); }

TEST(Extract, PermutationMatchesExhaustiveCheck) {
  LinkSet a{{0, 0}, {1, 1}, {2, 3}, {3, 2}};
  EXPECT_EQ(extract_phrases(4, 4, a), sorted(oracle::all_consistent_spans(4, 4, a, 7)));
}

TEST(Extract, RandomInstancesMatchExhaustiveCheck) {
  fixture::Rng rng(19);
  for (int k = 0; k < 300; ++k) {
    const int ls = 1 + static_cast<int>(rng.below(5)), lt = 1 + static_cast<int>(rng.below(5));
    LinkSet a;
    for (int i = 0; i < ls; ++i)
      for (int j = 0; j < lt; ++j)
        if (rng.unit() < 0.3) a.insert({i, j});
    const int max_len = 1 + static_cast<int>(rng.below(5));
    ASSERT_EQ(extract_phrases(ls, lt, a, max_len), sorted(oracle::all_consistent_spans(ls, lt, a, max_len)))
        << align::format_links(a) << " max " << max_len;
  }
}

TEST(Extract, LinkOutsidePairIsDataError) {
  EXPECT_THROW(extract_phrases(2, 2, {{0, 5}}), DataError);
}

TEST(PhraseTable, SingleLinkUnitScores) {
  auto fwd = unit_model("a", "x"), bwd = unit_model("x", "a");
  auto t = build_phrase_table({{{"a"}, {"x"}}}, {{{0, 0}}}, fwd, bwd);
  ASSERT_EQ(t.entries.size(), 1u);
  for (double s : t.entries[0].scores) EXPECT_DOUBLE_EQ(s, 1.0);
}

TEST(PhraseTable, CompetingTargetsByJointCount) {
  std::vector<corpus::SentencePair> pairs{{{"a"}, {"x"}}, {{"a"}, {"x"}}, {{"a"}, {"x"}}, {{"a"}, {"y"}}};
  std::vector<LinkSet> links(4, LinkSet{{0, 0}});
  auto fwd = align::train_ibm1(pairs, {3, 0, 1});
  std::vector<corpus::SentencePair> rev;
  for (const auto& p : pairs) rev.push_back(align::swapped(p));
  auto bwd = align::train_ibm1(rev, {3, 0, 1});
  auto t = build_phrase_table(pairs, links, fwd, bwd);
  ASSERT_EQ(t.entries.size(), 2u);
  EXPECT_EQ(t.entries[0].tgt, Tokens{"x"});
  EXPECT_DOUBLE_EQ(t.entries[0].scores[kPhiTgivenS], 0.75);
  EXPECT_DOUBLE_EQ(t.entries[1].scores[kPhiTgivenS], 0.25);
  EXPECT_DOUBLE_EQ(t.entries[0].scores[kPhiSgivenT], 1.0);
  EXPECT_EQ(t.entries[0].counts, (std::array<double, 3>{3, 4, 3}));
}

TEST(PhraseTable, RowRoundTripsExactly) {
  const std::string line = "$ ||| $ ||| 1 1 0.5 0.428571 ||| 0-0 ||| 2 4 2";
  EXPECT_EQ(format_entry(parse_entry(line)), line);
}

TEST(PhraseTable, ParseErrorsCarryLineNumber) {
  try {
    read_phrase_table("a ||| b ||| 1 1 1 1\nbad line\n", "pt");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_entry("a ||| b ||| 1 1 1 0"), DataError);
  EXPECT_THROW(parse_entry("a ||| b ||| 1 1 1 1 ||| 0-3"), DataError);
}

TEST(PhraseTable, FileRoundTripOnFixture) {
  std::vector<corpus::SentencePair> pairs;
  for (const auto& l : fixture::synthetic_corpus(100)) pairs.push_back({split_ws(l.source), split_ws(l.target)});
  auto wa = align::align_corpus(pairs);
  auto t = build_phrase_table(pairs, wa.links, wa.forward, wa.backward);
  ASSERT_FALSE(t.entries.empty());
  auto text = write_phrase_table(t);
  EXPECT_EQ(write_phrase_table(read_phrase_table(text)), text);
  ExtractOptions four;
  four.jobs = 4;
  EXPECT_EQ(write_phrase_table(build_phrase_table(pairs, wa.links, wa.forward, wa.backward, four)), text);
}

TEST(Orientation, SwappedNeighbours) {
  // "red ball" against a target that puts the second word first
  LinkSet a{{0, 1}, {1, 0}};
  EXPECT_EQ(forward_orientation({0, 0, 1, 1}, a, 2, OrientationSet::kMsd), 1);
  EXPECT_EQ(forward_orientation({1, 1, 0, 0}, a, 2, OrientationSet::kMsd), 2);
  LinkSet mono{{0, 0}, {1, 1}};
  EXPECT_EQ(forward_orientation({1, 1, 1, 1}, mono, 2, OrientationSet::kMsd), 0);
  EXPECT_EQ(forward_orientation({0, 0, 0, 0}, mono, 2, OrientationSet::kMsd), 0);
  EXPECT_EQ(backward_orientation({0, 0, 0, 0}, mono, 2, 2, OrientationSet::kMsd), 0);
}

TEST(Reordering, MonotoneCorpusAndSmoothing) {
  std::vector<corpus::SentencePair> pairs{{{"a", "b"}, {"x", "y"}}, {{"a", "b"}, {"x", "y"}}};
  std::vector<LinkSet> links(2, LinkSet{{0, 0}, {1, 1}});
  auto t = extract_reordering(pairs, links);
  ASSERT_FALSE(t.entries.empty());
  for (const auto& e : t.entries) {
    EXPECT_GT(e.forward[0], e.forward[1]);
    EXPECT_GT(e.backward[0], e.backward[1]);
    double s = 0;
    for (double p : e.forward) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  // two monotone events, sigma 0.5, three classes
  const auto* e = t.find({"a"}, {"x"});
  ASSERT_NE(e, nullptr);
  EXPECT_DOUBLE_EQ(e->forward[1], 0.5 / (2 + 0.5 * 3));
  EXPECT_DOUBLE_EQ(e->forward[0], 2.5 / (2 + 0.5 * 3));
}

TEST(Reordering, MslrHasFourClassesAndRoundTrips) {
  std::vector<corpus::SentencePair> pairs{{{"a", "b", "c"}, {"z", "x", "y"}}};
  std::vector<LinkSet> links{{{0, 1}, {1, 2}, {2, 0}}};
  ReorderingOptions opt;
  opt.set = OrientationSet::kMslr;
  auto t = extract_reordering(pairs, links, opt);
  for (const auto& e : t.entries) EXPECT_EQ(e.forward.size(), 4u);
  auto text = write_reordering_table(t);
  EXPECT_EQ(write_reordering_table(read_reordering_table(text, OrientationSet::kMslr, true)), text);
  opt.bidirectional = false;
  auto u = extract_reordering(pairs, links, opt);
  for (const auto& e : u.entries) EXPECT_TRUE(e.backward.empty());
}

TEST(Generation, DeterministicAndSplitCounts) {
  auto g = build_generation_table({{"अच्छा|JJ", "घर|NN"}, {"अच्छा|JJ"}}, 0, 1);
  EXPECT_DOUBLE_EQ(g.prob("अच्छा", "JJ"), 1.0);
  auto h = build_generation_table({{"w|NN"}, {"w|NN"}, {"w|NN"}, {"w|JJ"}}, 0, 1);
  EXPECT_DOUBLE_EQ(h.prob("w", "NN"), 0.75);
  EXPECT_DOUBLE_EQ(h.prob("w", "JJ"), 0.25);
  EXPECT_TRUE(build_generation_table({}, 0, 1).rows.empty());
}
