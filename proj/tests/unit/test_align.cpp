#include <gtest/gtest.h>

#include <cmath>

#include "desksmt/align.hpp"
#include "desksmt/error.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace desksmt;
using namespace desksmt::align;

namespace {

std::vector<corpus::SentencePair> toy() {
  return {{{"the", "house"}, {"das", "haus"}}, {{"the"}, {"das"}}};
}

double t_of(const AlignModel& m, const std::string& e, const std::string& f) {
  return m.t.raw(m.src_vocab.id_of(e), m.tgt_vocab.id_of(f));
}

}  // namespace

TEST(Ibm1, ToyCorpusConvergesAndMatchesOracle) {
  EmOptions opt;
  opt.iterations = 50;
  opt.epsilon = 0;
  auto m = train_ibm1(toy(), opt);
  EXPECT_GE(t_of(m, "the", "das"), 0.99);
  EXPECT_GE(t_of(m, "house", "haus"), 0.99);
  for (std::size_t i = 1; i < m.log_likelihoods.size(); ++i)
    EXPECT_GE(m.log_likelihoods[i], m.log_likelihoods[i - 1] - 1e-12);

  auto o = oracle::ibm1({{{"the", "house"}, {"das", "haus"}}, {{"the"}, {"das"}}}, 50);
  for (const auto& [k, v] : o.t) EXPECT_NEAR(t_of(m, k.first, k.second), v, 1e-9) << k.first << " " << k.second;
  ASSERT_EQ(o.log_likelihood.size(), m.log_likelihoods.size());
  for (std::size_t i = 0; i < o.log_likelihood.size(); ++i)
    EXPECT_NEAR(m.log_likelihoods[i], o.log_likelihood[i], 1e-9);
}

TEST(Ibm1, RowsNormalize) {
  auto m = train_ibm1({{{"a"}, {"x"}}}, {1, 0, 1});
  double s = 0;
  for (auto [f, p] : m.t.row(m.src_vocab.id_of("a"))) s += p;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Ibm1, ShardingDoesNotChangeResult) {
  std::vector<corpus::SentencePair> pairs;
  for (const auto& l : fixture::synthetic_corpus(300))
    pairs.push_back({split_ws(l.source), split_ws(l.target)});
  EmOptions a{4, 0, 1}, b{4, 0, 4};
  EXPECT_EQ(write_ttable(train_ibm1(pairs, a)), write_ttable(train_ibm1(pairs, b)));
}

TEST(Ibm1, Preconditions) {
  EXPECT_THROW(train_ibm1(toy(), {0, 1e-6, 1}), UsageError);
  EXPECT_THROW(train_ibm1({}, {}), DataError);
}

TEST(Ibm2, MonotoneCorpusPrefersDiagonal) {
  std::vector<corpus::SentencePair> pairs{
      {{"a", "b"}, {"a", "b"}}, {{"b", "a"}, {"b", "a"}}, {{"a"}, {"a"}}, {{"b"}, {"b"}}};
  EmOptions opt{10, 0, 1};
  auto m1 = train_ibm1(pairs, opt);
  auto m2 = train_ibm2(pairs, m1, opt);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i <= 2; ++i) {
      if (i != j + 1) EXPECT_GT(m2.a.prob(j + 1, j, 2, 2), m2.a.prob(i, j, 2, 2));
    }
  }
  for (std::size_t i = 1; i < m2.log_likelihoods.size(); ++i)
    EXPECT_GE(m2.log_likelihoods[i], m2.log_likelihoods[i - 1] - 1e-12);
}

TEST(Viterbi, IdentityAndConstructedPermutation) {
  auto m = train_ibm1({{{"a", "b"}, {"a", "b"}}, {{"a"}, {"a"}}, {{"b"}, {"b"}}}, {20, 0, 1});
  EXPECT_EQ(viterbi_align(m, {{"a", "b"}, {"a", "b"}}), (LinkSet{{0, 0}, {1, 1}}));

  AlignModel p;
  const Tokens src{"s0", "s1", "s2", "s3"}, tgt{"t0", "t1", "t2", "t3"};
  for (const auto& w : src) p.src_vocab.add(w);
  for (const auto& w : tgt) p.tgt_vocab.add(w);
  const int to[] = {0, 1, 3, 2};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      p.t.set(p.src_vocab.id_of(src[i]), p.tgt_vocab.id_of(tgt[j]), to[i] == j ? 0.9 : 0.01);
  EXPECT_EQ(viterbi_align(p, {src, tgt}), (LinkSet{{0, 0}, {1, 1}, {2, 3}, {3, 2}}));
}

TEST(Viterbi, NullWinnerLeavesTargetUnaligned) {
  AlignModel p;
  p.src_vocab.add("a");
  p.tgt_vocab.add("x");
  p.tgt_vocab.add("y");
  const auto a = p.src_vocab.id_of("a");
  p.t.set(a, p.tgt_vocab.id_of("x"), 0.9);
  p.t.set(a, p.tgt_vocab.id_of("y"), 0.01);
  p.t.set(corpus::Vocabulary::kNull, p.tgt_vocab.id_of("y"), 0.5);
  EXPECT_EQ(viterbi_align(p, {{"a"}, {"x", "y"}}), (LinkSet{{0, 0}}));
}

TEST(Symmetrize, SameInputAllHeuristics) {
  LinkSet a{{0, 0}, {1, 2}, {2, 1}};
  for (auto h : {Heuristic::kIntersection, Heuristic::kUnion, Heuristic::kGrowDiagFinalAnd})
    EXPECT_EQ(symmetrize(a, a, h), a);
}

TEST(Symmetrize, SmallExample) {
  LinkSet f{{0, 0}, {1, 1}}, b{{0, 0}, {1, 0}};
  EXPECT_EQ(symmetrize(f, b, Heuristic::kIntersection), (LinkSet{{0, 0}}));
  EXPECT_EQ(symmetrize(f, b, Heuristic::kUnion), (LinkSet{{0, 0}, {1, 1}, {1, 0}}));
  // the horizontal neighbour (1,0) of 0-0 is visited before the diagonal
  EXPECT_EQ(symmetrize(f, b, Heuristic::kGrowDiagFinalAnd), (LinkSet{{0, 0}, {1, 0}, {1, 1}}));
}

TEST(Symmetrize, Disjoint) {
  LinkSet f{{0, 0}}, b{{1, 1}};
  EXPECT_TRUE(symmetrize(f, b, Heuristic::kIntersection).empty());
  EXPECT_EQ(symmetrize(f, b, Heuristic::kUnion), (LinkSet{{0, 0}, {1, 1}}));
}

TEST(Symmetrize, GrowDiagFinalAndBetweenIntersectionAndUnion) {
  fixture::Rng rng(3);
  for (int k = 0; k < 500; ++k) {
    LinkSet f, b;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        if (rng.unit() < 0.2) f.insert({i, j});
        if (rng.unit() < 0.2) b.insert({i, j});
      }
    auto g = symmetrize(f, b, Heuristic::kGrowDiagFinalAnd, 5, 5);
    auto inter = symmetrize(f, b, Heuristic::kIntersection);
    auto uni = symmetrize(f, b, Heuristic::kUnion);
    EXPECT_TRUE(std::includes(g.begin(), g.end(), inter.begin(), inter.end()));
    EXPECT_TRUE(std::includes(uni.begin(), uni.end(), g.begin(), g.end()));
  }
}

TEST(Links, FormatParseRoundTrip) {
  LinkSet a{{0, 0}, {1, 1}, {2, 3}, {3, 2}};
  EXPECT_EQ(format_links(a), "0-0 1-1 2-3 3-2");
  EXPECT_EQ(parse_links("0-0 1-1 2-3 3-2"), a);
  EXPECT_THROW(parse_links("0-0 x"), DataError);
  EXPECT_EQ(transpose(a), (LinkSet{{0, 0}, {1, 1}, {3, 2}, {2, 3}}));
}

TEST(LexicalTable, RelativeFrequencies) {
  // Counts of one English word's Bhojpuri translations.
  std::map<std::string, double> counts{
      {"अच्छा", 172}, {"नीक", 145}, {"बढ़िया", 138}, {"नीमन", 73}, {"ठीक", 7}};
  auto p = relative_frequencies(counts);
  EXPECT_NEAR(p.at("अच्छा"), 172.0 / 535, 1e-12);
}

TEST(LexicalTable, WriteReadRoundTrip) {
  auto m = train_ibm1(toy(), {5, 0, 1});
  auto text = write_ttable(m);
  auto r = read_ttable(text);
  EXPECT_EQ(write_ttable(r), text);
  EXPECT_THROW(read_ttable("a b 1.5\n"), DataError);
}

TEST(AlignCorpus, JobsInvariant) {
  std::vector<corpus::SentencePair> pairs;
  for (const auto& l : fixture::synthetic_corpus(200))
    pairs.push_back({split_ws(l.source), split_ws(l.target)});
  AlignerOptions a, b;
  a.jobs = 1;
  b.jobs = 3;
  EXPECT_EQ(write_alignments(align_corpus(pairs, a).links), write_alignments(align_corpus(pairs, b).links));
}
