#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "desksmt/decoder.hpp"
#include "desksmt/error.hpp"
#include "fixture.hpp"

using namespace desksmt;
using namespace desksmt::decoder;
using phrasetab::PhraseEntry;
using phrasetab::PhraseTable;

namespace {

PhraseEntry entry(const std::string& s, const std::string& t, std::array<double, 4> sc = {1, 1, 1, 1}) {
  PhraseEntry e;
  e.src = split_ws(s);
  e.tgt = split_ws(t);
  e.scores = sc;
  return e;
}

PhraseTable table_of(std::vector<PhraseEntry> es) {
  std::sort(es.begin(), es.end(), [](const auto& a, const auto& b) {
    return std::pair(join(a.src), join(a.tgt)) < std::pair(join(b.src), join(b.tgt));
  });
  return {es};
}

void expect_rescores(const Translation& t, const FeatureWeights& w) {
  EXPECT_NEAR(w.dot(t.features), t.score, 1e-9);
}

const fixture::PhraseSystem& small_system() {
  static const fixture::PhraseSystem sys = fixture::train_phrase_system(150);
  return sys;
}

Tokens random_sentence(fixture::Rng& rng, const std::vector<std::string>& words, std::size_t max_len) {
  Tokens s(1 + rng.below(max_len));
  for (auto& w : s) w = words[rng.below(words.size())];
  return s;
}

ruletab::TreeRule tree_rule(const std::string& line) { return ruletab::parse_tree_rule(line); }

}  // namespace

TEST(Weights, WriteReadRoundTrip) {
  auto w = FeatureWeights::defaults();
  w.set("lm", 0.123456789012345678);
  auto text = w.write({"tuned"});
  EXPECT_EQ(text.rfind("# tuned", 0), 0u);
  auto r = FeatureWeights::read(text);
  EXPECT_EQ(r.w, w.w);
  EXPECT_EQ(FeatureWeights::read("version\tweights-v1\nlm = 2\n").get("lm"), 2);
  EXPECT_THROW(FeatureWeights::read("lm\t1\n"), DataError);
  EXPECT_THROW(FeatureWeights::read("version\tweights-v1\nbogus\t1\n"), DataError);
}

TEST(NBest, FormatParseRoundTrip) {
  Translation t;
  t.target = {"हम", "जाब"};
  t.features[kLm] = -3.25;
  t.features[kWordPenalty] = 2;
  t.score = -1.5;
  auto e = parse_nbest_line(format_nbest(4, t));
  EXPECT_EQ(e.sent_id, 4u);
  EXPECT_EQ(e.target, t.target);
  EXPECT_EQ(e.features, t.features);
  EXPECT_EQ(e.score, t.score);
  EXPECT_THROW(parse_nbest_line("garbage"), DataError);
}

TEST(PhraseDecoder, OneWordScoreByHand) {
  auto lm = lm::train_lm({{"x"}}, 2);
  auto table = table_of({entry("a", "x", {0.5, 0.25, 1, 0.1})});
  PhraseModels m(table, lm);
  auto w = FeatureWeights::defaults();
  auto out = decode_phrase({"a"}, m, w);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].target, Tokens{"x"});
  FeatureVector h{};
  h[kLm] = lm.score_sentence({"x"}).total;
  h[kPhiSgivenT] = std::log10(0.5);
  h[kLexSgivenT] = std::log10(0.25);
  h[kPhiTgivenS] = 0;
  h[kLexTgivenS] = std::log10(0.1);
  h[kPhrasePenalty] = 1;
  h[kWordPenalty] = 1;
  for (int k = 0; k < kNumFeatures; ++k) EXPECT_NEAR(out[0].features[k], h[k], 1e-12) << feature_names()[k];
  EXPECT_NEAR(out[0].score, w.dot(h), 1e-12);
}

TEST(PhraseDecoder, HigherScoringOptionWins) {
  auto lm = lm::train_lm({{"z"}}, 2);
  auto table = table_of({entry("a", "x", {0.9, 0.9, 0.9, 0.9}), entry("a", "y", {0.1, 0.1, 0.1, 0.1})});
  PhraseModels m(table, lm);
  EXPECT_EQ(decode_phrase({"a"}, m, FeatureWeights::defaults())[0].target, Tokens{"x"});
}

TEST(PhraseDecoder, TieGoesToSmallerString) {
  auto lm = lm::train_lm({{"z"}}, 2);
  auto table = table_of({entry("a", "q"), entry("a", "p")});
  PhraseModels m(table, lm);
  auto out = decode_phrase({"a"}, m, FeatureWeights::defaults());
  EXPECT_EQ(out[0].target, Tokens{"p"});
  EXPECT_EQ(decode_oracle({"a"}, m, FeatureWeights::defaults()).target, Tokens{"p"});
}

TEST(PhraseDecoder, LanguageModelOutweighsDistortion) {
  std::vector<Tokens> corpus(20, Tokens{"y", "x"});
  auto lm = lm::train_lm(corpus, 2);
  auto table = table_of({entry("a", "x"), entry("b", "y")});
  PhraseModels m(table, lm);
  auto w = FeatureWeights::defaults();
  auto out = decode_phrase({"a", "b"}, m, w);
  EXPECT_EQ(out[0].target, (Tokens{"y", "x"}));
  // monotone "x y" costs more LM than the two distortion units saved
  PhraseConfig mono;
  mono.distortion_limit = 0;
  EXPECT_EQ(decode_phrase({"a", "b"}, m, w, mono)[0].target, (Tokens{"x", "y"}));
  EXPECT_GT(out[0].score, decode_phrase({"a", "b"}, m, w, mono)[0].score);
}

TEST(PhraseDecoder, GoldPairsRecoverGoldOutput) {
  const Tokens src{"why", "are", "you", "weeping", "?"};
  const Tokens tgt{"तु", "काहे", "रोअत", "हउअ", "?"};
  const align::LinkSet gold{{0, 1}, {1, 3}, {2, 0}, {3, 2}, {4, 4}};
  std::vector<PhraseEntry> es;
  for (const auto& sp : phrasetab::extract_phrases(5, 5, gold)) {
    es.push_back(entry(join(Tokens(src.begin() + sp.s1, src.begin() + sp.s2 + 1)),
                       join(Tokens(tgt.begin() + sp.t1, tgt.begin() + sp.t2 + 1))));
  }
  auto table = table_of(es);
  auto lm = lm::train_lm({tgt}, 3);
  PhraseModels m(table, lm);
  auto out = decode_phrase(src, m, FeatureWeights::defaults());
  EXPECT_EQ(out[0].target, tgt);
}

TEST(PhraseDecoder, OovIsCopiedThrough) {
  auto lm = lm::train_lm({{"x"}}, 2);
  auto table = table_of({entry("a", "x")});
  PhraseModels m(table, lm);
  auto out = decode_phrase({"a", "zz"}, m, FeatureWeights::defaults());
  EXPECT_EQ(out[0].target, (Tokens{"x", "zz"}));
  EXPECT_EQ(out[0].features[kOov], 1);
  expect_rescores(out[0], FeatureWeights::defaults());
}

TEST(PhraseDecoder, EmptySentenceRejected) {
  auto lm = lm::train_lm({{"x"}}, 2);
  auto table = table_of({entry("a", "x")});
  PhraseModels m(table, lm);
  EXPECT_THROW(decode_phrase({}, m, FeatureWeights::defaults()), DataError);
  EXPECT_THROW(decode_oracle(Tokens(5, "a"), m, FeatureWeights::defaults()), UsageError);
}

TEST(PhraseDecoder, UnprunedSearchEqualsOracle) {
  const auto& sys = small_system();
  PhraseModels plain(sys.table, sys.lm);
  PhraseModels reo(sys.table, sys.lm, &sys.reordering);
  PhraseConfig cfg;
  cfg.stack_size = 0;
  cfg.distortion_limit = -1;
  cfg.table_limit = 4;
  cfg.nbest = 5;
  const auto w = FeatureWeights::defaults();
  fixture::Rng rng(41);
  for (int k = 0; k < 40; ++k) {
    const auto s = random_sentence(rng, sys.source_words, 4);
    for (const PhraseModels* m : {&plain, &reo}) {
      auto beam = decode_phrase(s, *m, w, cfg);
      auto best = decode_oracle(s, *m, w, cfg);
      ASSERT_FALSE(beam.empty());
      EXPECT_NEAR(beam[0].score, best.score, 1e-9) << join(s);
      std::set<std::string> seen;
      for (std::size_t i = 0; i < beam.size(); ++i) {
        expect_rescores(beam[i], w);
        EXPECT_NEAR(w.dot(phrase_features(static_cast<int>(s.size()), beam[i].steps, sys.lm, m->reordering())),
                    beam[i].score, 1e-9);
        EXPECT_TRUE(seen.insert(join(beam[i].target)).second);
        if (i) EXPECT_LE(beam[i].score, beam[i - 1].score + 1e-12);
      }
    }
  }
}

TEST(PhraseDecoder, PrunedSearchStillRescores) {
  const auto& sys = small_system();
  PhraseModels reo(sys.table, sys.lm, &sys.reordering);
  PhraseConfig cfg;
  cfg.stack_size = 5;
  cfg.nbest = 10;
  fixture::Rng rng(8);
  const auto w = FeatureWeights::defaults();
  for (int k = 0; k < 20; ++k) {
    auto s = random_sentence(rng, sys.source_words, 9);
    for (const auto& t : decode_phrase(s, reo, w, cfg)) expect_rescores(t, w);
  }
}

TEST(ChartDecoder, SingleLexicalRule) {
  ruletab::RuleTable rt;
  rt.entries.push_back(ruletab::parse_rule("a [X] ||| x [X] ||| 1 1 1 1"));
  auto lm = lm::train_lm({{"x"}}, 2);
  ChartModels m(rt, lm);
  auto out = decode_chart({"a"}, m, FeatureWeights::defaults());
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0].target, Tokens{"x"});
  expect_rescores(out[0], FeatureWeights::defaults());
}

TEST(ChartDecoder, GappedRuleReorders) {
  ruletab::RuleTable rt;
  rt.entries.push_back(ruletab::parse_rule("is [X][X] going [X] ||| जात हऽ [X][X] [X] ||| 1 1 1 1 ||| 1-2"));
  rt.entries.push_back(ruletab::parse_rule("he [X] ||| ऊ [X] ||| 1 1 1 1"));
  auto lm = lm::train_lm({{"जात", "हऽ", "ऊ"}}, 3);
  ChartModels m(rt, lm);
  auto out = decode_chart({"is", "he", "going"}, m, FeatureWeights::defaults());
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0].target, (Tokens{"जात", "हऽ", "ऊ"}));
  EXPECT_NEAR(FeatureWeights::defaults().dot(rule_features(*out[0].tree, lm)), out[0].score, 1e-9);
}

TEST(ChartDecoder, MonotoneGrammarEqualsMonotoneOracle) {
  const auto& sys = small_system();
  // phrase entries as fully lexical rules
  ruletab::RuleTable rt;
  for (const auto& e : sys.table.entries) {
    ruletab::RuleEntry r;
    for (const auto& w : e.src) r.src.push_back({w, -1});
    for (const auto& w : e.tgt) r.tgt.push_back({w, -1});
    r.scores = e.scores;
    rt.entries.push_back(r);
  }
  ChartModels cm(rt, sys.lm);
  PhraseModels pm(sys.table, sys.lm);
  auto w = FeatureWeights::defaults();
  w.set("glue", 0);
  ChartConfig cc;
  cc.cell_beam = 0;
  PhraseConfig pc;
  pc.table_limit = 0;
  fixture::Rng rng(2);
  for (int k = 0; k < 30; ++k) {
    auto s = random_sentence(rng, sys.source_words, 3);
    auto chart = decode_chart(s, cm, w, cc);
    auto best = decode_oracle(s, pm, w, pc, true);
    ASSERT_FALSE(chart.empty());
    EXPECT_NEAR(chart[0].score, best.score, 1e-9) << join(s);
    EXPECT_EQ(chart[0].target, best.target);
    expect_rescores(chart[0], w);
  }
}

TEST(ChartDecoder, NBestDistinctAndRescored) {
  const auto& sys = small_system();
  ruletab::RuleTable rt;
  std::vector<corpus::SentencePair> pairs;
  std::vector<align::LinkSet> links;
  for (const auto& l : fixture::synthetic_corpus(60)) pairs.push_back({split_ws(l.source), split_ws(l.target)});
  auto wa = align::align_corpus(pairs);
  rt = ruletab::build_rule_table(pairs, wa.links, wa.forward, wa.backward);
  ChartModels m(rt, sys.lm);
  ChartConfig cc;
  cc.nbest = 8;
  const auto w = FeatureWeights::defaults();
  for (std::size_t i = 0; i < 5; ++i) {
    auto out = decode_chart(pairs[i].source, m, w, cc);
    ASSERT_FALSE(out.empty());
    std::set<std::string> seen;
    for (const auto& t : out) {
      expect_rescores(t, w);
      EXPECT_TRUE(seen.insert(join(t.target)).second);
    }
  }
}

TEST(TreeDecoder, OneNodeOneRule) {
  ruletab::TreeRuleTable t;
  t.entries.push_back(tree_rule("<tree label=\"root\"><tree label=\"X\">x</tree></tree> ||| y ||| 1 1 1 1"));
  auto lm = lm::train_lm({{"y"}}, 2);
  TreeModels m(t, lm);
  auto s = deptree::parse_conllu("1\tx\tx\tX\tX\t_\t0\troot\t_\t_\n\n")[0];
  auto out = decode_tree(s, m, FeatureWeights::defaults());
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0].target, Tokens{"y"});
  expect_rescores(out[0], FeatureWeights::defaults());
}

TEST(TreeDecoder, RootRuleSwapsChildren) {
  ruletab::TreeRuleTable t;
  t.entries.push_back(tree_rule(
      "<tree label=\"root\"><tree label=\"amod\"/><tree label=\"B\">b</tree><tree label=\"nmod\"/></tree>"
      " ||| [x1] Y [x0] ||| 1 1 1 1"));
  t.entries.push_back(tree_rule("<tree label=\"amod\"><tree label=\"A\">a</tree></tree> ||| X ||| 1 1 1 1"));
  t.entries.push_back(tree_rule("<tree label=\"nmod\"><tree label=\"C\">c</tree></tree> ||| Z ||| 1 1 1 1"));
  auto lm = lm::train_lm({{"X", "Y", "Z"}}, 2);
  TreeModels m(t, lm);
  auto s = deptree::parse_conllu(
      "1\ta\ta\tX\tA\t_\t2\tamod\t_\t_\n"
      "2\tb\tb\tX\tB\t_\t0\troot\t_\t_\n"
      "3\tc\tc\tX\tC\t_\t2\tnmod\t_\t_\n\n")[0];
  auto out = decode_tree(s, m, FeatureWeights::defaults());
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0].target, (Tokens{"Z", "Y", "X"}));
  expect_rescores(out[0], FeatureWeights::defaults());
}

TEST(TreeDecoder, ComposedAndFlatRulesAgreeOnString) {
  auto s = deptree::parse_conllu(
      "1\ta\ta\tX\tA\t_\t2\tamod\t_\t_\n"
      "2\tb\tb\tX\tB\t_\t0\troot\t_\t_\n\n")[0];
  auto lm = lm::train_lm({{"Y", "X"}}, 2);
  ruletab::TreeRuleTable minimal, flat;
  minimal.entries.push_back(
      tree_rule("<tree label=\"root\"><tree label=\"amod\"/><tree label=\"B\">b</tree></tree> ||| Y [x0] ||| 1 1 1 1"));
  minimal.entries.push_back(tree_rule("<tree label=\"amod\"><tree label=\"A\">a</tree></tree> ||| X ||| 1 1 1 1"));
  flat.entries.push_back(tree_rule(
      "<tree label=\"root\"><tree label=\"amod\"><tree label=\"A\">a</tree></tree><tree label=\"B\">b</tree></tree>"
      " ||| Y X ||| 1 1 1 1"));
  TreeModels a(minimal, lm), b(flat, lm);
  EXPECT_EQ(decode_tree(s, a, FeatureWeights::defaults())[0].target,
            decode_tree(s, b, FeatureWeights::defaults())[0].target);
}

TEST(TreeDecoder, NonProjectiveInputRejected) {
  ruletab::TreeRuleTable t;
  auto lm = lm::train_lm({{"y"}}, 2);
  TreeModels m(t, lm);
  auto s = deptree::parse_conllu(
      "1\ta\ta\tX\tA\t_\t3\tdep\t_\t_\n"
      "2\tb\tb\tX\tB\t_\t4\tdep\t_\t_\n"
      "3\tc\tc\tX\tC\t_\t0\troot\t_\t_\n"
      "4\td\td\tX\tD\t_\t3\tdep\t_\t_\n\n")[0];
  EXPECT_THROW(decode_tree(s, m, FeatureWeights::defaults()), DataError);
}

TEST(TreeDecoder, UnknownSubtreesPassThrough) {
  ruletab::TreeRuleTable t;
  auto lm = lm::train_lm({{"y"}}, 2);
  TreeModels m(t, lm);
  auto s = deptree::parse_conllu(
      "1\ta\ta\tX\tA\t_\t2\tamod\t_\t_\n"
      "2\tb\tb\tX\tB\t_\t0\troot\t_\t_\n\n")[0];
  auto out = decode_tree(s, m, FeatureWeights::defaults());
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0].target, (Tokens{"a", "b"}));
  EXPECT_EQ(out[0].features[kOov], 2);
}
