#include <gtest/gtest.h>

#include <random>

#include "desksmt/deptree.hpp"
#include "desksmt/error.hpp"
#include "desksmt/util.hpp"
#include "oracles.hpp"

using namespace desksmt;
using namespace desksmt::deptree;

namespace {

std::string data(const std::string& name) { return read_file(std::string(DESKSMT_TEST_DATA) + "/" + name); }

DepSentence from_heads(const std::vector<int>& heads) {
  DepSentence s;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    DepToken t;
    t.id = static_cast<int>(i + 1);
    t.form = "w" + std::to_string(i + 1);
    t.head = heads[i];
    t.deprel = heads[i] == 0 ? "root" : "dep";
    s.tokens.push_back(t);
  }
  return s;
}

}  // namespace

TEST(Conllu, AnitaRaviBlock) {
  auto sents = parse_conllu(data("anita_ravi.conllu"));
  ASSERT_EQ(sents.size(), 1u);
  const auto& s = sents[0];
  EXPECT_EQ(s.sent_id, "135");
  ASSERT_EQ(s.tokens.size(), 6u);
  EXPECT_EQ(s.tokens[s.root() - 1].form, "came");
  EXPECT_EQ(s.tokens[s.root() - 1].deprel, "root");
  EXPECT_EQ(s.tokens[0].form, "Anita");
  EXPECT_EQ(s.tokens[0].head, 4);
  EXPECT_EQ(s.tokens[0].deprel, "nsubj");
  EXPECT_TRUE(is_projective(s));
}

TEST(Conllu, SingleToken) {
  auto s = parse_conllu("1\tx\tx\tX\tX\t_\t0\troot\t_\t_\n\n");
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].root(), 1);
}

TEST(Conllu, SelfHeadIsCycle) {
  EXPECT_THROW(parse_conllu("1\tx\tx\tX\tX\t_\t1\troot\t_\t_\n\n"), DataError);
}

TEST(Conllu, ErrorsAreDataErrors) {
  EXPECT_THROW(parse_conllu("1\tx\tx\n\n"), DataError);
  EXPECT_THROW(parse_conllu("1\ta\ta\tX\tX\t_\t0\troot\t_\t_\n2\tb\tb\tX\tX\t_\t0\troot\t_\t_\n\n"),
               DataError);
  EXPECT_THROW(parse_conllu("1\ta\ta\tX\tX\t_\t5\troot\t_\t_\n\n"), DataError);
}

TEST(Conllu, WriteParseRoundTrip) {
  auto s = parse_conllu(data("anita_ravi.conllu"));
  auto again = parse_conllu(write_conllu(s));
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(again[0].tokens, s[0].tokens);
}

TEST(Conllu, MultiwordLinesPassThrough) {
  std::string text =
      "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\tdo\tAUX\tVBP\t_\t0\troot\t_\t_\n"
      "2\tn't\tnot\tPART\tRB\t_\t1\tadvmod\t_\t_\n\n";
  auto s = parse_conllu(text);
  ASSERT_EQ(s[0].tokens.size(), 2u);
  ASSERT_EQ(s[0].passthrough.size(), 1u);
  EXPECT_EQ(write_conllu(s), text);
}

TEST(Projectivity, Examples) {
  EXPECT_TRUE(is_projective(from_heads({2, 3, 0})));
  // arcs 3->1 and 4->2 cross
  auto crossing = from_heads({3, 4, 0, 3});
  EXPECT_FALSE(is_projective(crossing));
  EXPECT_TRUE(find_crossing(crossing).has_value());
}

TEST(Projectivity, MatchesYieldOracleOnRandomTrees) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    // random tree: attach each node (in random order) to an earlier-placed one
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i + 1;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> heads(n, 0);
    for (int k = 1; k < n; ++k) heads[order[k] - 1] = order[rng() % k];
    auto s = from_heads(heads);
    ASSERT_EQ(is_projective(s), oracle::projective(s)) << trial;
  }
}

TEST(NestedTree, SingleToken) {
  auto s = parse_conllu("1\tx\tx\tX\tX\t_\t0\troot\t_\t_\n\n");
  EXPECT_EQ(to_nested_tree(s[0]),
            "<tree label=\"sent\"><tree label=\"root\"><tree label=\"X\">x</tree></tree></tree>");
}

TEST(NestedTree, StoneSentenceMatchesPublishedLayout) {
  auto s = parse_conllu(data("stone.conllu"));
  std::string expected(trim(data("stone.nested")));
  const std::string out = to_nested_tree(s[0]);
  EXPECT_EQ(out, expected);
  EXPECT_NE(out.find("<tree label=\"nsubj\"><tree label=\"det\"><tree label=\"DT\">A</tree></tree>"
                     "<tree label=\"NN\">stone</tree></tree>"),
            std::string::npos);
}

TEST(NestedTree, ReadBackKeepsLabels) {
  auto s = parse_conllu(data("stone.conllu"))[0];
  const std::string out = to_nested_tree(s);
  auto t = parse_nested_tree(out);
  EXPECT_EQ(write_nested_tree(t), out);
  EXPECT_EQ(label_sequence(parse_nested_tree(write_nested_tree(t))), label_sequence(t));
  auto back = nested_tree_to_dep(t);
  ASSERT_EQ(back.tokens.size(), s.tokens.size());
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    EXPECT_EQ(back.tokens[i].form, s.tokens[i].form);
    EXPECT_EQ(back.tokens[i].head, s.tokens[i].head);
    EXPECT_EQ(back.tokens[i].deprel, s.tokens[i].deprel);
  }
}

TEST(NestedTree, NonProjectiveRejected) {
  EXPECT_THROW(to_nested_tree(from_heads({3, 4, 0, 3})), DataError);
}

TEST(NestedTree, EscapesMarkup) {
  auto s = parse_conllu("1\t<&>\tx\tX\tX\t_\t0\troot\t_\t_\n\n");
  auto out = to_nested_tree(s[0]);
  EXPECT_NE(out.find("&lt;&amp;&gt;"), std::string::npos);
  EXPECT_EQ(nested_tree_to_dep(parse_nested_tree(out)).tokens[0].form, "<&>");
}

TEST(Inventory, PdToUdMapping) {
  EXPECT_EQ(map_pd_to_ud("k2"), (std::set<std::string>{"ccomp", "dobj", "xcomp"}));
  EXPECT_EQ(map_pd_to_ud("k3"), (std::set<std::string>{"nmod"}));
  EXPECT_TRUE(map_pd_to_ud("rsym").empty());
  EXPECT_THROW(map_pd_to_ud("nsubj"), DataError);
}

TEST(Inventory, SubtypeMembershipUsesPrefix) {
  EXPECT_TRUE(ud_inventory().contains("obl:tmod"));
  EXPECT_FALSE(ud_inventory().contains("k1"));
  EXPECT_TRUE(pd_inventory().contains("k1"));
}

TEST(SchemeStats, CountsLabels) {
  EXPECT_EQ(scheme_stats({}, Scheme::kUD).total, 0u);
  auto s = parse_conllu(data("anita_ravi.conllu"));
  auto st = scheme_stats(s, Scheme::kUD);
  std::map<std::string, std::size_t> want{{"nsubj", 1}, {"cc", 1},       {"conj", 1},
                                          {"root", 1},  {"obl:tmod", 1}, {"punct", 1}};
  EXPECT_EQ(st.counts, want);
  auto two = s;
  two.push_back(s[0]);
  auto st2 = scheme_stats(two, Scheme::kUD);
  for (const auto& [k, v] : want) EXPECT_EQ(st2.counts.at(k), 2 * v);
}

TEST(SchemeStats, OutOfInventoryIsOther) {
  auto s = parse_conllu("1\tx\tx\tX\tX\t_\t0\tk1\t_\t_\n\n");
  auto st = scheme_stats(s, Scheme::kUD);
  EXPECT_EQ(st.counts.at("OTHER"), 1u);
  EXPECT_FALSE(st.warnings.empty());
}
