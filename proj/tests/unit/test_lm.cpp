#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "desksmt/corpus.hpp"
#include "desksmt/error.hpp"
#include "desksmt/lm.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace desksmt;
using corpus::Vocabulary;

namespace {

std::vector<Tokens> fixture_targets(std::size_t n, std::uint64_t seed = 7) {
  std::vector<Tokens> out;
  for (const auto& l : fixture::synthetic_corpus(n, seed)) out.push_back(split_ws(l.target));
  return out;
}

double mass(const lm::NGramModel& m, const std::vector<lm::WordId>& h) {
  double s = 0;
  for (lm::WordId w = 0; w < m.vocab().size(); ++w) {
    if (w == Vocabulary::kNull || w == Vocabulary::kBos) continue;
    s += std::pow(10.0, m.score(h, w));
  }
  return s;
}

}  // namespace

TEST(Lm, ExchangeableContinuationsScoreEqual) {
  auto m = lm::train_lm({{"a", "b"}, {"a", "c"}}, 2);
  const auto a = m.id_of("a");
  std::vector<lm::WordId> h{a};
  EXPECT_NEAR(m.score(h, m.id_of("b")), m.score(h, m.id_of("c")), 1e-12);
  EXPECT_NEAR(mass(m, h), 1.0, 1e-6);
}

TEST(Lm, DistributionsNormalizeOnFixture) {
  auto corpus = fixture_targets(500);
  for (int order : {2, 3, 4}) {
    auto m = lm::train_lm(corpus, order);
    std::mt19937 rng(order);
    for (int k = 0; k < 30; ++k) {
      const auto& s = corpus[rng() % corpus.size()];
      std::vector<lm::WordId> h{Vocabulary::kBos};
      const std::size_t cut = rng() % (s.size() + 1);
      for (std::size_t i = 0; i < cut; ++i) h.push_back(m.id_of(s[i]));
      EXPECT_NEAR(mass(m, h), 1.0, 1e-6) << "order " << order;
    }
    EXPECT_NEAR(mass(m, {m.id_of("नदी"), m.id_of("लइका")}), 1.0, 1e-6);
  }
}

TEST(Lm, FixedDiscountAlsoNormalizes) {
  auto corpus = fixture_targets(200);
  auto m = lm::train_lm(corpus, 3, lm::DiscountMode::fixed_value(0.5));
  EXPECT_NEAR(mass(m, {Vocabulary::kBos}), 1.0, 1e-6);
  for (const auto& d : m.discounts()) EXPECT_EQ(d.d[0], 0.5);
}

TEST(Lm, TinyCorpusFallsBackToFixedDiscount) {
  auto m = lm::train_lm({{"a", "b"}}, 3);
  bool any = false;
  for (const auto& d : m.discounts()) any = any || d.fell_back;
  EXPECT_TRUE(any);
}

TEST(Lm, BackoffMatchesRecursiveOracle) {
  auto corpus = fixture_targets(300);
  auto m = lm::train_lm(corpus, 3);
  std::mt19937 rng(5);
  const auto V = static_cast<lm::WordId>(m.vocab().size());
  for (int k = 0; k < 2000; ++k) {
    std::vector<lm::WordId> h;
    const int len = static_cast<int>(rng() % 4);
    for (int i = 0; i < len; ++i) h.push_back(1 + rng() % (V - 1));
    const lm::WordId w = 2 + rng() % (V - 2);
    ASSERT_NEAR(m.score(h, w), oracle::lm_logprob(m, h, w), 1e-12);
  }
}

TEST(Lm, StoredValueAndUnknown) {
  auto m = lm::train_lm({{"a", "b"}, {"a", "c"}}, 2);
  std::vector<lm::WordId> ab{m.id_of("a"), m.id_of("b")};
  ASSERT_NE(m.find(ab), nullptr);
  EXPECT_EQ(m.score(std::vector<lm::WordId>{m.id_of("a")}, m.id_of("b")), m.find(ab)->logprob);
  EXPECT_EQ(m.score_word({}, "zzz"), m.unk_logprob());
}

TEST(Lm, EmptySentenceScoresOnlyEnd) {
  auto m = lm::train_lm({{"a", "b"}}, 2);
  auto s = m.score_sentence({});
  EXPECT_DOUBLE_EQ(s.total, m.score(std::vector<lm::WordId>{Vocabulary::kBos}, Vocabulary::kEos));
}

TEST(Lm, TrainedOrderBeatsScrambled) {
  auto m = lm::train_lm({{"इ", "घर", "छोट", "हऽ"}}, 3);
  EXPECT_GT(m.score_sentence({"इ", "घर", "छोट", "हऽ"}).total,
            m.score_sentence({"छोट", "घर", "हऽ", "इ"}).total);
}

TEST(Lm, SentenceScoreIsSumOfWordScores) {
  auto corpus = fixture_targets(200);
  auto m = lm::train_lm(corpus, 3);
  const Tokens s{"एगो", "लइका", "पानी", "देखेला", "।"};
  double sum = 0;
  Tokens h{"<s>"};
  for (const auto& w : s) {
    sum += m.score_word(h, w);
    h.push_back(w);
  }
  sum += m.score_word(h, "</s>");
  EXPECT_NEAR(m.score_sentence(s).total, sum, 1e-12);
}

TEST(Lm, PerplexityBeatsUniform) {
  auto train = fixture_targets(1000, 1);
  auto held = fixture_targets(200, 2);
  auto m = lm::train_lm(train, 3);
  const double uniform = static_cast<double>(m.vocab().size() - 2);
  EXPECT_LT(lm::corpus_perplexity(m, held), uniform);
}

TEST(Lm, ArpaRoundTrip) {
  auto m = lm::train_lm(fixture_targets(300), 3);
  auto text = lm::write_arpa(m);
  auto r = lm::read_arpa(text);
  ASSERT_EQ(r.order(), m.order());
  for (int k = 1; k <= 3; ++k) {
    ASSERT_EQ(r.count(k), m.count(k));
    for (const auto& [ids, e] : m.entries(k)) {
      std::vector<lm::WordId> rid;
      for (auto id : ids) rid.push_back(r.id_of(m.vocab().string_of(id)));
      const auto* re = r.find(rid);
      ASSERT_NE(re, nullptr);
      EXPECT_NEAR(re->logprob, e.logprob, 1e-6);
      EXPECT_NEAR(re->backoff, e.backoff, 1e-6);
    }
  }
  EXPECT_EQ(lm::write_arpa(r), text);
}

TEST(Lm, JobsDoNotChangeModel) {
  auto corpus = fixture_targets(400);
  EXPECT_EQ(lm::write_arpa(lm::train_lm(corpus, 3, {}, 1)), lm::write_arpa(lm::train_lm(corpus, 3, {}, 4)));
}

TEST(Lm, Errors) {
  EXPECT_THROW(lm::train_lm({}, 3), DataError);
  EXPECT_THROW(lm::train_lm({{"a"}}, 0), UsageError);
  auto text = lm::write_arpa(lm::train_lm({{"a", "b"}}, 2));
  auto bad = text;
  bad.replace(bad.find("ngram 1="), 9, "ngram 1=99");
  try {
    lm::read_arpa(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("1-grams"), std::string::npos) << e.what();
  }
}
