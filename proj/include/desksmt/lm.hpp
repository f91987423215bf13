#pragma once

// n-gram language models: interpolated modified Kneser-Ney estimation,
// backoff queries and ARPA text I/O. All values are log10.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "desksmt/corpus.hpp"
#include "desksmt/util.hpp"

namespace desksmt::lm {

using corpus::WordId;

struct DiscountMode {
  bool counts_of_counts = true;
  double fixed = 0.75;  // used when !counts_of_counts, and as the fallback

  static DiscountMode from_counts() { return {}; }
  static DiscountMode fixed_value(double d) { return {false, d}; }
};

struct NGramEntry {
  double logprob = 0;
  double backoff = 0;  // 0 for the highest order
};

// D1, D2, D3+ actually used at each order (index 0 = unigrams).
struct OrderDiscounts {
  std::array<double, 3> d{0.75, 0.75, 0.75};
  bool fell_back = false;
};

struct SentenceScore {
  double total = 0;       // log10
  double perplexity = 0;  // 10^(-total / (len + 1))
};

class NGramModel {
 public:
  NGramModel() = default;
  explicit NGramModel(int order);

  int order() const { return order_; }
  const corpus::Vocabulary& vocab() const { return vocab_; }
  corpus::Vocabulary& mutable_vocab() { return vocab_; }
  WordId id_of(std::string_view w) const { return vocab_.id_of(w); }

  double unk_logprob() const { return unk_logprob_; }
  void set_unk_logprob(double v) { unk_logprob_ = v; }

  // Number of stored k-grams, k in 1..order.
  std::size_t count(int k) const { return tables_.at(k - 1).size(); }
  const NGramEntry* find(std::span<const WordId> ngram) const;
  void set(std::span<const WordId> ngram, NGramEntry e);

  // Stored k-grams in canonical order (ids compared lexicographically; for
  // unigrams this is vocabulary order).
  std::vector<std::pair<std::vector<WordId>, NGramEntry>> entries(int k) const;

  // History is truncated to order-1 words; unknown words map to <unk>.
  double score(std::span<const WordId> history, WordId w) const;
  double score_word(const Tokens& history, std::string_view word) const;
  SentenceScore score_sentence(const Tokens& tokens) const;

  const std::vector<OrderDiscounts>& discounts() const { return discounts_; }
  void set_discounts(std::vector<OrderDiscounts> d) { discounts_ = std::move(d); }

 private:
  static std::string key(std::span<const WordId> ids);

  int order_ = 0;
  corpus::Vocabulary vocab_;
  std::vector<std::unordered_map<std::string, NGramEntry>> tables_;
  std::vector<OrderDiscounts> discounts_;
  double unk_logprob_ = -100;
};

// Sentences are padded with <s> ... </s>. Counting is sharded over
// sentences; the result does not depend on `jobs`.
NGramModel train_lm(const std::vector<Tokens>& corpus, int order = 3,
                    DiscountMode mode = {}, int jobs = 1);

// Corpus perplexity: 10^(-sum(total) / sum(len + 1)).
double corpus_perplexity(const NGramModel& m, const std::vector<Tokens>& corpus);

std::string write_arpa(const NGramModel& m);
NGramModel read_arpa(std::string_view text);

}  // namespace desksmt::lm
