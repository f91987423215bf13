#pragma once

// Automatic metrics over tokenized sentences, two-system comparison reports,
// and aggregation of human fluency/adequacy judgements.

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "desksmt/util.hpp"

namespace desksmt::eval {

struct EvalCounts {
  std::size_t correct = 0;  // clipped unigram matches
  std::size_t output_length = 0;
  std::size_t reference_length = 0;
};

struct PRF {
  double precision = 0, recall = 0, f = 0;
};

EvalCounts eval_counts(const Tokens& hyp, const Tokens& ref);
PRF precision_recall_f(const Tokens& hyp, const Tokens& ref);

// Levenshtein distance over |ref|. Throws DataError on an empty reference.
double wer(const Tokens& hyp, const Tokens& ref);

// --- BLEU -----------------------------------------------------------------

enum class BleuMode { kCorpus, kSentence };

struct BleuStats {
  std::vector<double> matches;  // clipped, per order
  std::vector<double> totals;
  double hyp_len = 0, ref_len = 0;

  explicit BleuStats(int max_n = 4) : matches(max_n, 0), totals(max_n, 0) {}
  BleuStats& operator+=(const BleuStats& o);
};

struct BleuResult {
  double score = 0;
  std::vector<double> precisions;
  double brevity_penalty = 1;
  double hyp_len = 0, ref_len = 0;
};

BleuStats bleu_stats(const Tokens& hyp, const Tokens& ref, int max_n = 4);
// kSentence adds one to matches and totals for orders two and up.
BleuResult bleu_from_stats(const BleuStats& s, BleuMode mode = BleuMode::kCorpus);
BleuResult bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs, int max_n = 4,
                BleuMode mode = BleuMode::kCorpus);
inline BleuResult sentence_bleu(const Tokens& hyp, const Tokens& ref, int max_n = 4) {
  return bleu_from_stats(bleu_stats(hyp, ref, max_n), BleuMode::kSentence);
}

// --- METEOR (exact matches only) -------------------------------------------

struct MeteorParams {
  double alpha = 0.9, beta = 3.0, gamma = 0.5;
};

struct MeteorResult {
  double score = 0;
  double precision = 0, recall = 0, fmean = 0;
  double penalty = 0;
  double fragmentation = 0;  // chunks / matches
  std::size_t matches = 0, chunks = 0;
};

MeteorResult meteor_lite(const Tokens& hyp, const Tokens& ref, const MeteorParams& p = {});
// Largest exact one-to-one alignment, fewest chunks among those, as
// (hyp position, ref position) pairs in hyp order.
std::vector<std::pair<std::size_t, std::size_t>> meteor_alignment(const Tokens& hyp,
                                                                  const Tokens& ref);
std::size_t count_chunks(const std::vector<std::pair<std::size_t, std::size_t>>& alignment);

// --- two-system comparison -------------------------------------------------

struct SentenceRow {
  std::size_t id = 0;  // 1-based
  std::array<double, 2> bleu{}, precision{}, recall{}, f{}, bp{};
  // B minus A
  double d_bleu = 0, d_precision = 0, d_recall = 0, d_f = 0, d_bp = 0;
};

struct NGramDiff {
  std::string ngram;
  double own = 0, other = 0, diff = 0;
};

struct NGramTables {
  // [system][order-1], sorted by diff desc then n-gram
  std::array<std::vector<std::vector<NGramDiff>>, 2> confirmed, unconfirmed;
};

struct LengthBucket {
  std::string name;
  std::size_t min_len = 0, max_len = 0;  // 0 max: open
  std::size_t sentences = 0;
  std::array<double, 2> meteor{}, fragmentation{};
};

struct CompareReport {
  std::vector<SentenceRow> rows;
  std::array<BleuResult, 2> corpus_bleu;
  NGramTables ngrams;
  std::vector<LengthBucket> buckets;
};

// top_k <= 0 keeps every n-gram with a positive difference.
CompareReport compare_systems(const std::vector<Tokens>& a, const std::vector<Tokens>& b,
                              const std::vector<Tokens>& refs, int top_k = 10, int max_n = 4);
std::string format_report_text(const CompareReport& r);
std::string format_report_tsv(const CompareReport& r);

struct SystemScores {
  BleuResult bleu;
  double wer = 0;  // mean per sentence
  double precision = 0, recall = 0, f = 0;  // over the pooled counts
  double meteor = 0;  // mean per sentence
  std::size_t sentences = 0;
};

SystemScores score_system(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs);
std::string format_scores(const SystemScores& s);

// --- human judgements ------------------------------------------------------

struct HumanRow {
  std::string id;
  int fluency = 0, adequacy = 0;
};

struct HumanScoreTable {
  std::vector<HumanRow> rows;
};

struct HumanSummary {
  std::size_t n = 0;
  double fluency_mean = 0, adequacy_mean = 0;
  std::array<double, 5> fluency_dist{}, adequacy_dist{};  // share at scores 1..5
  double fluency_percent = 0, adequacy_percent = 0;       // mean / 5
};

// Rows `id, fluency, adequacy[, fluency, adequacy ...]`, comma or tab
// separated; one table per evaluator column pair. A non-numeric first row
// is taken as a header.
std::vector<HumanScoreTable> read_human_scores(std::string_view text,
                                               std::string_view source = "<input>");
HumanSummary aggregate_human(const HumanScoreTable& t);
std::string format_human_summary(const HumanSummary& s);

}  // namespace desksmt::eval
