#pragma once

// Phrase-pair extraction, phrase-table scoring, lexicalized reordering and
// factor generation tables.

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "desksmt/align.hpp"
#include "desksmt/corpus.hpp"
#include "desksmt/util.hpp"

namespace desksmt::phrasetab {

using align::LinkSet;

// Inclusive spans.
struct PhraseSpan {
  int s1 = 0, s2 = 0;  // source
  int t1 = 0, t2 = 0;  // target
  auto operator<=>(const PhraseSpan&) const = default;
};

// Consistent span pairs with at least one internal link, unaligned target
// boundary words extended, both sides at most max_len long. Sorted.
std::vector<PhraseSpan> extract_phrases(int source_len, int target_len, const LinkSet& links,
                                        int max_len = 7);

// Score order: phi(s|t), lex(s|t), phi(t|s), lex(t|s).
enum ScoreIndex { kPhiSgivenT = 0, kLexSgivenT = 1, kPhiTgivenS = 2, kLexTgivenS = 3 };

struct PhraseEntry {
  Tokens src;
  Tokens tgt;
  std::array<double, 4> scores{1, 1, 1, 1};
  LinkSet alignment;                  // local to the pair
  std::array<double, 3> counts{0, 0, 0};  // target, source, joint
};

struct PhraseTable {
  std::vector<PhraseEntry> entries;  // sorted by (src, tgt) bytewise

  // Index of entries whose source side is `src`, in table order.
  std::map<std::string, std::vector<std::size_t>> by_source() const;
};

struct ExtractOptions {
  int max_phrase_len = 7;
  int jobs = 1;
};

// `forward` holds t(target|source), `backward` t(source|target).
PhraseTable build_phrase_table(const std::vector<corpus::SentencePair>& pairs,
                               const std::vector<LinkSet>& links, const align::AlignModel& forward,
                               const align::AlignModel& backward, const ExtractOptions& opt = {});

// lex(t|s,a) with `model` = t(target|source) and `a` local (source, target).
double lexical_weight(const Tokens& src, const Tokens& tgt, const LinkSet& a,
                      const align::AlignModel& model);

std::string format_entry(const PhraseEntry& e);
PhraseEntry parse_entry(std::string_view line);
std::string write_phrase_table(const PhraseTable& t);
PhraseTable read_phrase_table(std::string_view text, std::string_view source = "<input>");

// --- reordering -----------------------------------------------------------

enum class OrientationSet { kMsd, kMslr };
OrientationSet parse_orientation_set(std::string_view name);

// Orientation indices: 0 monotone, 1 swap, 2 discontinuous (msd) or
// 2 disc-left, 3 disc-right (mslr).
int forward_orientation(const PhraseSpan& p, const LinkSet& links, int source_len,
                        OrientationSet set);
int backward_orientation(const PhraseSpan& p, const LinkSet& links, int source_len,
                         int target_len, OrientationSet set);

struct ReorderingEntry {
  Tokens src;
  Tokens tgt;
  std::vector<double> forward;   // wrt the previous phrase
  std::vector<double> backward;  // wrt the next phrase; empty if unidirectional
};

struct ReorderingTable {
  OrientationSet set = OrientationSet::kMsd;
  bool bidirectional = true;
  std::vector<ReorderingEntry> entries;  // sorted by (src, tgt)

  std::size_t orientations() const { return set == OrientationSet::kMsd ? 3 : 4; }
  const ReorderingEntry* find(const Tokens& src, const Tokens& tgt) const;
};

struct ReorderingOptions {
  OrientationSet set = OrientationSet::kMsd;
  bool bidirectional = true;
  double sigma = 0.5;
  int max_phrase_len = 7;
};

ReorderingTable extract_reordering(const std::vector<corpus::SentencePair>& pairs,
                                   const std::vector<LinkSet>& links,
                                   const ReorderingOptions& opt = {});

std::string write_reordering_table(const ReorderingTable& t);
ReorderingTable read_reordering_table(std::string_view text, OrientationSet set,
                                      bool bidirectional);

// --- factors --------------------------------------------------------------

// p(to | from) over factored tokens "surface|f1|...".
struct GenerationTable {
  std::map<std::string, std::map<std::string, double>> rows;
  double prob(const std::string& from, const std::string& to) const;
};

GenerationTable build_generation_table(const std::vector<Tokens>& factored_corpus,
                                       std::size_t from_factor, std::size_t to_factor);

}  // namespace desksmt::phrasetab
