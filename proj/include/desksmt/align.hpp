#pragma once

// IBM Models 1 and 2, Viterbi alignment and symmetrization. Direction:
// t(f|e) generates target word f from source word e; e = NULL is source
// position 0.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "desksmt/corpus.hpp"
#include "desksmt/util.hpp"

namespace desksmt::align {

using corpus::WordId;

// (source index, target index), 0-based.
using LinkSet = std::set<std::pair<int, int>>;

inline constexpr double kProbFloor = 1e-12;

class TTable {
 public:
  // Stored value, or 0.
  double raw(WordId e, WordId f) const;
  // Stored value floored at kProbFloor; unknown pairs get the floor.
  double prob(WordId e, WordId f) const;
  void set(WordId e, WordId f, double p);
  std::size_t size() const { return t_.size(); }

  // Entries with the given source word, sorted by target id.
  std::vector<std::pair<WordId, double>> row(WordId e) const;
  std::vector<WordId> sources() const;

 private:
  static std::uint64_t key(WordId e, WordId f) {
    return (static_cast<std::uint64_t>(e) << 32) | f;
  }
  std::unordered_map<std::uint64_t, double> t_;
};

class DistortionTable {
 public:
  // a(i | j, lf, le); i in 0..le, with 0 = NULL. Unseen lengths are uniform.
  double prob(int i, int j, int lf, int le) const;
  void set(int i, int j, int lf, int le, double p);
  // Allocates a uniform table for the given lengths if absent.
  void ensure(int lf, int le);
  std::vector<std::pair<int, int>> length_pairs() const;

 private:
  std::map<std::pair<int, int>, std::vector<double>> a_;  // (lf, le) -> [j*(le+1)+i]
};

// Word ids of one sentence pair. source[0] is NULL.
struct IdPair {
  std::vector<WordId> source;
  std::vector<WordId> target;
};

struct AlignModel {
  corpus::Vocabulary src_vocab;
  corpus::Vocabulary tgt_vocab;
  TTable t;
  DistortionTable a;
  bool has_distortion = false;
  std::vector<double> log_likelihoods;  // natural log, one per EM iteration

  // Throws DataError for a word outside the vocabulary when `strict`;
  // otherwise unknown words map to <unk>.
  IdPair ids(const corpus::SentencePair& p, bool strict = false) const;
};

struct EmOptions {
  int iterations = 5;
  double epsilon = 1e-6;
  int jobs = 1;
};

AlignModel train_ibm1(const std::vector<corpus::SentencePair>& pairs,
                      const EmOptions& opt = {});
// Continues from a Model 1 table over the same vocabulary; a(i|j,lf,le)
// starts uniform. Throws DataError on vocabulary mismatch.
AlignModel train_ibm2(const std::vector<corpus::SentencePair>& pairs,
                      const AlignModel& ibm1_init, const EmOptions& opt = {});

// One link per target position at the argmax source position; NULL argmax
// means no link. Ties go to the smallest source index.
LinkSet viterbi_align(const AlignModel& m, const corpus::SentencePair& pair);

enum class Heuristic { kIntersection, kUnion, kGrowDiagFinalAnd };
Heuristic parse_heuristic(std::string_view name);
std::string_view heuristic_name(Heuristic h);

// `forward` and `backward` are both (source, target) link sets.
LinkSet symmetrize(const LinkSet& forward, const LinkSet& backward, Heuristic h,
                   int source_len = -1, int target_len = -1);

struct AlignerOptions {
  int ibm1_iterations = 5;
  int ibm2_iterations = 5;  // 0 disables Model 2
  double epsilon = 1e-6;
  Heuristic heuristic = Heuristic::kGrowDiagFinalAnd;
  int jobs = 1;
};

struct WordAlignment {
  AlignModel forward;   // t(target | source)
  AlignModel backward;  // t(source | target)
  std::vector<LinkSet> links;
};

// Trains both directions and symmetrizes every pair.
WordAlignment align_corpus(const std::vector<corpus::SentencePair>& pairs,
                           const AlignerOptions& opt = {});

corpus::SentencePair swapped(const corpus::SentencePair& p);
LinkSet transpose(const LinkSet& links);

// Pharaoh "i-j" text.
std::string format_links(const LinkSet& links);
LinkSet parse_links(std::string_view line);
std::vector<LinkSet> read_alignments(const std::string& path);
std::string write_alignments(const std::vector<LinkSet>& all);

// Lexical table as "source target probability" lines, sorted by words.
// Reading restores t and both vocabularies, not the distortion table.
std::string write_ttable(const AlignModel& m);
AlignModel read_ttable(std::string_view text, std::string_view source = "<input>");

// Relative frequencies of a count table (no EM). A positive `denominator`
// replaces the sum of the counts.
std::map<std::string, double> relative_frequencies(
    const std::map<std::string, double>& counts, double denominator = 0);

}  // namespace desksmt::align
