#pragma once

// Log-linear decoding: stack search over phrase options, CKY over SCFG
// rules, bottom-up tree-to-string search, and an exhaustive phrase oracle.
// Feature values are log10 probabilities or plain counts.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "desksmt/deptree.hpp"
#include "desksmt/lm.hpp"
#include "desksmt/phrasetab.hpp"
#include "desksmt/ruletab.hpp"
#include "desksmt/util.hpp"

namespace desksmt::decoder {

inline constexpr std::string_view kWeightsVersion = "weights-v1";

enum Feature {
  kLm = 0,
  kPhiSgivenT,
  kLexSgivenT,
  kPhiTgivenS,
  kLexTgivenS,
  kPhrasePenalty,  // rules/phrases applied
  kWordPenalty,    // target words produced
  kDistortion,     // -|start - prev_end - 1|
  kReorderFwd,
  kReorderBwd,
  kGlue,  // glue rules applied
  kOov,   // source words copied through
  kNumFeatures
};

using FeatureVector = std::array<double, kNumFeatures>;

const std::array<std::string_view, kNumFeatures>& feature_names();
// -1 when unknown.
int feature_index(std::string_view name);

FeatureVector& operator+=(FeatureVector& a, const FeatureVector& b);

struct FeatureWeights {
  FeatureVector w{};

  static FeatureWeights defaults();
  double dot(const FeatureVector& h) const;
  double get(std::string_view name) const;
  void set(std::string_view name, double v);
  // The OOV weight is held fixed during tuning.
  static bool tunable(int k) { return k != kOov; }

  // `name<TAB>value` lines after a version line; comments become '#' lines.
  std::string write(const std::vector<std::string>& comments = {}) const;
  static FeatureWeights read(std::string_view text, std::string_view source = "<weights>");
};

// --- derivations ----------------------------------------------------------

struct PhraseStep {
  int s1 = 0, s2 = 0;  // inclusive source span
  Tokens tgt;
  std::array<double, 4> scores{1, 1, 1, 1};
  bool oov = false;
  std::vector<double> reo_fwd;  // empty: no entry (uniform)
  std::vector<double> reo_bwd;
};

// A rule applied at a chart cell or tree node; children fill the target
// nonterminals by index.
struct RuleApplication {
  std::string lhs;
  std::vector<ruletab::Symbol> tgt;
  std::array<double, 4> scores{1, 1, 1, 1};
  bool glue = false;
  int oov_words = 0;
  int span_begin = 0, span_end = 0;  // chart only, half-open
  std::vector<RuleApplication> children;
};

struct Translation {
  Tokens target;
  double score = 0;
  FeatureVector features{};
  std::vector<PhraseStep> steps;        // phrase decoding
  std::optional<RuleApplication> tree;  // chart and tree decoding
};

struct ReorderingSpec {
  const phrasetab::ReorderingTable* table = nullptr;
  phrasetab::OrientationSet set() const {
    return table ? table->set : phrasetab::OrientationSet::kMsd;
  }
};

// Features of a phrase derivation recomputed from scratch.
FeatureVector phrase_features(int source_len, const std::vector<PhraseStep>& steps,
                              const lm::NGramModel& lm, const ReorderingSpec& reo);
FeatureVector rule_features(const RuleApplication& root, const lm::NGramModel& lm);
Tokens rule_yield(const RuleApplication& root);

// --- phrase-based ---------------------------------------------------------

class PhraseModels {
 public:
  PhraseModels(const phrasetab::PhraseTable& table, const lm::NGramModel& lm,
               const phrasetab::ReorderingTable* reordering = nullptr);

  const phrasetab::PhraseTable& table() const { return *table_; }
  const lm::NGramModel& lm() const { return *lm_; }
  ReorderingSpec reordering() const { return {reordering_}; }
  const std::vector<const phrasetab::PhraseEntry*>* lookup(const std::string& src) const;

 private:
  const phrasetab::PhraseTable* table_;
  const lm::NGramModel* lm_;
  const phrasetab::ReorderingTable* reordering_;
  std::unordered_map<std::string, std::vector<const phrasetab::PhraseEntry*>> index_;
};

struct PhraseConfig {
  int stack_size = 100;      // <= 0: unlimited
  int distortion_limit = 6;  // < 0: unlimited
  int nbest = 1;
  int table_limit = 20;  // options per span; <= 0: unlimited
  int max_phrase_len = 7;
};

std::vector<Translation> decode_phrase(const Tokens& sentence, const PhraseModels& models,
                                       const FeatureWeights& weights,
                                       const PhraseConfig& config = {});

// Exhaustive search over ordered segmentations and options, using the same
// option lists as decode_phrase. Throws UsageError above max_len words.
Translation decode_oracle(const Tokens& sentence, const PhraseModels& models,
                          const FeatureWeights& weights, const PhraseConfig& config = {},
                          bool monotone_only = false, std::size_t max_len = 4);

// --- hierarchical ---------------------------------------------------------

class ChartModels {
 public:
  // Glue rules are added when the table has none.
  ChartModels(const ruletab::RuleTable& rules, const lm::NGramModel& lm, int max_span = 10);

  const lm::NGramModel& lm() const { return *lm_; }
  int max_span() const { return max_span_; }
  const std::vector<ruletab::RuleEntry>& rules() const { return rules_; }
  // Non-glue rules whose terminals all occur in `sentence`.
  std::vector<const ruletab::RuleEntry*> candidates(const Tokens& sentence) const;
  const std::vector<const ruletab::RuleEntry*>& glue() const { return glue_; }

 private:
  const lm::NGramModel* lm_;
  int max_span_;
  std::vector<ruletab::RuleEntry> rules_;
  std::vector<const ruletab::RuleEntry*> glue_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_terminal_;
};

struct ChartConfig {
  int cell_beam = 100;  // <= 0: unlimited
  int nbest = 1;
};

std::vector<Translation> decode_chart(const Tokens& sentence, const ChartModels& models,
                                      const FeatureWeights& weights,
                                      const ChartConfig& config = {});

// --- tree-to-string -------------------------------------------------------

class TreeModels {
 public:
  TreeModels(const ruletab::TreeRuleTable& rules, const lm::NGramModel& lm);
  const lm::NGramModel& lm() const { return *lm_; }
  const std::vector<const ruletab::TreeRule*>* lookup(const std::string& label,
                                                      const std::string& head) const;

 private:
  const lm::NGramModel* lm_;
  std::unordered_map<std::string, std::vector<const ruletab::TreeRule*>> index_;
};

struct TreeConfig {
  int k_best_per_node = 50;  // <= 0: unlimited
  int nbest = 1;
};

// `tree` is a sentence tree (optionally wrapped in "sent") whose inner nodes
// each hold exactly one head-word leaf.
std::vector<Translation> decode_tree(const deptree::BracketTree& tree, const TreeModels& models,
                                     const FeatureWeights& weights, const TreeConfig& config = {});
std::vector<Translation> decode_tree(const deptree::DepSentence& tree, const TreeModels& models,
                                     const FeatureWeights& weights, const TreeConfig& config = {});

// --- n-best I/O -----------------------------------------------------------

struct NBestEntry {
  std::size_t sent_id = 0;
  Tokens target;
  FeatureVector features{};
  double score = 0;
};

std::string format_nbest(std::size_t sent_id, const Translation& t);
NBestEntry parse_nbest_line(std::string_view line);
std::vector<NBestEntry> read_nbest(std::string_view text);

}  // namespace desksmt::decoder
