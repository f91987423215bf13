#pragma once

// Loaded translation systems and the end-to-end train/tune/test pipeline
// driven by a flat `section.key = value` configuration file.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "desksmt/align.hpp"
#include "desksmt/corpus.hpp"
#include "desksmt/decoder.hpp"
#include "desksmt/deptree.hpp"
#include "desksmt/lm.hpp"
#include "desksmt/phrasetab.hpp"
#include "desksmt/ruletab.hpp"

namespace desksmt::pipeline {

enum class DecoderKind { kPhrase, kHier, kTree };
DecoderKind parse_decoder_kind(std::string_view name);
std::string_view decoder_kind_name(DecoderKind k);

lm::DiscountMode parse_discount_mode(std::string_view name, double fixed = 0.75);

struct DecodeSettings {
  DecoderKind kind = DecoderKind::kPhrase;
  int stack_size = 100;
  int distortion_limit = 6;
  int table_limit = 20;
  int max_phrase_len = 7;
  int cell_beam = 100;
  int max_span = 10;
  int k_best_per_node = 50;
};

// Owns the models of one system; decoding is read-only and thread-safe.
class Translator {
 public:
  Translator(DecodeSettings settings, lm::NGramModel lm);
  Translator(const Translator&) = delete;
  Translator& operator=(const Translator&) = delete;

  void set_phrase_table(phrasetab::PhraseTable t,
                        std::optional<phrasetab::ReorderingTable> reordering = std::nullopt);
  void set_rule_table(ruletab::RuleTable t);
  void set_tree_rules(ruletab::TreeRuleTable t);

  const DecodeSettings& settings() const { return settings_; }
  DecoderKind kind() const { return settings_.kind; }

  // `tree` is required for the tree decoder and ignored otherwise.
  std::vector<decoder::Translation> translate(const Tokens& sentence,
                                              const deptree::DepSentence* tree,
                                              const decoder::FeatureWeights& w, int nbest) const;
  // Parallel over sentences; an empty sentence yields an empty translation.
  // Errors name the 1-based sentence number.
  std::vector<std::vector<decoder::Translation>> translate_all(
      const std::vector<Tokens>& sentences, const std::vector<deptree::DepSentence>* trees,
      const decoder::FeatureWeights& w, int nbest, int jobs) const;

 private:
  DecodeSettings settings_;
  lm::NGramModel lm_;
  std::unique_ptr<phrasetab::PhraseTable> phrases_;
  std::unique_ptr<phrasetab::ReorderingTable> reordering_;
  std::unique_ptr<decoder::PhraseModels> phrase_models_;
  std::unique_ptr<ruletab::RuleTable> rules_;
  std::unique_ptr<decoder::ChartModels> chart_models_;
  std::unique_ptr<ruletab::TreeRuleTable> tree_rules_;
  std::unique_ptr<decoder::TreeModels> tree_models_;
};

struct PipelineConfig {
  // paths (absolute after parsing)
  std::string train_source, train_target, dev_source, dev_target, test_source, test_target;
  std::string train_trees, dev_trees, test_trees;  // CoNLL-U, tree decoder only
  std::string model_dir;
  // corpus
  corpus::LangProfile source_lang = corpus::LangProfile::kEnglish;
  corpus::LangProfile target_lang = corpus::LangProfile::kDevanagari;
  bool tokenize = true;
  std::size_t max_len = 80;
  // lm
  int lm_order = 3;
  lm::DiscountMode discount = lm::DiscountMode::from_counts();
  // align
  int align_iterations = 5;
  int align_model = 2;
  align::Heuristic symmetrization = align::Heuristic::kGrowDiagFinalAnd;
  // phrase / reorder / hier
  int phrase_max_len = 7;
  bool reorder_enabled = true;
  phrasetab::OrientationSet orientation_set = phrasetab::OrientationSet::kMsd;
  bool reorder_bidirectional = true;
  // decoder
  DecodeSettings decode;
  int nbest = 1;
  // tune
  bool tune_enabled = true;
  int tune_iterations = 2;
  int tune_nbest = 100;
  int tune_random_restarts = 3;
  // eval
  std::vector<std::string> metrics{"bleu", "wer", "prf", "meteor"};

  // Canonical `key = value` text of every training-relevant setting (paths
  // excluded).
  std::string canonical() const;
};

// Relative paths resolve against `base_dir`. Throws DataError with line
// numbers for unknown keys or bad values.
PipelineConfig parse_config(std::string_view text, std::string_view source,
                            const std::string& base_dir);
// Every referenced input path must exist.
void validate_config(const PipelineConfig& c);
std::string config_hash(const PipelineConfig& c);

struct RunOptions {
  int jobs = 1;
  std::uint64_t seed = 1;
};

// Writes every artifact plus `manifest` into c.model_dir.
void run_pipeline(const PipelineConfig& c, const RunOptions& opt, std::ostream& log);

// Tokenized sentences of a file, optionally run through the tokenizer.
std::vector<Tokens> load_sentences(const std::string& path, bool tokenize,
                                   corpus::LangProfile profile);

}  // namespace desksmt::pipeline
