#pragma once

// Synchronous rules: hierarchical (SCFG) extraction with the glue grammar,
// and minimal tree-to-string rules from dependency trees.

#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "desksmt/align.hpp"
#include "desksmt/corpus.hpp"
#include "desksmt/deptree.hpp"
#include "desksmt/util.hpp"

namespace desksmt::ruletab {

using align::LinkSet;

// Terminal, or nonterminal with label and 0-based co-index.
struct Symbol {
  std::string text;  // word, or the label for nonterminals
  int nt = -1;
  bool is_nt() const { return nt >= 0; }
  bool operator==(const Symbol&) const = default;
  auto operator<=>(const Symbol&) const = default;
};

struct RuleEntry {
  std::string lhs = "X";
  std::vector<Symbol> src;
  std::vector<Symbol> tgt;
  std::array<double, 4> scores{1, 1, 1, 1};  // phi(s|t) lex(s|t) phi(t|s) lex(t|s)
  LinkSet alignment;                         // rhs positions, nonterminal pairs included
  std::array<double, 3> counts{0, 0, 0};     // target, source, joint
  bool glue = false;

  int arity() const;
  int terminal_count() const;
  // Target position of source nonterminal k.
  std::vector<int> nt_target_positions() const;
};

struct HierConfig {
  int max_nt = 2;
  int max_src_symbols = 5;
  int max_span = 10;
  int jobs = 1;
};

// Rules from one sentence pair, deduplicated, with unit counts and unset
// scores. Nonterminals are numbered in source order.
std::vector<RuleEntry> extract_hier_rules(const Tokens& source, const Tokens& target,
                                          const LinkSet& links, const HierConfig& cfg = {});

// S -> <X1, X1> and S -> <S1 X2, S1 X2>.
std::vector<RuleEntry> glue_rules();

struct RuleTable {
  std::vector<RuleEntry> entries;  // sorted by serialized (src, tgt)
};

RuleTable build_rule_table(const std::vector<corpus::SentencePair>& pairs,
                           const std::vector<LinkSet>& links, const align::AlignModel& forward,
                           const align::AlignModel& backward, const HierConfig& cfg = {});

std::string format_src_side(const RuleEntry& r);
std::string format_tgt_side(const RuleEntry& r);
std::string format_rule(const RuleEntry& r);
RuleEntry parse_rule(std::string_view line);
std::string write_rule_table(const RuleTable& t);
RuleTable read_rule_table(std::string_view text, std::string_view source = "<input>");

// --- tree-to-string -------------------------------------------------------

struct TreeRule {
  deptree::BracketTree fragment;  // variables are label-only nodes
  std::vector<Symbol> tgt;        // variables carry nt = index in fragment order
  std::array<double, 4> scores{1, 1, 1, 1};
  LinkSet alignment;  // fragment leaf/variable position -> target position
  std::array<double, 3> counts{0, 0, 0};

  const std::string& root_label() const { return fragment.label; }
  int arity() const;
};

// Sentence tree as bracket nodes: one inner node per token labelled with its
// relation ("root" at the top), the head word as an XPOS leaf in surface
// position.
deptree::BracketTree dependency_bracket_tree(const deptree::DepSentence& s);

struct TreeExtraction {
  std::vector<TreeRule> rules;  // one per frontier node, unit counts
  std::vector<std::string> warnings;
};

// Minimal frontier-node rules. Non-projective trees are skipped with a
// warning.
TreeExtraction extract_tree_rules(const deptree::DepSentence& tree, const Tokens& target,
                                  const LinkSet& links);

struct TreeRuleTable {
  std::vector<TreeRule> entries;  // sorted by serialized form
  std::vector<std::string> warnings;
};

// `trees[k]` is the source tree of pair k.
TreeRuleTable build_tree_rule_table(const std::vector<deptree::DepSentence>& trees,
                                    const std::vector<Tokens>& targets,
                                    const std::vector<LinkSet>& links);

std::string format_tree_rule(const TreeRule& r);
TreeRule parse_tree_rule(std::string_view line);
std::string write_tree_rule_table(const TreeRuleTable& t);
TreeRuleTable read_tree_rule_table(std::string_view text, std::string_view source = "<input>");

}  // namespace desksmt::ruletab
