#pragma once

// CoNLL-U dependency trees, PD/UD label inventories, projectivity and the
// nested-tree (XML) decoder input format.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace desksmt::deptree {

enum class Scheme { kPD, kUD };
Scheme parse_scheme(std::string_view name);

struct DepToken {
  int id = 0;  // 1-based
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  std::vector<std::string> feats;  // empty means "_"
  int head = 0;                    // 0 = root
  std::string deprel;
  std::string deps = "_";
  std::string misc = "_";

  bool operator==(const DepToken&) const = default;
};

// A line kept verbatim but excluded from the tree: multiword ranges ("3-4")
// and empty nodes ("5.1"). `before` is the number of regular tokens that
// precede it.
struct PassThroughLine {
  std::size_t before = 0;
  std::string line;
  bool operator==(const PassThroughLine&) const = default;
};

struct DepSentence {
  std::string sent_id;
  std::string text;
  std::vector<std::string> comments;  // other '#' lines, without the '#'
  std::vector<DepToken> tokens;
  std::vector<PassThroughLine> passthrough;

  // 1-based id of the unique root token.
  int root() const;
  // children[id] lists dependents of token `id` (index 0 = artificial root),
  // in surface order.
  std::vector<std::vector<int>> children() const;
  std::vector<std::string> forms() const;
};

// Throws DataError (with sentence id and line number) on a malformed block,
// wrong column count, cycle, missing/multiple roots or dangling heads.
std::vector<DepSentence> parse_conllu(std::string_view text,
                                      std::string_view source = "<input>");
std::string write_conllu(const std::vector<DepSentence>& sentences);

// Checks the single-root, acyclic, in-range head structure.
void validate_tree(const DepSentence& s, std::string_view source = "<input>");

struct Arc {
  int dependent = 0;
  int head = 0;
};

bool is_projective(const DepSentence& s);
// First crossing pair in (dependent, head) order, if any.
std::optional<std::pair<Arc, Arc>> find_crossing(const DepSentence& s);

// Throws DataError naming the crossing arcs for non-projective input.
std::string to_nested_tree(const DepSentence& s);

// Generic labelled bracket tree as read back from nested-tree text. A node
// with neither word nor children is a variable, written `<tree label="L"/>`.
struct BracketTree {
  std::string label;
  std::string word;  // set on leaves only
  std::vector<BracketTree> children;
  bool is_leaf() const { return children.empty() && !word.empty(); }
  bool is_variable() const { return children.empty() && word.empty(); }
  bool operator==(const BracketTree&) const = default;
};

BracketTree parse_nested_tree(std::string_view text);
std::string write_nested_tree(const BracketTree& t);
// Preorder label sequence.
std::vector<std::string> label_sequence(const BracketTree& t);
// Inverse of to_nested_tree: every inner node holds exactly one leaf, its
// head word.
DepSentence nested_tree_to_dep(const BracketTree& t);

std::string xml_escape(std::string_view s);
std::string xml_unescape(std::string_view s);

struct LabelInventory {
  Scheme scheme;
  std::set<std::string> labels;

  // Membership is decided on the part before ':' ("obl:tmod" -> "obl").
  bool contains(std::string_view label) const;
};

const LabelInventory& pd_inventory();
const LabelInventory& ud_inventory();
const LabelInventory& inventory(Scheme s);

// Documented PD -> UD correspondences; empty when none is documented.
// Throws DataError for labels outside the PD inventory.
std::set<std::string> map_pd_to_ud(std::string_view pd_label);

struct SchemeStats {
  std::map<std::string, std::size_t> counts;  // out-of-inventory -> "OTHER"
  std::vector<std::string> warnings;
  std::size_t total = 0;
};

SchemeStats scheme_stats(const std::vector<DepSentence>& sentences,
                         Scheme scheme);

}  // namespace desksmt::deptree
