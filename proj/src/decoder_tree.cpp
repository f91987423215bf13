#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_map>

#include "desksmt/decoder.hpp"
#include "desksmt/error.hpp"
#include "hypergraph.hpp"

namespace desksmt::decoder {

using deptree::BracketTree;
using detail::HyperEdge;
using detail::Hypergraph;
using detail::KBest;
using detail::LmState;
using ruletab::Symbol;
using ruletab::TreeRule;

namespace {

std::string head_word(const BracketTree& t) {
  for (const auto& c : t.children)
    if (c.is_leaf()) return c.word;
  return {};
}

std::string index_key(const std::string& label, const std::string& head) { return label + '\t' + head; }

// Matches `frag` at `node`, collecting the nodes bound to variables in preorder.
bool match(const BracketTree& frag, const BracketTree& node, std::vector<const BracketTree*>& out) {
  if (frag.label != node.label) return false;
  if (frag.is_variable()) {
    if (node.children.empty()) return false;
    out.push_back(&node);
    return true;
  }
  if (frag.is_leaf()) return node.is_leaf() && node.word == frag.word;
  if (node.is_leaf() || frag.children.size() != node.children.size()) return false;
  for (std::size_t i = 0; i < frag.children.size(); ++i)
    if (!match(frag.children[i], node.children[i], out)) return false;
  return true;
}

struct EdgeInfo {
  const TreeRule* rule = nullptr;  // null: synthesized pass-through
  std::string label;
  std::vector<Symbol> tgt;
};

class TreeSearch {
 public:
  TreeSearch(const TreeModels& m, const FeatureWeights& w, const TreeConfig& cfg)
      : m_(m), w_(w), cfg_(cfg) {}

  std::vector<Translation> run(const BracketTree& root) {
    const auto& top = visit(root);
    const int goal = g_.add_node();
    items_.emplace_back();
    for (int v : top) {
      FeatureVector d{};
      d[kLm] = detail::finish_lm(m_.lm(), items_[v].lm);
      g_.add_edge(goal, HyperEdge{{v}, w_.dot(d), d, -1});
    }
    std::vector<double> best;
    for (const auto& it : items_) best.push_back(it.best);
    detail::trim_edges(g_, best, static_cast<std::size_t>(std::max(2 * cfg_.nbest, 2)));
    KBest kb(g_);
    return detail::collect_nbest(kb, goal, cfg_.nbest, [&](const KBest::Tree& t) {
      Translation tr;
      tr.tree = build(t.kids.at(0));
      tr.target = rule_yield(*tr.tree);
      tr.features = rule_features(*tr.tree, m_.lm());
      tr.score = t.score;
      detail::check_rescore(tr.score, tr.features, w_);
      return tr;
    });
  }

 private:
  struct Item {
    LmState lm;
    double best = -std::numeric_limits<double>::infinity();
  };

  const std::vector<int>& visit(const BracketTree& node) {
    if (auto it = done_.find(&node); it != done_.end()) return it->second;
    for (const auto& c : node.children)
      if (!c.children.empty()) visit(c);

    std::unordered_map<std::string, int> keys;
    std::vector<int> nodes;
    auto add = [&](const std::vector<Symbol>& tgt, const FeatureVector& stat, const std::vector<int>& tails,
                   int payload) {
      std::vector<const LmState*> kids;
      double inside = 0;
      for (int t : tails) {
        kids.push_back(&items_[t].lm);
        inside += items_[t].best;
      }
      double dlm = 0;
      LmState st = detail::combine_lm(m_.lm(), tgt, kids, dlm);
      FeatureVector f = stat;
      f[kLm] = dlm;
      const double score = w_.dot(f);
      auto [it, fresh] = keys.try_emplace(st.key(), -1);
      if (fresh) {
        it->second = g_.add_node();
        items_.push_back({std::move(st), -std::numeric_limits<double>::infinity()});
        nodes.push_back(it->second);
      }
      items_[it->second].best = std::max(items_[it->second].best, score + inside);
      g_.add_edge(it->second, HyperEdge{tails, score, f, payload});
    };
    auto expand = [&](const std::vector<Symbol>& tgt, const FeatureVector& stat,
                      const std::vector<const BracketTree*>& bound, int payload) {
      std::vector<int> tails(bound.size());
      std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == bound.size()) {
          add(tgt, stat, tails, payload);
          return;
        }
        for (int v : done_.at(bound[k])) {
          tails[k] = v;
          rec(k + 1);
        }
      };
      rec(0);
    };

    bool matched = false;
    if (const auto* rules = m_.lookup(node.label, head_word(node))) {
      for (const auto* r : *rules) {
        std::vector<const BracketTree*> bound;
        if (!match(r->fragment, node, bound)) continue;
        if (static_cast<int>(bound.size()) != r->arity()) continue;
        matched = true;
        FeatureVector stat{};
        for (int i = 0; i < 4; ++i) stat[kPhiSgivenT + i] = std::log10(r->scores[i]);
        stat[kPhrasePenalty] = 1;
        for (const auto& s : r->tgt)
          if (!s.is_nt()) stat[kWordPenalty] += 1;
        const int payload = static_cast<int>(info_.size());
        info_.push_back({r, r->root_label(), r->tgt});
        expand(r->tgt, stat, bound, payload);
      }
    }
    if (!matched) {
      std::vector<Symbol> tgt;
      std::vector<const BracketTree*> bound;
      FeatureVector stat{};
      stat[kPhrasePenalty] = 1;
      stat[kOov] = 1;
      for (const auto& c : node.children) {
        if (c.children.empty()) {
          tgt.push_back({c.word, -1});
          stat[kWordPenalty] += 1;
        } else {
          tgt.push_back({c.label, static_cast<int>(bound.size())});
          bound.push_back(&c);
        }
      }
      const int payload = static_cast<int>(info_.size());
      info_.push_back({nullptr, node.label, tgt});
      expand(tgt, stat, bound, payload);
    }

    std::stable_sort(nodes.begin(), nodes.end(),
                     [&](int x, int y) { return items_[x].best > items_[y].best; });
    if (cfg_.k_best_per_node > 0 && static_cast<int>(nodes.size()) > cfg_.k_best_per_node)
      nodes.resize(cfg_.k_best_per_node);
    return done_[&node] = std::move(nodes);
  }

  RuleApplication build(const KBest::Tree& t) const {
    const EdgeInfo& info = info_.at(t.edge->payload);
    RuleApplication a;
    a.lhs = info.label;
    a.tgt = info.tgt;
    if (info.rule)
      a.scores = info.rule->scores;
    else
      a.oov_words = 1;
    for (const auto& k : t.kids) a.children.push_back(build(k));
    return a;
  }

  const TreeModels& m_;
  const FeatureWeights& w_;
  const TreeConfig& cfg_;
  Hypergraph g_;
  std::vector<Item> items_;
  std::vector<EdgeInfo> info_;
  std::unordered_map<const BracketTree*, std::vector<int>> done_;
};

}  // namespace

TreeModels::TreeModels(const ruletab::TreeRuleTable& rules, const lm::NGramModel& lm) : lm_(&lm) {
  for (const auto& r : rules.entries)
    index_[index_key(r.root_label(), head_word(r.fragment))].push_back(&r);
}

const std::vector<const TreeRule*>* TreeModels::lookup(const std::string& label,
                                                       const std::string& head) const {
  auto it = index_.find(index_key(label, head));
  return it == index_.end() ? nullptr : &it->second;
}

std::vector<Translation> decode_tree(const BracketTree& tree, const TreeModels& models,
                                     const FeatureWeights& weights, const TreeConfig& config) {
  const BracketTree* root = &tree;
  if (root->label == "sent" && root->children.size() == 1) root = &root->children[0];
  if (root->children.empty()) throw DataError("cannot decode a tree without inner nodes");
  auto out = TreeSearch(models, weights, config).run(*root);
  if (out.empty()) throw InvariantError("tree search produced no derivation");
  return out;
}

std::vector<Translation> decode_tree(const deptree::DepSentence& tree, const TreeModels& models,
                                     const FeatureWeights& weights, const TreeConfig& config) {
  deptree::validate_tree(tree);
  if (!deptree::is_projective(tree)) throw DataError("cannot decode a non-projective tree");
  return decode_tree(ruletab::dependency_bracket_tree(tree), models, weights, config);
}

}  // namespace desksmt::decoder
