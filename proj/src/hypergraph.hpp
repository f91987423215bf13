#pragma once

// Search space shared by the decoders, with lazy k-best extraction
// (Huang and Chiang's third algorithm).

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "desksmt/decoder.hpp"

namespace desksmt::decoder::detail {

struct HyperEdge {
  std::vector<int> tails;
  double score = 0;  // weighted, this edge only
  FeatureVector feats{};
  int payload = -1;
};

class Hypergraph {
 public:
  int add_node() {
    in_.emplace_back();
    return static_cast<int>(in_.size()) - 1;
  }
  void add_edge(int head, HyperEdge e) { in_.at(head).push_back(std::move(e)); }
  const std::vector<HyperEdge>& in(int v) const { return in_.at(v); }
  std::vector<HyperEdge>& mutable_in(int v) { return in_.at(v); }
  std::size_t size() const { return in_.size(); }

 private:
  std::vector<std::vector<HyperEdge>> in_;
};

struct DerivRef {
  int edge = -1;
  std::vector<int> ranks;
  double score = 0;
};

class KBest {
 public:
  explicit KBest(const Hypergraph& g) : g_(g), st_(g.size()) {}

  // k-th best derivation of node v (0-based), if it exists.
  std::optional<DerivRef> get(int v, std::size_t k) {
    fill(v, k);
    const auto& d = st_[v].done;
    if (k < d.size()) return d[k];
    return std::nullopt;
  }

  struct Tree {
    const HyperEdge* edge = nullptr;
    std::vector<Tree> kids;
    double score = 0;
  };

  Tree tree(int v, std::size_t k) {
    auto d = get(v, k);
    Tree t;
    if (!d) return t;
    const auto& e = g_.in(v)[d->edge];
    t.edge = &e;
    t.score = d->score;
    for (std::size_t i = 0; i < e.tails.size(); ++i) t.kids.push_back(tree(e.tails[i], d->ranks[i]));
    return t;
  }

 private:
  struct State {
    bool init = false;
    std::size_t expanded = 0;  // entries of `done` whose successors were pushed
    std::vector<DerivRef> done;
    std::vector<DerivRef> heap;
    std::set<std::pair<int, std::vector<int>>> seen;
  };

  static bool worse(const DerivRef& a, const DerivRef& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.edge != b.edge) return a.edge > b.edge;
    return a.ranks > b.ranks;
  }

  std::optional<double> candidate_score(int v, int edge, const std::vector<int>& ranks) {
    const auto& e = g_.in(v)[edge];
    double s = e.score;
    for (std::size_t i = 0; i < e.tails.size(); ++i) {
      auto d = get(e.tails[i], ranks[i]);
      if (!d) return std::nullopt;
      s += d->score;
    }
    return s;
  }

  void push(int v, int edge, std::vector<int> ranks) {
    if (st_[v].seen.count({edge, ranks})) return;
    auto s = candidate_score(v, edge, ranks);
    if (!s) return;
    State& st = st_[v];
    st.seen.insert({edge, ranks});
    st.heap.push_back({edge, std::move(ranks), *s});
    std::push_heap(st.heap.begin(), st.heap.end(), worse);
  }

  void fill(int v, std::size_t k) {
    if (!st_[v].init) {
      st_[v].init = true;
      const auto& edges = g_.in(v);
      for (std::size_t e = 0; e < edges.size(); ++e)
        push(v, static_cast<int>(e), std::vector<int>(edges[e].tails.size(), 0));
    }
    while (st_[v].done.size() <= k) {
      while (st_[v].expanded < st_[v].done.size()) {
        DerivRef last = st_[v].done[st_[v].expanded++];
        for (std::size_t i = 0; i < last.ranks.size(); ++i) {
          auto r = last.ranks;
          ++r[i];
          push(v, last.edge, std::move(r));
        }
      }
      State& st = st_[v];
      if (st.heap.empty()) break;
      std::pop_heap(st.heap.begin(), st.heap.end(), worse);
      st.done.push_back(std::move(st.heap.back()));
      st.heap.pop_back();
    }
  }

  const Hypergraph& g_;
  std::vector<State> st_;
};

// Keeps the `cap` best incoming edges of every node (by edge score plus
// best tail scores).
inline void trim_edges(Hypergraph& g, const std::vector<double>& best, std::size_t cap) {
  for (std::size_t v = 0; v < g.size(); ++v) {
    auto& edges = g.mutable_in(static_cast<int>(v));
    if (edges.size() <= cap) continue;
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      double s = edges[i].score;
      for (int t : edges[i].tails) s += best[t];
      order.push_back({s, i});
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    order.resize(cap);
    std::sort(order.begin(), order.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    std::vector<HyperEdge> kept;
    for (const auto& [s, i] : order) kept.push_back(std::move(edges[i]));
    edges = std::move(kept);
  }
}

// Sum of edge features along a derivation tree.
inline FeatureVector tree_features(const KBest::Tree& t) {
  FeatureVector f = t.edge ? t.edge->feats : FeatureVector{};
  for (const auto& k : t.kids) f += tree_features(k);
  return f;
}

// LM log10 of `ids` with contexts truncated at the start (no <s>).
double lm_inner(const lm::NGramModel& lm, const std::vector<lm::WordId>& ids);

// Collects up to `nbest` distinct target strings from the goal node, sorted
// by score (desc) then string; keeps pulling while scores tie.
template <typename Make>
std::vector<Translation> collect_nbest(KBest& kb, int goal, int nbest, Make make) {
  std::vector<Translation> out;
  std::set<std::string> seen;
  const std::size_t pull_limit = static_cast<std::size_t>(std::max(nbest, 1)) * 50 + 100;
  double last = 0;
  for (std::size_t k = 0; k < pull_limit; ++k) {
    auto d = kb.get(goal, k);
    if (!d) break;
    if (static_cast<int>(out.size()) >= nbest && d->score < last) break;
    Translation t = make(kb.tree(goal, k));
    std::string key = join(t.target);
    if (!seen.insert(key).second) continue;
    last = d->score;
    out.push_back(std::move(t));
  }
  std::stable_sort(out.begin(), out.end(), [](const Translation& a, const Translation& b) {
    if (a.score != b.score) return a.score > b.score;
    return join(a.target) < join(b.target);
  });
  if (static_cast<int>(out.size()) > nbest) out.resize(std::max(nbest, 1));
  return out;
}

// Orientation class of a phrase at [start, end] following one at
// [prev_start, prev_end]; 0 monotone, 1 swap, 2/3 discontinuous.
int orientation(int prev_start, int prev_end, int start, int end, phrasetab::OrientationSet set,
                bool backward);

// Boundary words of a partial target yield, enough to finish its LM score
// once context arrives.
struct LmState {
  std::vector<lm::WordId> left;   // first order-1 words
  std::vector<lm::WordId> right;  // last order-1 words
  std::size_t len = 0;

  std::string key() const;
};

// Joins `tgt` (terminals and child states by nonterminal index) and returns
// the LM score added on top of the children's own inner scores.
LmState combine_lm(const lm::NGramModel& lm, const std::vector<ruletab::Symbol>& tgt,
                   const std::vector<const LmState*>& kids, double& delta);
// Sentence boundary correction for a finished yield.
double finish_lm(const lm::NGramModel& lm, const LmState& s);

void check_rescore(double search_score, const FeatureVector& rescored, const FeatureWeights& w);

}  // namespace desksmt::decoder::detail
