#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "desksmt/decoder.hpp"
#include "desksmt/error.hpp"
#include "hypergraph.hpp"

namespace desksmt::decoder {

using detail::HyperEdge;
using detail::Hypergraph;
using detail::KBest;
using detail::LmState;
using ruletab::RuleEntry;
using ruletab::Symbol;

ChartModels::ChartModels(const ruletab::RuleTable& rules, const lm::NGramModel& lm, int max_span)
    : lm_(&lm), max_span_(max_span), rules_(rules.entries) {
  bool has_glue = std::any_of(rules_.begin(), rules_.end(),
                              [](const RuleEntry& r) { return r.glue || r.lhs == "S"; });
  if (!has_glue)
    for (auto& g : ruletab::glue_rules()) rules_.push_back(std::move(g));
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& r = rules_[i];
    if (r.glue || r.lhs == "S") {
      glue_.push_back(&r);
      continue;
    }
    std::string first;
    for (const auto& s : r.src)
      if (!s.is_nt()) {
        first = s.text;
        break;
      }
    by_terminal_[first].push_back(i);
  }
}

std::vector<const RuleEntry*> ChartModels::candidates(const Tokens& sentence) const {
  std::set<std::string> words(sentence.begin(), sentence.end());
  std::vector<std::size_t> ids;
  auto consider = [&](const std::vector<std::size_t>& bucket) {
    for (std::size_t i : bucket) {
      bool ok = true;
      for (const auto& s : rules_[i].src)
        if (!s.is_nt() && !words.count(s.text)) {
          ok = false;
          break;
        }
      if (ok) ids.push_back(i);
    }
  };
  for (const auto& w : words)
    if (auto it = by_terminal_.find(w); it != by_terminal_.end()) consider(it->second);
  if (auto it = by_terminal_.find(""); it != by_terminal_.end()) consider(it->second);
  std::sort(ids.begin(), ids.end());
  std::vector<const RuleEntry*> out;
  for (std::size_t i : ids) out.push_back(&rules_[i]);
  return out;
}

namespace {

struct Item {
  LmState lm;
  double best = -std::numeric_limits<double>::infinity();
};

struct EdgeInfo {
  const RuleEntry* rule = nullptr;  // null: source word copied through
  std::string word;
  int b = 0, e = 0;
};

FeatureVector static_features(const RuleEntry& r) {
  FeatureVector f{};
  for (int i = 0; i < 4; ++i) f[kPhiSgivenT + i] = std::log10(r.scores[i]);
  if (r.glue || r.lhs == "S")
    f[kGlue] = 1;
  else
    f[kPhrasePenalty] = 1;
  for (const auto& s : r.tgt)
    if (!s.is_nt()) f[kWordPenalty] += 1;
  return f;
}

class Chart {
 public:
  Chart(const Tokens& sentence, const ChartModels& models, const FeatureWeights& w,
        const ChartConfig& cfg)
      : src_(sentence), m_(models), w_(w), cfg_(cfg), n_(static_cast<int>(sentence.size())) {}

  std::vector<Translation> run() {
    const auto cands = m_.candidates(src_);
    std::map<std::string, std::vector<const RuleEntry*>> by_first;  // "" when it starts with a nonterminal
    std::set<std::string> single;
    for (const auto* r : cands) {
      if (r->src.size() < 2 && (r->src.empty() || r->src[0].is_nt())) continue;
      by_first[r->src[0].is_nt() ? std::string() : r->src[0].text].push_back(r);
      if (r->src.size() == 1) single.insert(r->src[0].text);
    }
    for (int len = 1; len <= n_; ++len) {
      for (int b = 0; b + len <= n_; ++b) {
        const int e = b + len;
        if (len <= m_.max_span()) {
          for (const auto& key : {src_[b], std::string()}) {
            auto it = by_first.find(key);
            if (it == by_first.end()) continue;
            for (const auto* r : it->second) apply(*r, b, e);
          }
          if (len == 1 && !single.count(src_[b])) pass_through(b);
        }
        prune(b, e, "X");
        if (b == 0) {
          for (const auto* g : m_.glue()) apply(*g, b, e);
          prune(b, e, "S");
        }
      }
    }
    const auto* top = alive(0, n_, "S");
    if (!top || top->empty()) return {};
    const int goal = static_cast<int>(g_.add_node());
    items_.emplace_back();
    for (int v : *top) {
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
  using CellKey = std::tuple<int, int, std::string>;

  const std::vector<int>* alive(int b, int e, const std::string& label) const {
    auto it = cells_.find({b, e, label});
    return it == cells_.end() ? nullptr : &it->second;
  }

  void prune(int b, int e, const std::string& label) {
    auto it = cells_.find({b, e, label});
    if (it == cells_.end()) return;
    auto& v = it->second;
    std::stable_sort(v.begin(), v.end(), [&](int x, int y) { return items_[x].best > items_[y].best; });
    if (cfg_.cell_beam > 0 && static_cast<int>(v.size()) > cfg_.cell_beam) v.resize(cfg_.cell_beam);
    keys_.erase({b, e, label});
  }

  int node_for(int b, int e, const std::string& label, LmState st) {
    auto& m = keys_[{b, e, label}];
    auto [it, fresh] = m.try_emplace(st.key(), -1);
    if (fresh) {
      it->second = g_.add_node();
      items_.push_back({std::move(st), -std::numeric_limits<double>::infinity()});
      cells_[{b, e, label}].push_back(it->second);
    }
    return it->second;
  }

  void add(int b, int e, const std::string& lhs, const std::vector<Symbol>& tgt,
           const FeatureVector& stat, const std::vector<int>& tails, int payload) {
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
    int v = node_for(b, e, lhs, std::move(st));
    items_[v].best = std::max(items_[v].best, score + inside);
    g_.add_edge(v, HyperEdge{tails, score, f, payload});
  }

  void pass_through(int b) {
    static const std::string kX = "X";
    FeatureVector f{};
    f[kPhrasePenalty] = 1;
    f[kWordPenalty] = 1;
    f[kOov] = 1;
    int payload = static_cast<int>(info_.size());
    info_.push_back({nullptr, src_[b], b, b + 1});
    add(b, b + 1, kX, {{src_[b], -1}}, f, {}, payload);
  }

  void apply(const RuleEntry& r, int b, int e) {
    const int arity = r.arity();
    std::vector<std::pair<int, int>> spans(arity);
    std::vector<int> min_rest(r.src.size() + 1, 0);
    for (int i = static_cast<int>(r.src.size()) - 1; i >= 0; --i) min_rest[i] = min_rest[i + 1] + 1;
    const FeatureVector stat = static_features(r);
    std::function<void(std::size_t, int)> match = [&](std::size_t k, int pos) {
      if (k == r.src.size()) {
        if (pos == e) combine(r, b, e, spans, stat);
        return;
      }
      const Symbol& s = r.src[k];
      if (!s.is_nt()) {
        if (pos < e && src_[pos] == s.text) match(k + 1, pos + 1);
        return;
      }
      for (int q = pos + 1; q + min_rest[k + 1] <= e; ++q) {
        if (q - pos == e - b && s.text == r.lhs) continue;  // no unary cycles
        const auto* a = alive(pos, q, s.text);
        if (!a || a->empty()) continue;
        spans[s.nt] = {pos, q};
        match(k + 1, q);
      }
    };
    match(0, b);
  }

  void combine(const RuleEntry& r, int b, int e, const std::vector<std::pair<int, int>>& spans,
               const FeatureVector& stat) {
    std::vector<const std::vector<int>*> lists;
    for (int k = 0; k < static_cast<int>(spans.size()); ++k) {
      const std::string& label = label_of(r, k);
      lists.push_back(alive(spans[k].first, spans[k].second, label));
    }
    const int payload = static_cast<int>(info_.size());
    info_.push_back({&r, {}, b, e});
    std::vector<int> tails(spans.size());
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == spans.size()) {
        add(b, e, r.lhs, r.tgt, stat, tails, payload);
        return;
      }
      for (int v : *lists[k]) {
        tails[k] = v;
        rec(k + 1);
      }
    };
    rec(0);
  }

  static const std::string& label_of(const RuleEntry& r, int nt) {
    for (const auto& s : r.src)
      if (s.nt == nt) return s.text;
    throw InvariantError("rule nonterminal index out of range");
  }

  RuleApplication build(const KBest::Tree& t) const {
    const EdgeInfo& info = info_.at(t.edge->payload);
    RuleApplication a;
    a.span_begin = info.b;
    a.span_end = info.e;
    if (!info.rule) {
      a.lhs = "X";
      a.tgt = {{info.word, -1}};
      a.oov_words = 1;
      return a;
    }
    a.lhs = info.rule->lhs;
    a.tgt = info.rule->tgt;
    a.scores = info.rule->scores;
    a.glue = info.rule->glue || info.rule->lhs == "S";
    for (const auto& k : t.kids) a.children.push_back(build(k));
    return a;
  }

  const Tokens& src_;
  const ChartModels& m_;
  const FeatureWeights& w_;
  const ChartConfig& cfg_;
  const int n_;
  Hypergraph g_;
  std::vector<Item> items_;
  std::vector<EdgeInfo> info_;
  std::map<CellKey, std::vector<int>> cells_;
  std::map<CellKey, std::unordered_map<std::string, int>> keys_;
};

}  // namespace

std::vector<Translation> decode_chart(const Tokens& sentence, const ChartModels& models,
                                      const FeatureWeights& weights, const ChartConfig& config) {
  if (sentence.empty()) throw DataError("cannot decode an empty sentence");
  auto out = Chart(sentence, models, weights, config).run();
  if (out.empty()) throw InvariantError("chart search produced no goal item");
  return out;
}

}  // namespace desksmt::decoder
