#include "desksmt/ruletab.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "desksmt/error.hpp"
#include "desksmt/phrasetab.hpp"

namespace desksmt::ruletab {

namespace {

constexpr std::size_t kRuleShard = 32;

using phrasetab::PhraseSpan;

std::string nt_token(const std::string& label) { return "[" + label + "][" + label + "]"; }

std::string side_string(const std::vector<Symbol>& syms) {
  std::string out;
  for (const auto& s : syms) {
    if (!out.empty()) out += ' ';
    out += s.is_nt() ? nt_token(s.text) : s.text;
  }
  return out;
}

bool inside(const PhraseSpan& outer, const PhraseSpan& in) {
  return in.s1 >= outer.s1 && in.s2 <= outer.s2 && in.t1 >= outer.t1 && in.t2 <= outer.t2;
}

bool disjoint(const PhraseSpan& a, const PhraseSpan& b) {
  return (a.s2 < b.s1 || b.s2 < a.s1) && (a.t2 < b.t1 || b.t2 < a.t1);
}

std::vector<std::string> fields_of(std::string_view line) {
  auto parts = split_on(line, "|||");
  std::vector<std::string> out;
  for (auto& p : parts) out.emplace_back(trim(p));
  if (out.size() > 1 && out.back().empty()) out.pop_back();
  return out;
}

std::string format_numbers(const double* v, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += format_g(v[i]);
  }
  return out;
}

std::vector<double> parse_numbers(std::string_view field, std::string_view what) {
  std::vector<double> out;
  for (const auto& tok : split_ws(field)) out.push_back(parse_double(tok, what));
  return out;
}

// lex(t|s) over terminals only.
double rule_lexical_weight(const std::vector<Symbol>& src, const std::vector<Symbol>& tgt,
                           const LinkSet& a, const align::AlignModel& model) {
  std::vector<std::vector<int>> sources(tgt.size());
  for (const auto& [s, t] : a)
    if (!src.at(s).is_nt() && !tgt.at(t).is_nt()) sources[t].push_back(s);
  double w = 1;
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    if (tgt[j].is_nt()) continue;
    const auto f = model.tgt_vocab.id_of(tgt[j].text);
    if (sources[j].empty()) {
      w *= model.t.prob(corpus::Vocabulary::kNull, f);
      continue;
    }
    double sum = 0;
    for (int s : sources[j]) sum += model.t.prob(model.src_vocab.id_of(src[s].text), f);
    w *= sum / static_cast<double>(sources[j].size());
  }
  return w;
}

LinkSet transpose(const LinkSet& a) { return align::transpose(a); }

}  // namespace

int RuleEntry::arity() const {
  int n = 0;
  for (const auto& s : src) n += s.is_nt();
  return n;
}

int RuleEntry::terminal_count() const {
  int n = 0;
  for (const auto& s : src) n += !s.is_nt();
  return n;
}

std::vector<int> RuleEntry::nt_target_positions() const {
  std::vector<int> pos(arity(), -1);
  for (std::size_t j = 0; j < tgt.size(); ++j)
    if (tgt[j].is_nt()) pos.at(tgt[j].nt) = static_cast<int>(j);
  return pos;
}

std::vector<RuleEntry> extract_hier_rules(const Tokens& source, const Tokens& target,
                                          const LinkSet& links, const HierConfig& cfg) {
  const auto phrases = phrasetab::extract_phrases(static_cast<int>(source.size()),
                                                  static_cast<int>(target.size()), links,
                                                  cfg.max_span);
  std::vector<RuleEntry> out;
  std::set<std::pair<std::string, std::string>> seen;

  auto emit = [&](const PhraseSpan& p, const std::vector<PhraseSpan>& holes) {
    RuleEntry r;
    std::vector<int> src_pos(source.size(), -1), tgt_pos(target.size(), -1);
    std::vector<int> nt_src(holes.size()), nt_tgt(holes.size());
    for (int s = p.s1; s <= p.s2; ++s) {
      bool hole = false;
      for (std::size_t k = 0; k < holes.size(); ++k) {
        if (s == holes[k].s1) {
          nt_src[k] = static_cast<int>(r.src.size());
          r.src.push_back({"X", static_cast<int>(k)});
          s = holes[k].s2;
          hole = true;
          break;
        }
      }
      if (hole) continue;
      src_pos[s] = static_cast<int>(r.src.size());
      r.src.push_back({source[s], -1});
    }
    if (static_cast<int>(r.src.size()) > cfg.max_src_symbols) return;
    if (r.terminal_count() == 0) return;
    for (std::size_t i = 1; i < r.src.size(); ++i)
      if (r.src[i].is_nt() && r.src[i - 1].is_nt()) return;
    for (int t = p.t1; t <= p.t2; ++t) {
      bool hole = false;
      for (std::size_t k = 0; k < holes.size(); ++k) {
        if (t == holes[k].t1) {
          nt_tgt[k] = static_cast<int>(r.tgt.size());
          r.tgt.push_back({"X", static_cast<int>(k)});
          t = holes[k].t2;
          hole = true;
          break;
        }
      }
      if (hole) continue;
      tgt_pos[t] = static_cast<int>(r.tgt.size());
      r.tgt.push_back({target[t], -1});
    }
    for (const auto& [s, t] : links)
      if (s >= p.s1 && s <= p.s2 && src_pos[s] >= 0 && t >= p.t1 && t <= p.t2 && tgt_pos[t] >= 0)
        r.alignment.insert({src_pos[s], tgt_pos[t]});
    for (std::size_t k = 0; k < holes.size(); ++k) r.alignment.insert({nt_src[k], nt_tgt[k]});
    if (!seen.insert({side_string(r.src), side_string(r.tgt)}).second) return;
    r.counts = {1, 1, 1};
    out.push_back(std::move(r));
  };

  for (const auto& p : phrases) {
    std::vector<PhraseSpan> subs;
    for (const auto& q : phrases)
      if (q != p && inside(p, q)) subs.push_back(q);
    emit(p, {});
    if (cfg.max_nt < 1) continue;
    for (std::size_t a = 0; a < subs.size(); ++a) {
      emit(p, {subs[a]});
      if (cfg.max_nt < 2) continue;
      for (std::size_t b = a + 1; b < subs.size(); ++b) {
        if (!disjoint(subs[a], subs[b])) continue;
        const auto& first = subs[a].s1 < subs[b].s1 ? subs[a] : subs[b];
        const auto& second = subs[a].s1 < subs[b].s1 ? subs[b] : subs[a];
        emit(p, {first, second});
      }
    }
  }
  return out;
}

std::vector<RuleEntry> glue_rules() {
  RuleEntry top;
  top.lhs = "S";
  top.glue = true;
  top.src = {{"X", 0}};
  top.tgt = {{"X", 0}};
  top.alignment = {{0, 0}};
  top.counts = {1, 1, 1};
  RuleEntry cat;
  cat.lhs = "S";
  cat.glue = true;
  cat.src = {{"S", 0}, {"X", 1}};
  cat.tgt = {{"S", 0}, {"X", 1}};
  cat.alignment = {{0, 0}, {1, 1}};
  cat.counts = {1, 1, 1};
  return {top, cat};
}

RuleTable build_rule_table(const std::vector<corpus::SentencePair>& pairs,
                           const std::vector<LinkSet>& links, const align::AlignModel& forward,
                           const align::AlignModel& backward, const HierConfig& cfg) {
  if (pairs.size() != links.size())
    throw DataError("alignment count does not match sentence pair count");
  std::vector<std::vector<RuleEntry>> per(pairs.size());
  for_each_shard(pairs.size(), kRuleShard, cfg.jobs, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n)
      per[n] = extract_hier_rules(pairs[n].source, pairs[n].target, links[n], cfg);
  });
  struct Agg {
    RuleEntry proto;
    double count = 0;
    std::map<LinkSet, double> alignments;
  };
  std::map<std::pair<std::string, std::string>, Agg> all;
  for (auto& rules : per) {
    for (auto& r : rules) {
      auto& a = all[{format_src_side(r), format_tgt_side(r)}];
      if (a.count == 0) a.proto = r;
      a.count += 1;
      a.alignments[r.alignment] += 1;
    }
  }
  std::map<std::string, double> src_total, tgt_total;
  for (const auto& [k, a] : all) {
    src_total[k.first] += a.count;
    tgt_total[k.second] += a.count;
  }
  RuleTable t;
  for (auto& [k, a] : all) {
    RuleEntry r = std::move(a.proto);
    double best = -1;
    for (const auto& [al, c] : a.alignments)
      if (c > best) {
        best = c;
        r.alignment = al;
      }
    const double cs = src_total[k.first], ct = tgt_total[k.second];
    r.counts = {ct, cs, a.count};
    r.scores[phrasetab::kPhiSgivenT] = a.count / ct;
    r.scores[phrasetab::kPhiTgivenS] = a.count / cs;
    r.scores[phrasetab::kLexTgivenS] = rule_lexical_weight(r.src, r.tgt, r.alignment, forward);
    r.scores[phrasetab::kLexSgivenT] =
        rule_lexical_weight(r.tgt, r.src, transpose(r.alignment), backward);
    t.entries.push_back(std::move(r));
  }
  return t;
}

std::string format_src_side(const RuleEntry& r) { return side_string(r.src) + " [" + r.lhs + "]"; }
std::string format_tgt_side(const RuleEntry& r) { return side_string(r.tgt) + " [" + r.lhs + "]"; }

std::string format_rule(const RuleEntry& r) {
  return format_src_side(r) + " ||| " + format_tgt_side(r) + " ||| " +
         format_numbers(r.scores.data(), r.scores.size()) + " ||| " +
         align::format_links(r.alignment) + " ||| " +
         format_numbers(r.counts.data(), r.counts.size());
}

namespace {

// "[A][B]" -> "A"; "[A]" -> lhs marker.
std::optional<std::string> nt_label(std::string_view tok) {
  if (tok.size() < 6 || tok.front() != '[' || tok.back() != ']') return std::nullopt;
  auto mid = tok.find("][");
  if (mid == std::string_view::npos) return std::nullopt;
  return std::string(tok.substr(1, mid - 1));
}

std::pair<std::string, std::vector<Symbol>> parse_side(std::string_view field) {
  auto toks = split_ws(field);
  if (toks.empty()) throw DataError("empty rule side");
  const auto& last = toks.back();
  if (last.size() < 3 || last.front() != '[' || last.back() != ']' ||
      last.find("][") != std::string::npos)
    throw DataError("rule side must end with a [LHS] marker: '" + std::string(field) + "'");
  std::string lhs = last.substr(1, last.size() - 2);
  std::vector<Symbol> syms;
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    if (auto l = nt_label(toks[i]))
      syms.push_back({*l, 0});
    else
      syms.push_back({toks[i], -1});
  }
  return {lhs, syms};
}

}  // namespace

RuleEntry parse_rule(std::string_view line) {
  auto f = fields_of(line);
  if (f.size() < 3 || f.size() > 5)
    throw DataError("rule line needs 3 to 5 '|||' fields, got " + std::to_string(f.size()));
  RuleEntry r;
  auto [lhs_s, src] = parse_side(f[0]);
  auto [lhs_t, tgt] = parse_side(f[1]);
  if (lhs_s != lhs_t) throw DataError("rule sides disagree on LHS: " + lhs_s + " vs " + lhs_t);
  r.lhs = lhs_s;
  r.src = std::move(src);
  r.tgt = std::move(tgt);
  auto scores = parse_numbers(f[2], "rule score");
  if (scores.size() != 4)
    throw DataError("rule needs 4 scores, got " + std::to_string(scores.size()));
  std::copy(scores.begin(), scores.end(), r.scores.begin());
  if (f.size() >= 4) r.alignment = align::parse_links(f[3]);
  if (f.size() == 5) {
    auto c = parse_numbers(f[4], "rule count");
    if (c.size() != 3) throw DataError("rule needs 3 counts");
    r.counts = {c[0], c[1], c[2]};
  }
  for (const auto& [s, t] : r.alignment)
    if (s >= static_cast<int>(r.src.size()) || t >= static_cast<int>(r.tgt.size()))
      throw DataError("rule alignment point outside the rule");
  // Co-index nonterminals: source order, target via nonterminal links (or
  // order when none are given).
  std::vector<int> src_nts, tgt_nts;
  for (std::size_t i = 0; i < r.src.size(); ++i)
    if (r.src[i].is_nt()) {
      r.src[i].nt = static_cast<int>(src_nts.size());
      src_nts.push_back(static_cast<int>(i));
    }
  for (std::size_t j = 0; j < r.tgt.size(); ++j)
    if (r.tgt[j].is_nt()) {
      r.tgt[j].nt = -2;
      tgt_nts.push_back(static_cast<int>(j));
    }
  if (src_nts.size() != tgt_nts.size())
    throw DataError("rule has " + std::to_string(src_nts.size()) + " source but " +
                    std::to_string(tgt_nts.size()) + " target nonterminals");
  bool linked = false;
  for (const auto& [s, t] : r.alignment) {
    if (r.src[s].is_nt() != (r.tgt[t].nt == -2 || r.tgt[t].is_nt())) {
      throw DataError("alignment links a nonterminal to a terminal");
    }
    if (r.src[s].is_nt()) {
      if (r.tgt[t].is_nt()) throw DataError("target nonterminal linked twice");
      r.tgt[t].nt = r.src[s].nt;
      linked = true;
    }
  }
  if (!linked) {
    for (std::size_t k = 0; k < tgt_nts.size(); ++k) r.tgt[tgt_nts[k]].nt = static_cast<int>(k);
  }
  for (const auto& s : r.tgt)
    if (s.nt == -2) throw DataError("target nonterminal without a source counterpart");
  for (int k = 0; k < static_cast<int>(src_nts.size()); ++k)
    if (r.src[src_nts[k]].text != r.tgt[r.nt_target_positions()[k]].text)
      throw DataError("co-indexed nonterminals carry different labels");
  r.glue = r.lhs == "S";
  if (!linked)
    for (int k = 0; k < static_cast<int>(src_nts.size()); ++k)
      r.alignment.insert({src_nts[k], r.nt_target_positions()[k]});
  return r;
}

std::string write_rule_table(const RuleTable& t) {
  std::string out;
  for (const auto& r : t.entries) out += format_rule(r) + "\n";
  return out;
}

RuleTable read_rule_table(std::string_view text, std::string_view source) {
  RuleTable t;
  std::size_t n = 0;
  for (const auto& line : split_on(text, "\n")) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      t.entries.push_back(parse_rule(line));
    } catch (const DataError& e) {
      throw DataError(std::string(source), n, e.what());
    }
  }
  return t;
}

// --- tree-to-string -------------------------------------------------------

int TreeRule::arity() const {
  int n = 0;
  for (const auto& s : tgt) n += s.is_nt();
  return n;
}

deptree::BracketTree dependency_bracket_tree(const deptree::DepSentence& s) {
  const auto ch = s.children();
  std::function<deptree::BracketTree(int, bool)> build = [&](int id, bool top) {
    const auto& t = s.tokens[id - 1];
    deptree::BracketTree n;
    n.label = top ? "root" : t.deprel;
    deptree::BracketTree leaf;
    leaf.label = t.xpos != "_" ? t.xpos : t.upos;
    leaf.word = t.form;
    bool placed = false;
    for (int c : ch[id]) {
      if (!placed && c > id) {
        n.children.push_back(leaf);
        placed = true;
      }
      n.children.push_back(build(c, false));
    }
    if (!placed) n.children.push_back(leaf);
    return n;
  };
  return build(s.root(), true);
}

TreeExtraction extract_tree_rules(const deptree::DepSentence& tree, const Tokens& target,
                                  const LinkSet& links) {
  TreeExtraction out;
  deptree::validate_tree(tree);
  if (auto cross = deptree::find_crossing(tree)) {
    out.warnings.push_back("sentence " + (tree.sent_id.empty() ? std::string("?") : tree.sent_id) +
                           " skipped: non-projective (arcs " + std::to_string(cross->first.dependent) +
                           "->" + std::to_string(cross->first.head) + " and " +
                           std::to_string(cross->second.dependent) + "->" +
                           std::to_string(cross->second.head) + " cross)");
    return out;
  }
  const int n = static_cast<int>(tree.tokens.size());
  const int lt = static_cast<int>(target.size());
  for (const auto& [s, t] : links)
    if (s < 0 || s >= n || t < 0 || t >= lt)
      throw DataError("alignment point " + std::to_string(s) + "-" + std::to_string(t) +
                      " outside the sentence pair");
  const auto ch = tree.children();
  const int root = tree.root();

  // in_subtree[v][u]: token u (1-based) lies under v.
  std::vector<std::vector<char>> in_sub(n + 1, std::vector<char>(n + 1, 0));
  std::function<void(int, int)> mark = [&](int top, int u) {
    in_sub[top][u] = 1;
    for (int c : ch[u]) mark(top, c);
  };
  for (int v = 1; v <= n; ++v) mark(v, v);

  std::vector<int> lo(n + 1, lt), hi(n + 1, -1);
  std::vector<char> frontier(n + 1, 0);
  for (int v = 1; v <= n; ++v) {
    std::vector<char> outside(std::max(lt, 0), 0);
    for (const auto& [s, t] : links) {
      if (in_sub[v][s + 1]) {
        lo[v] = std::min(lo[v], t);
        hi[v] = std::max(hi[v], t);
      } else {
        outside[t] = 1;
      }
    }
    if (v == root && lt > 0) {
      lo[v] = 0;
      hi[v] = lt - 1;
    }
    if (hi[v] < 0) continue;
    bool ok = true;
    for (int t = lo[v]; t <= hi[v]; ++t)
      if (outside[t]) ok = false;
    frontier[v] = ok;
  }

  for (int v = 1; v <= n; ++v) {
    if (!frontier[v]) continue;
    TreeRule r;
    std::vector<int> vars;     // token ids of frontier children
    std::vector<int> leafseq;  // token id, or -(k+1) for variable k
    std::function<deptree::BracketTree(int)> expand = [&](int u) {
      const auto& tok = tree.tokens[u - 1];
      deptree::BracketTree node;
      node.label = u == root ? "root" : tok.deprel;
      auto add_head = [&] {
        deptree::BracketTree leaf;
        leaf.label = tok.xpos != "_" ? tok.xpos : tok.upos;
        leaf.word = tok.form;
        node.children.push_back(leaf);
        leafseq.push_back(u);
      };
      bool placed = false;
      for (int c : ch[u]) {
        if (!placed && c > u) {
          add_head();
          placed = true;
        }
        if (frontier[c]) {
          deptree::BracketTree var;
          var.label = tree.tokens[c - 1].deprel;
          node.children.push_back(var);
          leafseq.push_back(-static_cast<int>(vars.size()) - 1);
          vars.push_back(c);
        } else {
          node.children.push_back(expand(c));
        }
      }
      if (!placed) add_head();
      return node;
    };
    r.fragment = expand(v);

    std::vector<int> tgt_pos(lt, -1);
    std::vector<int> var_tgt(vars.size(), -1);
    for (int t = lo[v]; t <= hi[v]; ++t) {
      int owner = -1;
      for (std::size_t k = 0; k < vars.size(); ++k)
        if (t >= lo[vars[k]] && t <= hi[vars[k]]) owner = static_cast<int>(k);
      if (owner >= 0) {
        if (t == lo[vars[owner]]) {
          var_tgt[owner] = static_cast<int>(r.tgt.size());
          r.tgt.push_back({tree.tokens[vars[owner] - 1].deprel, owner});
        }
        continue;
      }
      tgt_pos[t] = static_cast<int>(r.tgt.size());
      r.tgt.push_back({target[t], -1});
    }
    for (int pos = 0; pos < static_cast<int>(leafseq.size()); ++pos) {
      int id = leafseq[pos];
      if (id < 0) {
        r.alignment.insert({pos, var_tgt[-id - 1]});
        continue;
      }
      for (const auto& [s, t] : links)
        if (s + 1 == id && t >= lo[v] && t <= hi[v] && tgt_pos[t] >= 0)
          r.alignment.insert({pos, tgt_pos[t]});
    }
    r.counts = {1, 1, 1};
    out.rules.push_back(std::move(r));
  }
  return out;
}

std::string format_tree_target(const TreeRule& r) {
  std::string out;
  for (const auto& s : r.tgt) {
    if (!out.empty()) out += ' ';
    out += s.is_nt() ? "[x" + std::to_string(s.nt) + "]" : s.text;
  }
  return out;
}

TreeRuleTable build_tree_rule_table(const std::vector<deptree::DepSentence>& trees,
                                    const std::vector<Tokens>& targets,
                                    const std::vector<LinkSet>& links) {
  if (trees.size() != targets.size() || trees.size() != links.size())
    throw DataError("tree, target and alignment counts differ");
  struct Agg {
    TreeRule proto;
    double count = 0;
    std::map<LinkSet, double> alignments;
  };
  std::map<std::pair<std::string, std::string>, Agg> all;
  TreeRuleTable table;
  for (std::size_t n = 0; n < trees.size(); ++n) {
    auto ex = extract_tree_rules(trees[n], targets[n], links[n]);
    for (auto& w : ex.warnings) table.warnings.push_back(std::move(w));
    for (auto& r : ex.rules) {
      auto& a = all[{deptree::write_nested_tree(r.fragment), format_tree_target(r)}];
      if (a.count == 0) a.proto = r;
      a.count += 1;
      a.alignments[r.alignment] += 1;
    }
  }
  std::map<std::string, double> frag_total, label_total;
  for (const auto& [k, a] : all) {
    frag_total[k.first] += a.count;
    label_total[a.proto.root_label()] += a.count;
  }
  for (auto& [k, a] : all) {
    TreeRule r = std::move(a.proto);
    double best = -1;
    for (const auto& [al, c] : a.alignments)
      if (c > best) {
        best = c;
        r.alignment = al;
      }
    const double cl = label_total[r.root_label()], cf = frag_total[k.first];
    r.counts = {cl, cf, a.count};
    r.scores = {a.count / cl, 1, a.count / cf, 1};
    table.entries.push_back(std::move(r));
  }
  return table;
}

std::string format_tree_rule(const TreeRule& r) {
  return deptree::write_nested_tree(r.fragment) + " ||| " + format_tree_target(r) + " ||| " +
         format_numbers(r.scores.data(), r.scores.size()) + " ||| " +
         align::format_links(r.alignment) + " ||| " +
         format_numbers(r.counts.data(), r.counts.size());
}

TreeRule parse_tree_rule(std::string_view line) {
  auto f = fields_of(line);
  if (f.size() < 3 || f.size() > 5)
    throw DataError("tree rule line needs 3 to 5 '|||' fields, got " + std::to_string(f.size()));
  TreeRule r;
  r.fragment = deptree::parse_nested_tree(f[0]);
  std::vector<std::string> var_labels;
  std::function<void(const deptree::BracketTree&)> walk = [&](const deptree::BracketTree& n) {
    if (n.is_variable()) var_labels.push_back(n.label);
    for (const auto& c : n.children) walk(c);
  };
  walk(r.fragment);
  std::vector<int> used(var_labels.size(), 0);
  for (const auto& tok : split_ws(f[1])) {
    if (tok.size() > 3 && tok.rfind("[x", 0) == 0 && tok.back() == ']') {
      int k = static_cast<int>(parse_int(std::string_view(tok).substr(2, tok.size() - 3), "variable"));
      if (k < 0 || k >= static_cast<int>(var_labels.size()))
        throw DataError("target variable " + tok + " has no source counterpart");
      ++used[k];
      r.tgt.push_back({var_labels[k], k});
    } else {
      r.tgt.push_back({tok, -1});
    }
  }
  for (std::size_t k = 0; k < used.size(); ++k)
    if (used[k] != 1)
      throw DataError("variable x" + std::to_string(k) + " appears " + std::to_string(used[k]) +
                      " times on the target side");
  auto scores = parse_numbers(f[2], "tree rule score");
  if (scores.size() != 4) throw DataError("tree rule needs 4 scores");
  std::copy(scores.begin(), scores.end(), r.scores.begin());
  if (f.size() >= 4) r.alignment = align::parse_links(f[3]);
  if (f.size() == 5) {
    auto c = parse_numbers(f[4], "tree rule count");
    if (c.size() != 3) throw DataError("tree rule needs 3 counts");
    r.counts = {c[0], c[1], c[2]};
  }
  return r;
}

std::string write_tree_rule_table(const TreeRuleTable& t) {
  std::string out;
  for (const auto& r : t.entries) out += format_tree_rule(r) + "\n";
  return out;
}

TreeRuleTable read_tree_rule_table(std::string_view text, std::string_view source) {
  TreeRuleTable t;
  std::size_t n = 0;
  for (const auto& line : split_on(text, "\n")) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      t.entries.push_back(parse_tree_rule(line));
    } catch (const DataError& e) {
      throw DataError(std::string(source), n, e.what());
    }
  }
  return t;
}

}  // namespace desksmt::ruletab
