#include "desksmt/phrasetab.hpp"

#include <algorithm>

#include "desksmt/error.hpp"

namespace desksmt::phrasetab {

namespace {

constexpr std::size_t kExtractShard = 64;

struct PairStats {
  double count = 0;
  std::map<LinkSet, double> alignments;
};

using PairKey = std::pair<std::string, std::string>;

Tokens slice(const Tokens& t, int a, int b) { return Tokens(t.begin() + a, t.begin() + b + 1); }

LinkSet local_links(const PhraseSpan& p, const LinkSet& links) {
  LinkSet out;
  for (const auto& [s, t] : links)
    if (s >= p.s1 && s <= p.s2 && t >= p.t1 && t <= p.t2) out.insert({s - p.s1, t - p.t1});
  return out;
}

std::vector<std::string> fields_of(std::string_view line) {
  auto parts = split_on(line, "|||");
  std::vector<std::string> out;
  for (auto& p : parts) out.emplace_back(trim(p));
  // A trailing "|||" leaves one empty field at the end.
  if (out.size() > 1 && out.back().empty()) out.pop_back();
  return out;
}

std::vector<double> parse_numbers(std::string_view field, std::string_view what) {
  std::vector<double> out;
  for (const auto& tok : split_ws(field)) out.push_back(parse_double(tok, what));
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

}  // namespace

std::vector<PhraseSpan> extract_phrases(int source_len, int target_len, const LinkSet& links,
                                        int max_len) {
  std::vector<PhraseSpan> out;
  if (max_len < 1) throw UsageError("max phrase length must be at least 1");
  std::vector<int> tgt_deg(target_len, 0);
  for (const auto& [s, t] : links) {
    if (s < 0 || s >= source_len || t < 0 || t >= target_len)
      throw DataError("alignment point " + std::to_string(s) + "-" + std::to_string(t) +
                      " outside the sentence pair");
    ++tgt_deg[t];
  }
  for (int s1 = 0; s1 < source_len; ++s1) {
    for (int s2 = s1; s2 < source_len && s2 - s1 < max_len; ++s2) {
      int tmin = target_len, tmax = -1;
      for (const auto& [s, t] : links) {
        if (s >= s1 && s <= s2) {
          tmin = std::min(tmin, t);
          tmax = std::max(tmax, t);
        }
      }
      if (tmax < 0 || tmax - tmin >= max_len) continue;
      bool consistent = true;
      for (const auto& [s, t] : links)
        if (t >= tmin && t <= tmax && (s < s1 || s > s2)) consistent = false;
      if (!consistent) continue;
      for (int t1 = tmin; t1 >= 0 && (t1 == tmin || tgt_deg[t1] == 0); --t1) {
        for (int t2 = tmax; t2 < target_len && (t2 == tmax || tgt_deg[t2] == 0); ++t2) {
          if (t2 - t1 >= max_len) break;
          out.push_back({s1, s2, t1, t2});
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::map<std::string, std::vector<std::size_t>> PhraseTable::by_source() const {
  std::map<std::string, std::vector<std::size_t>> idx;
  for (std::size_t i = 0; i < entries.size(); ++i) idx[join(entries[i].src)].push_back(i);
  return idx;
}

double lexical_weight(const Tokens& src, const Tokens& tgt, const LinkSet& a,
                      const align::AlignModel& model) {
  std::vector<std::vector<int>> sources(tgt.size());
  for (const auto& [s, t] : a) sources.at(t).push_back(s);
  double w = 1;
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    const corpus::WordId f = model.tgt_vocab.id_of(tgt[j]);
    if (sources[j].empty()) {
      w *= model.t.prob(corpus::Vocabulary::kNull, f);
      continue;
    }
    double sum = 0;
    for (int s : sources[j]) sum += model.t.prob(model.src_vocab.id_of(src.at(s)), f);
    w *= sum / static_cast<double>(sources[j].size());
  }
  return w;
}

PhraseTable build_phrase_table(const std::vector<corpus::SentencePair>& pairs,
                               const std::vector<LinkSet>& links, const align::AlignModel& forward,
                               const align::AlignModel& backward, const ExtractOptions& opt) {
  if (pairs.size() != links.size())
    throw DataError("alignment count " + std::to_string(links.size()) +
                    " does not match sentence pair count " + std::to_string(pairs.size()));
  using Stats = std::map<PairKey, PairStats>;
  std::vector<Stats> parts(shard_count(pairs.size(), kExtractShard));
  for_each_shard(pairs.size(), kExtractShard, opt.jobs,
                 [&](std::size_t shard, std::size_t b, std::size_t e) {
                   for (std::size_t n = b; n < e; ++n) {
                     const auto& p = pairs[n];
                     for (const auto& sp :
                          extract_phrases(static_cast<int>(p.source.size()),
                                          static_cast<int>(p.target.size()), links[n],
                                          opt.max_phrase_len)) {
                       PairKey k{join(slice(p.source, sp.s1, sp.s2)),
                                 join(slice(p.target, sp.t1, sp.t2))};
                       auto& st = parts[shard][k];
                       st.count += 1;
                       st.alignments[local_links(sp, links[n])] += 1;
                     }
                   }
                 });
  Stats all;
  for (auto& part : parts) {
    for (auto& [k, st] : part) {
      auto& dst = all[k];
      dst.count += st.count;
      for (auto& [a, c] : st.alignments) dst.alignments[a] += c;
    }
  }
  std::map<std::string, double> src_total, tgt_total;
  for (const auto& [k, st] : all) {
    src_total[k.first] += st.count;
    tgt_total[k.second] += st.count;
  }
  PhraseTable table;
  table.entries.reserve(all.size());
  for (const auto& [k, st] : all) {
    PhraseEntry e;
    e.src = split_ws(k.first);
    e.tgt = split_ws(k.second);
    // Most frequent internal alignment; the map order breaks ties.
    double best = -1;
    for (const auto& [a, c] : st.alignments) {
      if (c > best) {
        best = c;
        e.alignment = a;
      }
    }
    const double cs = src_total[k.first], ct = tgt_total[k.second];
    e.counts = {ct, cs, st.count};
    e.scores[kPhiSgivenT] = st.count / ct;
    e.scores[kPhiTgivenS] = st.count / cs;
    e.scores[kLexTgivenS] = lexical_weight(e.src, e.tgt, e.alignment, forward);
    e.scores[kLexSgivenT] = lexical_weight(e.tgt, e.src, align::transpose(e.alignment), backward);
    table.entries.push_back(std::move(e));
  }
  return table;
}

std::string format_entry(const PhraseEntry& e) {
  return join(e.src) + " ||| " + join(e.tgt) + " ||| " +
         format_numbers(e.scores.data(), e.scores.size()) + " ||| " +
         align::format_links(e.alignment) + " ||| " +
         format_numbers(e.counts.data(), e.counts.size());
}

PhraseEntry parse_entry(std::string_view line) {
  auto f = fields_of(line);
  if (f.size() < 3 || f.size() > 5)
    throw DataError("phrase table line needs 3 to 5 '|||' fields, got " + std::to_string(f.size()));
  PhraseEntry e;
  e.src = split_ws(f[0]);
  e.tgt = split_ws(f[1]);
  if (e.src.empty() || e.tgt.empty()) throw DataError("phrase table entry with an empty side");
  auto scores = parse_numbers(f[2], "phrase score");
  if (scores.size() != 4)
    throw DataError("phrase table entry needs 4 scores, got " + std::to_string(scores.size()));
  for (int i = 0; i < 4; ++i) {
    if (!(scores[i] > 0 && scores[i] <= 1))
      throw DataError("phrase score " + format_g(scores[i]) + " outside (0, 1]");
    e.scores[i] = scores[i];
  }
  if (f.size() >= 4) {
    e.alignment = align::parse_links(f[3]);
    for (const auto& [s, t] : e.alignment)
      if (s >= static_cast<int>(e.src.size()) || t >= static_cast<int>(e.tgt.size()))
        throw DataError("phrase alignment point escapes the phrase pair");
  }
  if (f.size() == 5) {
    auto c = parse_numbers(f[4], "phrase count");
    if (c.size() != 3)
      throw DataError("phrase table entry needs 3 counts, got " + std::to_string(c.size()));
    e.counts = {c[0], c[1], c[2]};
  }
  return e;
}

std::string write_phrase_table(const PhraseTable& t) {
  std::string out;
  for (const auto& e : t.entries) out += format_entry(e) + "\n";
  return out;
}

PhraseTable read_phrase_table(std::string_view text, std::string_view source) {
  PhraseTable t;
  std::size_t n = 0;
  for (const auto& line : split_on(text, "\n")) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      t.entries.push_back(parse_entry(line));
    } catch (const DataError& e) {
      throw DataError(std::string(source), n, e.what());
    }
  }
  std::stable_sort(t.entries.begin(), t.entries.end(), [](const auto& a, const auto& b) {
    auto sa = join(a.src), sb = join(b.src);
    if (sa != sb) return sa < sb;
    return join(a.tgt) < join(b.tgt);
  });
  return t;
}

// --- reordering -----------------------------------------------------------

OrientationSet parse_orientation_set(std::string_view name) {
  if (name == "msd") return OrientationSet::kMsd;
  if (name == "mslr") return OrientationSet::kMslr;
  throw UsageError("unknown orientation set '" + std::string(name) + "'");
}

int forward_orientation(const PhraseSpan& p, const LinkSet& links, int /*source_len*/,
                        OrientationSet set) {
  if (p.s1 == 0 && p.t1 == 0) return 0;
  if (links.count({p.s1 - 1, p.t1 - 1})) return 0;
  if (links.count({p.s2 + 1, p.t1 - 1})) return 1;
  if (set == OrientationSet::kMsd) return 2;
  for (const auto& [s, t] : links)
    if (s < p.s1 && t < p.t1) return 2;  // previous material lies to the left
  return 3;
}

int backward_orientation(const PhraseSpan& p, const LinkSet& links, int source_len,
                         int target_len, OrientationSet set) {
  if (p.s2 == source_len - 1 && p.t2 == target_len - 1) return 0;
  if (links.count({p.s2 + 1, p.t2 + 1})) return 0;
  if (links.count({p.s1 - 1, p.t2 + 1})) return 1;
  if (set == OrientationSet::kMsd) return 2;
  for (const auto& [s, t] : links)
    if (s > p.s2 && t > p.t2) return 3;  // following material lies to the right
  return 2;
}

const ReorderingEntry* ReorderingTable::find(const Tokens& src, const Tokens& tgt) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::make_pair(join(src), join(tgt)),
                             [](const ReorderingEntry& e, const PairKey& k) {
                               return std::make_pair(join(e.src), join(e.tgt)) < k;
                             });
  if (it != entries.end() && it->src == src && it->tgt == tgt) return &*it;
  return nullptr;
}

ReorderingTable extract_reordering(const std::vector<corpus::SentencePair>& pairs,
                                   const std::vector<LinkSet>& links,
                                   const ReorderingOptions& opt) {
  if (pairs.size() != links.size())
    throw DataError("alignment count does not match sentence pair count");
  ReorderingTable table;
  table.set = opt.set;
  table.bidirectional = opt.bidirectional;
  const std::size_t k = table.orientations();
  std::map<PairKey, std::pair<std::vector<double>, std::vector<double>>> counts;
  for (std::size_t n = 0; n < pairs.size(); ++n) {
    const auto& p = pairs[n];
    const int ls = static_cast<int>(p.source.size()), lt = static_cast<int>(p.target.size());
    for (const auto& sp : extract_phrases(ls, lt, links[n], opt.max_phrase_len)) {
      PairKey key{join(slice(p.source, sp.s1, sp.s2)), join(slice(p.target, sp.t1, sp.t2))};
      auto& c = counts[key];
      if (c.first.empty()) {
        c.first.assign(k, 0.0);
        c.second.assign(k, 0.0);
      }
      c.first[forward_orientation(sp, links[n], ls, opt.set)] += 1;
      c.second[backward_orientation(sp, links[n], ls, lt, opt.set)] += 1;
    }
  }
  auto smooth = [&](const std::vector<double>& c) {
    double total = 0;
    for (double v : c) total += v;
    std::vector<double> p(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
      p[i] = (c[i] + opt.sigma) / (total + opt.sigma * static_cast<double>(c.size()));
    return p;
  };
  for (const auto& [key, c] : counts) {
    ReorderingEntry e;
    e.src = split_ws(key.first);
    e.tgt = split_ws(key.second);
    e.forward = smooth(c.first);
    if (opt.bidirectional) e.backward = smooth(c.second);
    table.entries.push_back(std::move(e));
  }
  return table;
}

std::string write_reordering_table(const ReorderingTable& t) {
  std::string out;
  for (const auto& e : t.entries) {
    out += join(e.src) + " ||| " + join(e.tgt) + " ||| " +
           format_numbers(e.forward.data(), e.forward.size());
    if (!e.backward.empty()) out += " " + format_numbers(e.backward.data(), e.backward.size());
    out += "\n";
  }
  return out;
}

ReorderingTable read_reordering_table(std::string_view text, OrientationSet set,
                                      bool bidirectional) {
  ReorderingTable t;
  t.set = set;
  t.bidirectional = bidirectional;
  const std::size_t k = t.orientations();
  std::size_t n = 0;
  for (const auto& line : split_on(text, "\n")) {
    ++n;
    if (trim(line).empty()) continue;
    auto f = fields_of(line);
    if (f.size() != 3) throw DataError("<reordering>", n, "expected 3 '|||' fields");
    ReorderingEntry e;
    e.src = split_ws(f[0]);
    e.tgt = split_ws(f[1]);
    auto p = parse_numbers(f[2], "orientation probability");
    if (p.size() != (bidirectional ? 2 * k : k))
      throw DataError("<reordering>", n,
                      "expected " + std::to_string(bidirectional ? 2 * k : k) + " probabilities");
    e.forward.assign(p.begin(), p.begin() + k);
    if (bidirectional) e.backward.assign(p.begin() + k, p.end());
    t.entries.push_back(std::move(e));
  }
  std::sort(t.entries.begin(), t.entries.end(), [](const auto& a, const auto& b) {
    return std::make_pair(join(a.src), join(a.tgt)) < std::make_pair(join(b.src), join(b.tgt));
  });
  return t;
}

// --- factors --------------------------------------------------------------

double GenerationTable::prob(const std::string& from, const std::string& to) const {
  auto r = rows.find(from);
  if (r == rows.end()) return 0;
  auto c = r->second.find(to);
  return c == r->second.end() ? 0 : c->second;
}

GenerationTable build_generation_table(const std::vector<Tokens>& factored_corpus,
                                       std::size_t from_factor, std::size_t to_factor) {
  std::map<std::string, std::map<std::string, double>> counts;
  for (std::size_t n = 0; n < factored_corpus.size(); ++n) {
    for (std::size_t pos = 0; pos < factored_corpus[n].size(); ++pos) {
      auto tok = corpus::Token::parse(factored_corpus[n][pos]);
      if (from_factor >= tok.factors.size() || to_factor >= tok.factors.size())
        throw DataError("sentence " + std::to_string(n + 1) + ", token " + std::to_string(pos + 1) +
                        " ('" + factored_corpus[n][pos] + "') lacks factor " +
                        std::to_string(std::max(from_factor, to_factor)));
      counts[tok.factors[from_factor]][tok.factors[to_factor]] += 1;
    }
  }
  GenerationTable g;
  for (auto& [from, row] : counts) {
    double total = 0;
    for (auto& [to, c] : row) total += c;
    for (auto& [to, c] : row) g.rows[from][to] = c / total;
  }
  return g;
}

}  // namespace desksmt::phrasetab
