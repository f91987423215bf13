#include "desksmt/align.hpp"

#include <algorithm>
#include <cmath>

#include "desksmt/error.hpp"

namespace desksmt::align {

namespace {

constexpr std::size_t kEmShard = 64;
using Vocab = corpus::Vocabulary;

struct Counts {
  std::unordered_map<std::uint64_t, double> joint;  // (e,f)
  std::unordered_map<WordId, double> total;         // e
  std::map<std::pair<int, int>, std::vector<double>> dist;  // (lf,le) -> [j*(le+1)+i]
  double loglik = 0;
};

std::uint64_t pack(WordId e, WordId f) { return (static_cast<std::uint64_t>(e) << 32) | f; }

void check_options(const std::vector<corpus::SentencePair>& pairs, const EmOptions& opt) {
  if (opt.iterations < 1) throw UsageError("EM needs at least one iteration");
  if (pairs.empty()) throw DataError("cannot train alignments on an empty corpus");
}

std::vector<IdPair> to_ids(const AlignModel& m, const std::vector<corpus::SentencePair>& pairs) {
  std::vector<IdPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(m.ids(p, true));
  return out;
}

// One EM pass: E-step over shards, reduced in shard order, then M-step.
void em_iteration(AlignModel& m, const std::vector<IdPair>& data, bool model2, int jobs) {
  const std::size_t nshards = shard_count(data.size(), kEmShard);
  std::vector<Counts> parts(nshards);
  for_each_shard(data.size(), kEmShard, jobs, [&](std::size_t shard, std::size_t b, std::size_t e) {
    Counts& c = parts[shard];
    std::vector<double> w;
    for (std::size_t n = b; n < e; ++n) {
      const auto& src = data[n].source;
      const auto& tgt = data[n].target;
      const int le = static_cast<int>(src.size()) - 1;
      const int lf = static_cast<int>(tgt.size());
      std::vector<double>* dist = nullptr;
      if (model2) {
        auto& d = c.dist[{lf, le}];
        if (d.empty()) d.assign(static_cast<std::size_t>(lf) * (le + 1), 0.0);
        dist = &d;
      }
      w.resize(src.size());
      for (int j = 0; j < lf; ++j) {
        double denom = 0;
        for (int i = 0; i <= le; ++i) {
          double v = m.t.raw(src[i], tgt[j]);
          if (model2) v *= m.a.prob(i, j, lf, le);
          w[i] = v;
          denom += v;
        }
        if (denom <= 0) throw InvariantError("zero alignment mass during EM");
        c.loglik += std::log(denom);
        for (int i = 0; i <= le; ++i) {
          double p = w[i] / denom;
          c.joint[pack(src[i], tgt[j])] += p;
          c.total[src[i]] += p;
          if (model2) (*dist)[static_cast<std::size_t>(j) * (le + 1) + i] += p;
        }
      }
      if (!model2) c.loglik -= lf * std::log(static_cast<double>(le + 1));
    }
  });

  Counts all;
  for (auto& p : parts) {
    all.loglik += p.loglik;
    for (auto& [k, v] : p.joint) all.joint[k] += v;
    for (auto& [k, v] : p.total) all.total[k] += v;
    for (auto& [k, v] : p.dist) {
      auto& d = all.dist[k];
      if (d.empty()) d.assign(v.size(), 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) d[i] += v[i];
    }
  }
  m.log_likelihoods.push_back(all.loglik);

  TTable t;
  for (const auto& [k, v] : all.joint) {
    WordId e = static_cast<WordId>(k >> 32);
    WordId f = static_cast<WordId>(k & 0xffffffffu);
    t.set(e, f, v / all.total.at(e));
  }
  m.t = std::move(t);
  if (model2) {
    for (const auto& [len, d] : all.dist) {
      auto [lf, le] = len;
      for (int j = 0; j < lf; ++j) {
        double sum = 0;
        for (int i = 0; i <= le; ++i) sum += d[static_cast<std::size_t>(j) * (le + 1) + i];
        for (int i = 0; i <= le; ++i)
          m.a.set(i, j, lf, le, d[static_cast<std::size_t>(j) * (le + 1) + i] / sum);
      }
    }
  }
}

void run_em(AlignModel& m, const std::vector<IdPair>& data, bool model2, const EmOptions& opt) {
  for (int it = 0; it < opt.iterations; ++it) {
    em_iteration(m, data, model2, opt.jobs);
    const auto& ll = m.log_likelihoods;
    if (ll.size() >= 2 && ll[ll.size() - 1] - ll[ll.size() - 2] < opt.epsilon) break;
  }
}

}  // namespace

double TTable::raw(WordId e, WordId f) const {
  auto it = t_.find(key(e, f));
  return it == t_.end() ? 0.0 : it->second;
}

double TTable::prob(WordId e, WordId f) const { return std::max(raw(e, f), kProbFloor); }

void TTable::set(WordId e, WordId f, double p) { t_[key(e, f)] = p; }

std::vector<std::pair<WordId, double>> TTable::row(WordId e) const {
  std::vector<std::pair<WordId, double>> out;
  for (const auto& [k, v] : t_)
    if (static_cast<WordId>(k >> 32) == e) out.emplace_back(static_cast<WordId>(k & 0xffffffffu), v);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<WordId> TTable::sources() const {
  std::set<WordId> s;
  for (const auto& [k, v] : t_) s.insert(static_cast<WordId>(k >> 32));
  return {s.begin(), s.end()};
}

double DistortionTable::prob(int i, int j, int lf, int le) const {
  auto it = a_.find({lf, le});
  if (it == a_.end() || j >= lf || i > le) return 1.0 / (le + 1);
  return it->second[static_cast<std::size_t>(j) * (le + 1) + i];
}

void DistortionTable::set(int i, int j, int lf, int le, double p) {
  ensure(lf, le);
  a_[{lf, le}][static_cast<std::size_t>(j) * (le + 1) + i] = p;
}

void DistortionTable::ensure(int lf, int le) {
  auto& d = a_[{lf, le}];
  if (d.empty()) d.assign(static_cast<std::size_t>(lf) * (le + 1), 1.0 / (le + 1));
}

std::vector<std::pair<int, int>> DistortionTable::length_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& [k, v] : a_) out.push_back(k);
  return out;
}

IdPair AlignModel::ids(const corpus::SentencePair& p, bool strict) const {
  IdPair out;
  out.source.push_back(Vocab::kNull);
  auto look = [&](const corpus::Vocabulary& v, const std::string& w, const char* side) {
    auto id = v.find(w);
    if (!id) {
      if (strict)
        throw DataError(std::string("vocabulary mismatch: ") + side + " word '" + w +
                        "' unknown to the alignment model");
      return Vocab::kUnk;
    }
    return *id;
  };
  for (const auto& w : p.source) out.source.push_back(look(src_vocab, w, "source"));
  for (const auto& w : p.target) out.target.push_back(look(tgt_vocab, w, "target"));
  return out;
}

AlignModel train_ibm1(const std::vector<corpus::SentencePair>& pairs, const EmOptions& opt) {
  check_options(pairs, opt);
  AlignModel m;
  for (const auto& p : pairs) {
    for (const auto& w : p.source) m.src_vocab.add(w);
    for (const auto& w : p.target) m.tgt_vocab.add(w);
  }
  const auto data = to_ids(m, pairs);
  // Uniform over the target words each source word co-occurs with.
  std::unordered_map<WordId, std::set<WordId>> cooc;
  for (const auto& d : data)
    for (WordId e : d.source) cooc[e].insert(d.target.begin(), d.target.end());
  for (const auto& [e, fs] : cooc)
    for (WordId f : fs) m.t.set(e, f, 1.0 / static_cast<double>(fs.size()));
  run_em(m, data, false, opt);
  return m;
}

AlignModel train_ibm2(const std::vector<corpus::SentencePair>& pairs, const AlignModel& ibm1_init,
                      const EmOptions& opt) {
  check_options(pairs, opt);
  AlignModel m;
  m.src_vocab = ibm1_init.src_vocab;
  m.tgt_vocab = ibm1_init.tgt_vocab;
  m.t = ibm1_init.t;
  m.has_distortion = true;
  const auto data = to_ids(m, pairs);
  for (const auto& d : data)
    m.a.ensure(static_cast<int>(d.target.size()), static_cast<int>(d.source.size()) - 1);
  run_em(m, data, true, opt);
  return m;
}

LinkSet viterbi_align(const AlignModel& m, const corpus::SentencePair& pair) {
  const IdPair ids = m.ids(pair);
  const int le = static_cast<int>(ids.source.size()) - 1;
  const int lf = static_cast<int>(ids.target.size());
  LinkSet out;
  for (int j = 0; j < lf; ++j) {
    int best = 0;
    double best_p = -1;
    for (int i = 0; i <= le; ++i) {
      double p = m.t.prob(ids.source[i], ids.target[j]);
      if (m.has_distortion) p *= m.a.prob(i, j, lf, le);
      if (p > best_p) {
        best_p = p;
        best = i;
      }
    }
    if (best > 0) out.insert({best - 1, j});
  }
  return out;
}

Heuristic parse_heuristic(std::string_view name) {
  if (name == "intersection") return Heuristic::kIntersection;
  if (name == "union") return Heuristic::kUnion;
  if (name == "grow-diag-final-and") return Heuristic::kGrowDiagFinalAnd;
  throw UsageError("unknown symmetrization heuristic '" + std::string(name) + "'");
}

std::string_view heuristic_name(Heuristic h) {
  switch (h) {
    case Heuristic::kIntersection: return "intersection";
    case Heuristic::kUnion: return "union";
    case Heuristic::kGrowDiagFinalAnd: return "grow-diag-final-and";
  }
  return "?";
}

LinkSet symmetrize(const LinkSet& forward, const LinkSet& backward, Heuristic h, int source_len,
                   int target_len) {
  LinkSet inter, uni = forward;
  uni.insert(backward.begin(), backward.end());
  for (const auto& l : forward)
    if (backward.count(l)) inter.insert(l);
  if (h == Heuristic::kIntersection) return inter;
  if (h == Heuristic::kUnion) return uni;

  int ns = source_len, nt = target_len;
  for (const auto& [s, t] : uni) {
    ns = std::max(ns, s + 1);
    nt = std::max(nt, t + 1);
  }
  ns = std::max(ns, 0);
  nt = std::max(nt, 0);
  LinkSet a = inter;
  std::vector<int> src_deg(ns, 0), tgt_deg(nt, 0);
  for (const auto& [s, t] : a) {
    ++src_deg[s];
    ++tgt_deg[t];
  }
  auto add = [&](int s, int t) {
    a.insert({s, t});
    ++src_deg[s];
    ++tgt_deg[t];
  };
  static constexpr int kNeighbors[8][2] = {{-1, 0}, {0, -1}, {1, 0},  {0, 1},
                                           {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  for (bool added = true; added;) {
    added = false;
    for (int s = 0; s < ns; ++s) {
      for (int t = 0; t < nt; ++t) {
        if (!a.count({s, t})) continue;
        for (const auto& d : kNeighbors) {
          int sn = s + d[0], tn = t + d[1];
          if (sn < 0 || tn < 0 || sn >= ns || tn >= nt) continue;
          if (a.count({sn, tn})) continue;
          if ((src_deg[sn] == 0 || tgt_deg[tn] == 0) && uni.count({sn, tn})) {
            add(sn, tn);
            added = true;
          }
        }
      }
    }
  }
  for (const LinkSet* dir : {&forward, &backward}) {
    for (int s = 0; s < ns; ++s)
      for (int t = 0; t < nt; ++t)
        if (src_deg[s] == 0 && tgt_deg[t] == 0 && dir->count({s, t})) add(s, t);
  }
  return a;
}

corpus::SentencePair swapped(const corpus::SentencePair& p) {
  corpus::SentencePair s;
  s.source = p.target;
  s.target = p.source;
  return s;
}

LinkSet transpose(const LinkSet& links) {
  LinkSet out;
  for (const auto& [s, t] : links) out.insert({t, s});
  return out;
}

WordAlignment align_corpus(const std::vector<corpus::SentencePair>& pairs,
                           const AlignerOptions& opt) {
  std::vector<corpus::SentencePair> rev;
  rev.reserve(pairs.size());
  for (const auto& p : pairs) rev.push_back(swapped(p));
  EmOptions e1{opt.ibm1_iterations, opt.epsilon, opt.jobs};
  EmOptions e2{opt.ibm2_iterations, opt.epsilon, opt.jobs};
  auto train = [&](const std::vector<corpus::SentencePair>& data) {
    AlignModel m = train_ibm1(data, e1);
    if (opt.ibm2_iterations > 0) m = train_ibm2(data, m, e2);
    return m;
  };
  WordAlignment wa;
  wa.forward = train(pairs);
  wa.backward = train(rev);
  wa.links.resize(pairs.size());
  for_each_shard(pairs.size(), kEmShard, opt.jobs, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t n = b; n < e; ++n) {
      LinkSet f = viterbi_align(wa.forward, pairs[n]);
      LinkSet bw = transpose(viterbi_align(wa.backward, rev[n]));
      wa.links[n] = symmetrize(f, bw, opt.heuristic, static_cast<int>(pairs[n].source.size()),
                               static_cast<int>(pairs[n].target.size()));
    }
  });
  return wa;
}

std::string format_links(const LinkSet& links) {
  std::string out;
  for (const auto& [s, t] : links) {
    if (!out.empty()) out += ' ';
    out += std::to_string(s) + "-" + std::to_string(t);
  }
  return out;
}

LinkSet parse_links(std::string_view line) {
  LinkSet out;
  for (const auto& tok : split_ws(line)) {
    auto dash = tok.find('-');
    if (dash == std::string::npos) throw DataError("bad alignment point '" + tok + "'");
    int s = static_cast<int>(parse_int(std::string_view(tok).substr(0, dash), "alignment index"));
    int t = static_cast<int>(parse_int(std::string_view(tok).substr(dash + 1), "alignment index"));
    if (s < 0 || t < 0) throw DataError("negative alignment index in '" + tok + "'");
    out.insert({s, t});
  }
  return out;
}

std::vector<LinkSet> read_alignments(const std::string& path) {
  std::vector<LinkSet> out;
  std::size_t n = 0;
  for (const auto& l : read_lines(path)) {
    ++n;
    try {
      out.push_back(parse_links(l));
    } catch (const DataError& e) {
      throw DataError(path, n, e.what());
    }
  }
  return out;
}

std::string write_alignments(const std::vector<LinkSet>& all) {
  std::string out;
  for (const auto& l : all) out += format_links(l) + "\n";
  return out;
}

std::map<std::string, double> relative_frequencies(const std::map<std::string, double>& counts,
                                                   double denominator) {
  double total = denominator;
  if (denominator <= 0)
    for (const auto& [k, v] : counts) total += v;
  if (total <= 0) throw DataError("relative frequencies of an empty count table");
  std::map<std::string, double> out;
  for (const auto& [k, v] : counts) out[k] = v / total;
  return out;
}

std::string write_ttable(const AlignModel& m) {
  std::vector<std::pair<std::pair<std::string, std::string>, double>> rows;
  for (WordId e : m.t.sources())
    for (const auto& [f, p] : m.t.row(e))
      rows.push_back({{m.src_vocab.string_of(e), m.tgt_vocab.string_of(f)}, p});
  std::sort(rows.begin(), rows.end());
  std::string out;
  for (const auto& [k, p] : rows) out += k.first + " " + k.second + " " + format_g(p, 17) + "\n";
  return out;
}

AlignModel read_ttable(std::string_view text, std::string_view source) {
  AlignModel m;
  std::size_t n = 0;
  for (const auto& line : split_on(text, "\n")) {
    ++n;
    auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 3) throw DataError(std::string(source), n, "expected 'source target probability'");
    double p = 0;
    try {
      p = parse_double(f[2], "probability");
    } catch (const DataError& e) {
      throw DataError(std::string(source), n, e.what());
    }
    if (!(p >= 0 && p <= 1)) throw DataError(std::string(source), n, "probability outside [0,1]");
    WordId e = f[0] == Vocab::kNullStr ? Vocab::kNull : m.src_vocab.add(f[0]);
    m.t.set(e, m.tgt_vocab.add(f[1]), p);
  }
  return m;
}

}  // namespace desksmt::align
