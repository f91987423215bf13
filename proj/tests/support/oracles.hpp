#pragma once

// Slow, independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "desksmt/align.hpp"
#include "desksmt/deptree.hpp"
#include "desksmt/lm.hpp"
#include "desksmt/phrasetab.hpp"

namespace oracle {

using Words = std::vector<std::string>;

// IBM Model 1 in plain string maps. t[(e, f)] = t(f|e); "NULL" is source 0.
struct Ibm1Result {
  std::map<std::pair<std::string, std::string>, double> t;
  std::vector<double> log_likelihood;
};

inline Ibm1Result ibm1(const std::vector<std::pair<Words, Words>>& corpus, int iterations) {
  Ibm1Result r;
  std::map<std::string, std::set<std::string>> cooc;
  for (const auto& [src, tgt] : corpus) {
    Words s = src;
    s.insert(s.begin(), "NULL");
    for (const auto& e : s)
      for (const auto& f : tgt) cooc[e].insert(f);
  }
  for (const auto& [e, fs] : cooc)
    for (const auto& f : fs) r.t[{e, f}] = 1.0 / static_cast<double>(fs.size());
  for (int it = 0; it < iterations; ++it) {
    std::map<std::pair<std::string, std::string>, double> count;
    std::map<std::string, double> total;
    double ll = 0;
    for (const auto& [src, tgt] : corpus) {
      Words s = src;
      s.insert(s.begin(), "NULL");
      for (const auto& f : tgt) {
        double z = 0;
        for (const auto& e : s) z += r.t[{e, f}];
        ll += std::log(z / static_cast<double>(s.size()));
        for (const auto& e : s) {
          const double c = r.t[{e, f}] / z;
          count[{e, f}] += c;
          total[e] += c;
        }
      }
    }
    for (auto& [k, v] : r.t) v = count[k] / total[k.first];
    r.log_likelihood.push_back(ll);
  }
  return r;
}

// Every span pair checked directly for consistency.
inline std::set<desksmt::phrasetab::PhraseSpan> all_consistent_spans(int ls, int lt,
                                                                      const desksmt::align::LinkSet& a,
                                                                      int max_len) {
  std::set<desksmt::phrasetab::PhraseSpan> out;
  for (int s1 = 0; s1 < ls; ++s1)
    for (int s2 = s1; s2 < ls && s2 - s1 < max_len; ++s2)
      for (int t1 = 0; t1 < lt; ++t1)
        for (int t2 = t1; t2 < lt && t2 - t1 < max_len; ++t2) {
          bool inside = false, ok = true;
          for (auto [i, j] : a) {
            const bool si = i >= s1 && i <= s2, tj = j >= t1 && j <= t2;
            if (si && tj) inside = true;
            if (si != tj) ok = false;
          }
          if (inside && ok) out.insert({s1, s2, t1, t2});
        }
  return out;
}

// Backoff evaluation straight from the stored tables.
inline double lm_logprob(const desksmt::lm::NGramModel& m, std::vector<desksmt::lm::WordId> h,
                         desksmt::lm::WordId w) {
  while (static_cast<int>(h.size()) > m.order() - 1) h.erase(h.begin());
  std::vector<desksmt::lm::WordId> ng = h;
  ng.push_back(w);
  if (const auto* e = m.find(ng)) return e->logprob;
  if (h.empty()) return m.unk_logprob();
  const auto* he = m.find(h);
  const double bow = he ? he->backoff : 0.0;
  h.erase(h.begin());
  return bow + lm_logprob(m, h, w);
}

// Corpus BLEU from scratch.
inline double bleu(const std::vector<Words>& hyps, const std::vector<Words>& refs, int max_n = 4) {
  std::vector<double> match(max_n, 0), total(max_n, 0);
  double c = 0, r = 0;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    c += static_cast<double>(hyps[k].size());
    r += static_cast<double>(refs[k].size());
    for (int n = 1; n <= max_n; ++n) {
      std::map<Words, int> hc, rc;
      for (std::size_t i = 0; i + n <= hyps[k].size(); ++i)
        ++hc[Words(hyps[k].begin() + i, hyps[k].begin() + i + n)];
      for (std::size_t i = 0; i + n <= refs[k].size(); ++i)
        ++rc[Words(refs[k].begin() + i, refs[k].begin() + i + n)];
      for (const auto& [g, cnt] : hc) {
        total[n - 1] += cnt;
        auto it = rc.find(g);
        if (it != rc.end()) match[n - 1] += std::min(cnt, it->second);
      }
    }
  }
  double logp = 0;
  for (int n = 0; n < max_n; ++n) {
    if (match[n] == 0) return 0;
    logp += std::log(match[n] / total[n]) / max_n;
  }
  const double bp = c >= r ? 1.0 : std::exp(1 - r / c);
  return bp * std::exp(logp);
}

// Projective iff every subtree covers a contiguous interval of positions.
inline bool projective(const desksmt::deptree::DepSentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  for (int h = 1; h <= n; ++h) {
    std::vector<int> yield;
    for (int d = 1; d <= n; ++d) {
      int x = d;
      int steps = 0;
      while (x != 0 && x != h && steps++ <= n) x = s.tokens[x - 1].head;
      if (x == h) yield.push_back(d);
    }
    if (yield.back() - yield.front() + 1 != static_cast<int>(yield.size())) return false;
  }
  return true;
}

}  // namespace oracle
