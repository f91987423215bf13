#include "desksmt/tune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "desksmt/error.hpp"

namespace desksmt::tune {

bool NBestPool::add(std::size_t sent, Tokens target, const FeatureVector& f) {
  for (double v : f)
    if (!std::isfinite(v)) throw InvariantError("non-finite feature value in n-best pool");
  if (!seen_.at(sent).insert(join(target)).second) return false;
  entries_[sent].push_back({std::move(target), f});
  return true;
}

std::size_t NBestPool::size() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.size();
  return n;
}

std::vector<std::size_t> select(const NBestPool& pool, const FeatureWeights& w) {
  std::vector<std::size_t> out(pool.sentences(), 0);
  for (std::size_t s = 0; s < pool.sentences(); ++s) {
    const auto& es = pool.at(s);
    if (es.empty()) throw DataError("n-best pool has no hypotheses for sentence " + std::to_string(s + 1));
    double best = w.dot(es[0].features);
    std::string best_str = join(es[0].target);
    for (std::size_t k = 1; k < es.size(); ++k) {
      double v = w.dot(es[k].features);
      if (v < best) continue;
      std::string str = join(es[k].target);
      if (v > best || str < best_str) {
        best = v;
        best_str = std::move(str);
        out[s] = k;
      }
    }
  }
  return out;
}

namespace {

void check_refs(const NBestPool& pool, const std::vector<Tokens>& refs) {
  if (pool.sentences() != refs.size())
    throw DataError("n-best pool covers " + std::to_string(pool.sentences()) + " sentences but " +
                    std::to_string(refs.size()) + " references were given");
}

using Stats = std::vector<std::vector<eval::BleuStats>>;

Stats pool_stats(const NBestPool& pool, const std::vector<Tokens>& refs) {
  Stats st(pool.sentences());
  for (std::size_t s = 0; s < pool.sentences(); ++s)
    for (const auto& e : pool.at(s)) st[s].push_back(eval::bleu_stats(e.target, refs[s]));
  return st;
}

double selected_bleu(const Stats& st, const std::vector<std::size_t>& sel) {
  eval::BleuStats total;
  for (std::size_t s = 0; s < st.size(); ++s) total += st[s][sel[s]];
  return eval::bleu_from_stats(total).score;
}

struct Segment {
  double start;  // -inf for the first
  std::size_t hyp;
};

// Upper envelope of a_k + gamma * b_k.
std::vector<Segment> envelope(const std::vector<PoolEntry>& es, const FeatureWeights& w,
                              const FeatureVector& d) {
  struct Line {
    double a, b;
    std::size_t k;
    std::string str;
  };
  std::vector<Line> lines;
  FeatureWeights dw;
  dw.w = d;
  for (std::size_t k = 0; k < es.size(); ++k)
    lines.push_back({w.dot(es[k].features), dw.dot(es[k].features), k, join(es[k].target)});
  std::sort(lines.begin(), lines.end(), [](const Line& x, const Line& y) {
    if (x.b != y.b) return x.b < y.b;
    if (x.a != y.a) return x.a > y.a;
    return x.str < y.str;
  });
  std::vector<Segment> hull;
  std::vector<const Line*> hl;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Line& l = lines[i];
    if (i > 0 && lines[i - 1].b == l.b) continue;  // dominated by an equal slope
    double start = -std::numeric_limits<double>::infinity();
    while (!hl.empty()) {
      const Line& top = *hl.back();
      double x = (top.a - l.a) / (l.b - top.b);
      if (x <= hull.back().start) {
        hull.pop_back();
        hl.pop_back();
        continue;
      }
      start = x;
      break;
    }
    hull.push_back({start, l.k});
    hl.push_back(&l);
  }
  return hull;
}

LineSearchResult search_with(const NBestPool& pool, const Stats& st, const FeatureWeights& w,
                             const FeatureVector& d, double current) {
  const std::size_t n = pool.sentences();
  struct Event {
    double x;
    std::size_t sent, hyp;
  };
  std::vector<Event> events;
  eval::BleuStats total;
  std::vector<std::size_t> cur(n);
  for (std::size_t s = 0; s < n; ++s) {
    auto env = envelope(pool.at(s), w, d);
    cur[s] = env[0].hyp;
    total += st[s][cur[s]];
    for (std::size_t k = 1; k < env.size(); ++k) events.push_back({env[k].start, s, env[k].hyp});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.sent < b.sent;
  });

  LineSearchResult best{0, current};
  auto consider = [&](double gamma, double bleu) {
    if (bleu > best.bleu || (bleu == best.bleu && best.gamma != 0 && std::abs(gamma) < std::abs(best.gamma)))
      best = {gamma, bleu};
  };
  auto minus = [](eval::BleuStats& t, const eval::BleuStats& s) {
    for (std::size_t i = 0; i < t.matches.size(); ++i) {
      t.matches[i] -= s.matches[i];
      t.totals[i] -= s.totals[i];
    }
    t.hyp_len -= s.hyp_len;
    t.ref_len -= s.ref_len;
  };
  if (events.empty()) return best;
  consider(events.front().x - 1, eval::bleu_from_stats(total).score);
  for (std::size_t i = 0; i < events.size();) {
    const double x = events[i].x;
    for (; i < events.size() && events[i].x == x; ++i) {
      minus(total, st[events[i].sent][cur[events[i].sent]]);
      cur[events[i].sent] = events[i].hyp;
      total += st[events[i].sent][cur[events[i].sent]];
    }
    const double gamma = i < events.size() ? (x + events[i].x) / 2 : x + 1;
    consider(gamma, eval::bleu_from_stats(total).score);
  }
  return best;
}

// Uniform in [-1, 1) from a splitmix64 stream.
double next_unit(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53 * 2 - 1;
}

}  // namespace

double pool_bleu(const NBestPool& pool, const FeatureWeights& w, const std::vector<Tokens>& refs) {
  check_refs(pool, refs);
  auto sel = select(pool, w);
  std::vector<Tokens> hyps;
  for (std::size_t s = 0; s < sel.size(); ++s) hyps.push_back(pool.at(s)[sel[s]].target);
  return eval::bleu(hyps, refs).score;
}

LineSearchResult line_search(const NBestPool& pool, const std::vector<Tokens>& refs,
                             const FeatureWeights& w, const FeatureVector& direction) {
  check_refs(pool, refs);
  Stats st = pool_stats(pool, refs);
  return search_with(pool, st, w, direction, selected_bleu(st, select(pool, w)));
}

OptimizeTrace optimize_pool(const NBestPool& pool, const std::vector<Tokens>& refs,
                            const FeatureWeights& initial, const OptimizeOptions& opt) {
  check_refs(pool, refs);
  const Stats st = pool_stats(pool, refs);
  OptimizeTrace tr;
  tr.weights = initial;
  double cur = selected_bleu(st, select(pool, tr.weights));
  tr.bleu.push_back(cur);
  std::uint64_t rng = opt.seed;
  for (int u = 0; u < opt.max_updates; ++u) {
    std::vector<FeatureVector> dirs;
    for (int k = 0; k < decoder::kNumFeatures; ++k) {
      if (!FeatureWeights::tunable(k)) continue;
      FeatureVector d{};
      d[k] = 1;
      dirs.push_back(d);
    }
    for (int r = 0; r < opt.random_restarts; ++r) {
      FeatureVector d{};
      for (int k = 0; k < decoder::kNumFeatures; ++k)
        if (FeatureWeights::tunable(k)) d[k] = next_unit(rng);
      dirs.push_back(d);
    }
    LineSearchResult best{0, cur};
    const FeatureVector* best_dir = nullptr;
    for (const auto& d : dirs) {
      auto r = search_with(pool, st, tr.weights, d, cur);
      if (r.gamma != 0 && r.bleu > best.bleu) {
        best = r;
        best_dir = &d;
      }
    }
    if (!best_dir) break;
    FeatureWeights next = tr.weights;
    for (int k = 0; k < decoder::kNumFeatures; ++k) next.w[k] += best.gamma * (*best_dir)[k];
    double actual = selected_bleu(st, select(pool, next));
    if (!(actual > cur)) break;
    tr.weights = next;
    cur = actual;
    tr.bleu.push_back(cur);
  }
  return tr;
}

FeatureWeights l1_normalize(const FeatureWeights& w) {
  double norm = 0;
  for (double v : w.w) norm += std::abs(v);
  if (norm == 0) return w;
  FeatureWeights out = w;
  for (double& v : out.w) v /= norm;
  return out;
}

std::vector<std::string> MertResult::history() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    const auto& it = iterations[i];
    out.push_back("iteration " + std::to_string(i + 1) + " dev_bleu=" + format_g(it.dev_bleu, 6) +
                  " pool_bleu=" + format_g(it.pool_bleu, 6) + " pool=" + std::to_string(it.pool_size) +
                  " updates=" + std::to_string(it.updates));
  }
  return out;
}

MertResult mert(const std::vector<Tokens>& refs, const DevDecoder& decode,
                const FeatureWeights& initial, const MertConfig& config) {
  if (refs.empty()) throw DataError("tuning needs a non-empty dev set");
  NBestPool pool(refs.size());
  FeatureWeights w = initial;
  MertResult res;
  for (int it = 0; it < config.max_iterations; ++it) {
    auto nb = decode(w, config.nbest);
    if (nb.size() != refs.size())
      throw InvariantError("dev decoder returned " + std::to_string(nb.size()) + " n-best lists for " +
                           std::to_string(refs.size()) + " sentences");
    std::vector<Tokens> best;
    for (std::size_t s = 0; s < nb.size(); ++s) {
      if (nb[s].empty()) throw InvariantError("empty n-best list for dev sentence " + std::to_string(s + 1));
      best.push_back(nb[s][0].target);
      for (const auto& t : nb[s]) pool.add(s, t.target, t.features);
    }
    MertIteration log;
    log.dev_bleu = eval::bleu(best, refs).score;
    OptimizeOptions opt;
    opt.random_restarts = config.random_restarts;
    opt.seed = config.seed + static_cast<std::uint64_t>(it) * 0x100000001b3ull;
    auto tr = optimize_pool(pool, refs, w, opt);
    double delta = 0;
    for (int k = 0; k < decoder::kNumFeatures; ++k) delta = std::max(delta, std::abs(tr.weights.w[k] - w.w[k]));
    log.pool_bleu = tr.bleu.back();
    log.pool_size = pool.size();
    log.updates = tr.bleu.size() - 1;
    res.iterations.push_back(log);
    w = tr.weights;
    if (log.updates == 0 && delta < config.min_weight_delta) break;
  }
  res.weights = l1_normalize(w);
  return res;
}

}  // namespace desksmt::tune
