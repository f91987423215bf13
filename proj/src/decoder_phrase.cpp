#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "desksmt/decoder.hpp"
#include "desksmt/error.hpp"
#include "hypergraph.hpp"

namespace desksmt::decoder {

using detail::HyperEdge;
using detail::Hypergraph;
using detail::KBest;

PhraseModels::PhraseModels(const phrasetab::PhraseTable& table, const lm::NGramModel& lm,
                           const phrasetab::ReorderingTable* reordering)
    : table_(&table), lm_(&lm), reordering_(reordering) {
  for (const auto& e : table.entries) index_[join(e.src)].push_back(&e);
}

const std::vector<const phrasetab::PhraseEntry*>* PhraseModels::lookup(const std::string& src) const {
  auto it = index_.find(src);
  return it == index_.end() ? nullptr : &it->second;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Option {
  int s1 = 0, s2 = 0;
  Tokens tgt;
  std::vector<lm::WordId> ids;
  std::array<double, 4> scores{1, 1, 1, 1};
  bool oov = false;
  FeatureVector feats{};  // everything except LM, distortion and reordering
  double static_score = 0;
  double estimate = 0;  // static score plus context-free LM
  const phrasetab::ReorderingEntry* reo = nullptr;

  PhraseStep step() const {
    PhraseStep s;
    s.s1 = s1;
    s.s2 = s2;
    s.tgt = tgt;
    s.scores = scores;
    s.oov = oov;
    if (reo) {
      s.reo_fwd = reo->forward;
      s.reo_bwd = reo->backward;
    }
    return s;
  }
};

struct Options {
  int n = 0;
  std::vector<Option> all;
  std::vector<std::vector<std::vector<int>>> by_span;  // [s][e]

  const std::vector<int>& at(int s, int e) const { return by_span[s][e]; }
};

Options collect_options(const Tokens& sentence, const PhraseModels& models,
                        const FeatureWeights& w, const PhraseConfig& cfg) {
  Options o;
  const int n = static_cast<int>(sentence.size());
  o.n = n;
  o.by_span.assign(n, std::vector<std::vector<int>>(n));
  const auto& lm = models.lm();
  const auto* reo = models.reordering().table;
  for (int s = 0; s < n; ++s) {
    for (int e = s; e < n && e - s < cfg.max_phrase_len; ++e) {
      Tokens src(sentence.begin() + s, sentence.begin() + e + 1);
      const auto* entries = models.lookup(join(src));
      if (!entries) continue;
      std::vector<Option> opts;
      for (const auto* pe : *entries) {
        Option op;
        op.s1 = s;
        op.s2 = e;
        op.tgt = pe->tgt;
        op.scores = pe->scores;
        for (const auto& t : op.tgt) op.ids.push_back(lm.id_of(t));
        for (int i = 0; i < 4; ++i) op.feats[kPhiSgivenT + i] = std::log10(op.scores[i]);
        op.feats[kPhrasePenalty] = 1;
        op.feats[kWordPenalty] = static_cast<double>(op.tgt.size());
        op.static_score = w.dot(op.feats);
        op.estimate = op.static_score + w.w[kLm] * detail::lm_inner(lm, op.ids);
        if (reo) op.reo = reo->find(src, op.tgt);
        opts.push_back(std::move(op));
      }
      std::stable_sort(opts.begin(), opts.end(), [](const Option& a, const Option& b) {
        if (a.estimate != b.estimate) return a.estimate > b.estimate;
        return join(a.tgt) < join(b.tgt);
      });
      if (cfg.table_limit > 0 && static_cast<int>(opts.size()) > cfg.table_limit)
        opts.resize(cfg.table_limit);
      for (auto& op : opts) {
        o.by_span[s][e].push_back(static_cast<int>(o.all.size()));
        o.all.push_back(std::move(op));
      }
    }
  }
  for (int s = 0; s < n; ++s) {
    if (!o.by_span[s][s].empty()) continue;
    Option op;
    op.s1 = op.s2 = s;
    op.tgt = {sentence[s]};
    op.oov = true;
    op.ids = {lm.id_of(sentence[s])};
    for (int i = 0; i < 4; ++i) op.feats[kPhiSgivenT + i] = 0;
    op.feats[kPhrasePenalty] = 1;
    op.feats[kWordPenalty] = 1;
    op.feats[kOov] = 1;
    op.static_score = w.dot(op.feats);
    op.estimate = op.static_score + w.w[kLm] * detail::lm_inner(lm, op.ids);
    if (reo) op.reo = reo->find({sentence[s]}, op.tgt);
    o.by_span[s][s].push_back(static_cast<int>(o.all.size()));
    o.all.push_back(std::move(op));
  }
  return o;
}

class Coverage {
 public:
  explicit Coverage(int n) : bits_((n + 63) / 64, 0) {}
  bool test(int i) const { return bits_[i / 64] >> (i % 64) & 1u; }
  void set(int i) { bits_[i / 64] |= std::uint64_t{1} << (i % 64); }
  void append_key(std::string& k) const {
    k.append(reinterpret_cast<const char*>(bits_.data()), bits_.size() * sizeof(std::uint64_t));
  }

 private:
  std::vector<std::uint64_t> bits_;
};

struct Hyp {
  Coverage cov{0};
  int covered = 0;
  int last_end = -1;
  int prev_start = -1;
  int last_opt = -1;
  std::vector<lm::WordId> ctx;
  double score = 0;
  double future = 0;
};

std::vector<std::vector<double>> future_table(const Options& o) {
  const int n = o.n;
  std::vector<std::vector<double>> fc(n, std::vector<double>(n, kNegInf));
  for (int s = 0; s < n; ++s)
    for (int e = s; e < n; ++e)
      for (int id : o.at(s, e)) fc[s][e] = std::max(fc[s][e], o.all[id].estimate);
  for (int len = 2; len <= n; ++len)
    for (int s = 0; s + len - 1 < n; ++s) {
      int e = s + len - 1;
      for (int m = s; m < e; ++m) fc[s][e] = std::max(fc[s][e], fc[s][m] + fc[m + 1][e]);
    }
  return fc;
}

double future_of(const Coverage& cov, int n, const std::vector<std::vector<double>>& fc) {
  double f = 0;
  for (int i = 0; i < n;) {
    if (cov.test(i)) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && !cov.test(j + 1)) ++j;
    f += fc[i][j];
    i = j + 1;
  }
  return f;
}

double log_reo(const phrasetab::ReorderingEntry* e, bool backward, int o, std::size_t k) {
  if (!e) return std::log10(1.0 / static_cast<double>(k));
  const auto& row = backward ? e->backward : e->forward;
  if (row.empty()) return std::log10(1.0 / static_cast<double>(k));
  return std::log10(row.at(o));
}

std::vector<Translation> search(const Tokens& sentence, const PhraseModels& models,
                                const FeatureWeights& w, const PhraseConfig& cfg) {
  const int n = static_cast<int>(sentence.size());
  const Options opts = collect_options(sentence, models, w, cfg);
  const auto fc = future_table(opts);
  const auto& lm = models.lm();
  const auto reo = models.reordering();
  const bool use_reo = reo.table != nullptr;
  const bool bidi = use_reo && reo.table->bidirectional;
  const std::size_t korient = use_reo ? reo.table->orientations() : 3;
  const std::size_t keep_ctx = static_cast<std::size_t>(lm.order() - 1);

  std::vector<Hyp> hyps;
  Hypergraph g;
  std::vector<std::vector<int>> stacks(n + 1);
  std::vector<std::unordered_map<std::string, int>> keys(n + 1);

  Hyp root;
  root.cov = Coverage(n);
  root.ctx = {corpus::Vocabulary::kBos};
  root.future = future_of(root.cov, n, fc);
  hyps.push_back(root);
  g.add_node();
  g.add_edge(0, HyperEdge{{}, 0, {}, -1});
  stacks[0].push_back(0);

  auto prune = [&](int c) {
    auto& st = stacks[c];
    std::stable_sort(st.begin(), st.end(), [&](int a, int b) {
      return hyps[a].score + hyps[a].future > hyps[b].score + hyps[b].future;
    });
    if (cfg.stack_size > 0 && static_cast<int>(st.size()) > cfg.stack_size) st.resize(cfg.stack_size);
  };

  for (int c = 0; c < n; ++c) {
    prune(c);
    for (int hid : stacks[c]) {
      for (int s = 0; s < n; ++s) {
        if (hyps[hid].cov.test(s)) continue;
        const int dist = std::abs(s - hyps[hid].last_end - 1);
        if (cfg.distortion_limit >= 0 && dist > cfg.distortion_limit) continue;
        for (int e = s; e < n && !hyps[hid].cov.test(e); ++e) {
          if (opts.at(s, e).empty()) continue;
          Coverage cov = hyps[hid].cov;
          for (int i = s; i <= e; ++i) cov.set(i);
          if (cfg.distortion_limit >= 0) {
            int gap = -1;
            for (int i = 0; i < n; ++i)
              if (!cov.test(i)) {
                gap = i;
                break;
              }
            if (gap >= 0 && gap < s && std::abs(gap - e - 1) > cfg.distortion_limit) continue;
          }
          const int covered = hyps[hid].covered + (e - s + 1);
          const double future = future_of(cov, n, fc);
          for (int oid : opts.at(s, e)) {
            const Option& op = opts.all[oid];
            const Hyp& h = hyps[hid];
            FeatureVector d = op.feats;
            d[kDistortion] = -dist;
            std::vector<lm::WordId> ctx = h.ctx;
            for (auto id : op.ids) {
              d[kLm] += lm.score(ctx, id);
              ctx.push_back(id);
            }
            if (ctx.size() > keep_ctx) ctx.erase(ctx.begin(), ctx.end() - keep_ctx);
            if (use_reo) {
              int o = detail::orientation(h.prev_start, h.last_end, s, e, reo.set(), false);
              d[kReorderFwd] = log_reo(op.reo, false, o, korient);
              if (bidi && h.last_opt >= 0) {
                int ob = detail::orientation(h.prev_start, h.last_end, s, e, reo.set(), true);
                d[kReorderBwd] = log_reo(opts.all[h.last_opt].reo, true, ob, korient);
              }
            }
            const double delta = w.dot(d);
            const double total = h.score + delta;

            std::string key;
            cov.append_key(key);
            key.append(reinterpret_cast<const char*>(&e), sizeof e);
            key.append(reinterpret_cast<const char*>(ctx.data()), ctx.size() * sizeof(lm::WordId));
            if (use_reo) {
              key.append(reinterpret_cast<const char*>(&s), sizeof s);
              const void* p = op.reo;
              key.append(reinterpret_cast<const char*>(&p), sizeof p);
            }
            auto [it, fresh] = keys[covered].try_emplace(key, -1);
            if (fresh) {
              Hyp nh;
              nh.cov = cov;
              nh.covered = covered;
              nh.last_end = e;
              nh.prev_start = s;
              nh.last_opt = oid;
              nh.ctx = std::move(ctx);
              nh.score = total;
              nh.future = future;
              it->second = static_cast<int>(hyps.size());
              hyps.push_back(std::move(nh));
              g.add_node();
              stacks[covered].push_back(it->second);
            } else if (total > hyps[it->second].score) {
              hyps[it->second].score = total;
              hyps[it->second].last_opt = oid;
            }
            g.add_edge(it->second, HyperEdge{{hid}, delta, d, oid});
          }
        }
      }
    }
  }

  prune(n);
  if (stacks[n].empty()) return {};
  const int goal = static_cast<int>(g.size());
  g.add_node();
  std::vector<double> best(g.size() + 1, 0);
  for (std::size_t i = 0; i < hyps.size(); ++i) best[i] = hyps[i].score;
  for (int hid : stacks[n]) {
    const Hyp& h = hyps[hid];
    FeatureVector d{};
    d[kLm] = lm.score(h.ctx, corpus::Vocabulary::kEos);
    if (bidi && h.last_opt >= 0) {
      int ob = detail::orientation(h.prev_start, h.last_end, n, n, reo.set(), true);
      d[kReorderBwd] = log_reo(opts.all[h.last_opt].reo, true, ob, korient);
    }
    g.add_edge(goal, HyperEdge{{hid}, w.dot(d), d, -2});
  }
  detail::trim_edges(g, best, static_cast<std::size_t>(std::max(2 * cfg.nbest, 2)));

  KBest kb(g);
  return detail::collect_nbest(kb, goal, cfg.nbest, [&](const KBest::Tree& t) {
    Translation tr;
    std::vector<PhraseStep> rev;
    const KBest::Tree* cur = &t;
    while (cur && cur->edge && cur->edge->payload != -1) {
      if (cur->edge->payload >= 0) rev.push_back(opts.all[cur->edge->payload].step());
      cur = cur->kids.empty() ? nullptr : &cur->kids[0];
    }
    tr.steps.assign(rev.rbegin(), rev.rend());
    for (const auto& st : tr.steps) tr.target.insert(tr.target.end(), st.tgt.begin(), st.tgt.end());
    tr.features = phrase_features(n, tr.steps, lm, reo);
    tr.score = t.score;
    detail::check_rescore(tr.score, tr.features, w);
    return tr;
  });
}

}  // namespace

std::vector<Translation> decode_phrase(const Tokens& sentence, const PhraseModels& models,
                                       const FeatureWeights& weights, const PhraseConfig& config) {
  if (sentence.empty()) throw DataError("cannot decode an empty sentence");
  auto out = search(sentence, models, weights, config);
  if (out.empty() && config.distortion_limit != 0) {
    PhraseConfig mono = config;
    mono.distortion_limit = 0;
    out = search(sentence, models, weights, mono);
  }
  if (out.empty()) throw InvariantError("phrase search produced no complete hypothesis");
  return out;
}

Translation decode_oracle(const Tokens& sentence, const PhraseModels& models,
                          const FeatureWeights& weights, const PhraseConfig& config,
                          bool monotone_only, std::size_t max_len) {
  if (sentence.empty()) throw DataError("cannot decode an empty sentence");
  if (sentence.size() > max_len)
    throw UsageError("oracle decoding is limited to " + std::to_string(max_len) + " words");
  const int n = static_cast<int>(sentence.size());
  const Options opts = collect_options(sentence, models, weights, config);
  const auto reo = models.reordering();
  std::vector<char> cov(n, 0);
  std::vector<PhraseStep> steps;
  Translation best;
  bool have = false;
  std::string best_str;
  std::function<void(int)> rec = [&](int left) {
    if (left == 0) {
      FeatureVector f = phrase_features(n, steps, models.lm(), reo);
      double score = weights.dot(f);
      Tokens tgt;
      for (const auto& st : steps) tgt.insert(tgt.end(), st.tgt.begin(), st.tgt.end());
      std::string str = join(tgt);
      if (!have || score > best.score || (score == best.score && str < best_str)) {
        have = true;
        best.score = score;
        best.features = f;
        best.steps = steps;
        best.target = std::move(tgt);
        best_str = std::move(str);
      }
      return;
    }
    int first_gap = 0;
    while (cov[first_gap]) ++first_gap;
    for (int s = 0; s < n; ++s) {
      if (cov[s]) continue;
      if (monotone_only && s != first_gap) continue;
      for (int e = s; e < n && !cov[e]; ++e) {
        for (int oid : opts.at(s, e)) {
          for (int i = s; i <= e; ++i) cov[i] = 1;
          steps.push_back(opts.all[oid].step());
          rec(left - (e - s + 1));
          steps.pop_back();
          for (int i = s; i <= e; ++i) cov[i] = 0;
        }
      }
    }
  };
  rec(n);
  return best;
}

}  // namespace desksmt::decoder
