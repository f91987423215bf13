#include "desksmt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "desksmt/error.hpp"

namespace desksmt::eval {

namespace {

std::map<std::string, std::size_t> bag(const Tokens& t) {
  std::map<std::string, std::size_t> m;
  for (const auto& w : t) ++m[w];
  return m;
}

std::map<std::string, double> ngram_counts(const Tokens& t, int n) {
  std::map<std::string, double> m;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + un <= t.size(); ++i) {
    std::string g = t[i];
    for (std::size_t k = 1; k < un; ++k) g += " " + t[i + k];
    m[g] += 1;
  }
  return m;
}

double ratio(double a, double b) { return b == 0 ? 0 : a / b; }

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw DataError(std::string(what) + ": " + std::to_string(a) + " hypotheses but " +
                    std::to_string(b) + " references");
}

}  // namespace

EvalCounts eval_counts(const Tokens& hyp, const Tokens& ref) {
  EvalCounts c;
  c.output_length = hyp.size();
  c.reference_length = ref.size();
  auto rb = bag(ref);
  for (const auto& [w, n] : bag(hyp)) {
    auto it = rb.find(w);
    if (it != rb.end()) c.correct += std::min(n, it->second);
  }
  return c;
}

PRF precision_recall_f(const Tokens& hyp, const Tokens& ref) {
  EvalCounts c = eval_counts(hyp, ref);
  PRF r;
  r.precision = ratio(static_cast<double>(c.correct), static_cast<double>(c.output_length));
  r.recall = ratio(static_cast<double>(c.correct), static_cast<double>(c.reference_length));
  r.f = r.precision + r.recall == 0 ? 0 : 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double wer(const Tokens& hyp, const Tokens& ref) {
  if (ref.empty()) throw DataError("WER needs a non-empty reference");
  std::vector<std::size_t> prev(ref.size() + 1), cur(ref.size() + 1);
  for (std::size_t j = 0; j <= ref.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= hyp.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      std::size_t sub = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[ref.size()]) / static_cast<double>(ref.size());
}

// --- BLEU -----------------------------------------------------------------

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < matches.size() && n < o.matches.size(); ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

BleuStats bleu_stats(const Tokens& hyp, const Tokens& ref, int max_n) {
  if (max_n < 1) throw UsageError("BLEU order must be at least 1");
  BleuStats s(max_n);
  s.hyp_len = static_cast<double>(hyp.size());
  s.ref_len = static_cast<double>(ref.size());
  for (int n = 1; n <= max_n; ++n) {
    auto h = ngram_counts(hyp, n);
    auto r = ngram_counts(ref, n);
    for (const auto& [g, c] : h) {
      s.totals[n - 1] += c;
      auto it = r.find(g);
      if (it != r.end()) s.matches[n - 1] += std::min(c, it->second);
    }
  }
  return s;
}

BleuResult bleu_from_stats(const BleuStats& s, BleuMode mode) {
  BleuResult r;
  r.hyp_len = s.hyp_len;
  r.ref_len = s.ref_len;
  double log_sum = 0;
  bool zero = false;
  for (std::size_t n = 0; n < s.matches.size(); ++n) {
    double m = s.matches[n], t = s.totals[n];
    if (mode == BleuMode::kSentence && n >= 1) {
      m += 1;
      t += 1;
    }
    double p = ratio(m, t);
    r.precisions.push_back(p);
    if (p <= 0)
      zero = true;
    else
      log_sum += std::log(p);
  }
  if (s.hyp_len == 0) {
    r.brevity_penalty = 0;
    return r;
  }
  r.brevity_penalty = s.hyp_len < s.ref_len ? std::exp(1 - s.ref_len / s.hyp_len) : 1.0;
  if (zero) return r;
  r.score = r.brevity_penalty * std::exp(log_sum / static_cast<double>(s.matches.size()));
  return r;
}

BleuResult bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs, int max_n,
                BleuMode mode) {
  check_sizes(hyps.size(), refs.size(), "BLEU");
  BleuStats total(max_n);
  for (std::size_t i = 0; i < hyps.size(); ++i) total += bleu_stats(hyps[i], refs[i], max_n);
  return bleu_from_stats(total, mode);
}

// --- METEOR -----------------------------------------------------------------

std::size_t count_chunks(const std::vector<std::pair<std::size_t, std::size_t>>& a) {
  std::size_t chunks = 0;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (k == 0 || a[k].first != a[k - 1].first + 1 || a[k].second != a[k - 1].second + 1) ++chunks;
  return chunks;
}

std::vector<std::pair<std::size_t, std::size_t>> meteor_alignment(const Tokens& hyp,
                                                                  const Tokens& ref) {
  using Align = std::vector<std::pair<std::size_t, std::size_t>>;
  std::map<std::string, std::vector<std::size_t>> where;
  for (std::size_t j = 0; j < ref.size(); ++j) where[ref[j]].push_back(j);
  // Hyp occurrences of a word beyond its reference count must stay unmatched.
  std::map<std::string, long> skips;
  for (const auto& [w, n] : bag(hyp)) {
    auto it = where.find(w);
    long r = it == where.end() ? 0 : static_cast<long>(it->second.size());
    skips[w] = static_cast<long>(n) - std::min<long>(static_cast<long>(n), r);
  }

  // Greedy seed: each hyp word takes the reference position that extends the
  // current chunk, else the earliest free one.
  Align best;
  {
    std::vector<char> used(ref.size(), 0);
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      auto it = where.find(hyp[i]);
      if (it == where.end()) continue;
      std::size_t pick = SIZE_MAX;
      if (!best.empty() && best.back().first + 1 == i) {
        std::size_t nj = best.back().second + 1;
        if (nj < ref.size() && !used[nj] && ref[nj] == hyp[i]) pick = nj;
      }
      if (pick == SIZE_MAX)
        for (auto j : it->second)
          if (!used[j]) {
            pick = j;
            break;
          }
      if (pick == SIZE_MAX) continue;
      used[pick] = 1;
      best.push_back({i, pick});
    }
  }
  std::size_t best_chunks = count_chunks(best);
  const std::size_t target = best.size();

  std::vector<char> used(ref.size(), 0);
  Align cur;
  std::size_t budget = 1000000;
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t i, std::size_t chunks) {
    if (budget == 0 || chunks >= best_chunks) return;
    --budget;
    if (i == hyp.size()) {
      if (cur.size() == target && chunks < best_chunks) {
        best = cur;
        best_chunks = chunks;
      }
      return;
    }
    auto it = where.find(hyp[i]);
    if (it == where.end()) {
      dfs(i + 1, chunks);
      return;
    }
    for (auto j : it->second) {
      if (used[j]) continue;
      bool extends = !cur.empty() && cur.back().first + 1 == i && cur.back().second + 1 == j;
      used[j] = 1;
      cur.push_back({i, j});
      dfs(i + 1, chunks + (extends ? 0 : 1));
      cur.pop_back();
      used[j] = 0;
    }
    long& sk = skips[hyp[i]];
    if (sk > 0) {
      --sk;
      dfs(i + 1, chunks);
      ++sk;
    }
  };
  dfs(0, 0);
  return best;
}

MeteorResult meteor_lite(const Tokens& hyp, const Tokens& ref, const MeteorParams& p) {
  MeteorResult r;
  auto a = meteor_alignment(hyp, ref);
  r.matches = a.size();
  if (r.matches == 0) return r;
  r.chunks = count_chunks(a);
  const double m = static_cast<double>(r.matches);
  r.precision = m / static_cast<double>(hyp.size());
  r.recall = m / static_cast<double>(ref.size());
  r.fmean = r.precision * r.recall / (p.alpha * r.precision + (1 - p.alpha) * r.recall);
  r.fragmentation = static_cast<double>(r.chunks) / m;
  r.penalty = p.gamma * std::pow(r.fragmentation, p.beta);
  r.score = r.fmean * (1 - r.penalty);
  return r;
}

// --- comparison -------------------------------------------------------------

CompareReport compare_systems(const std::vector<Tokens>& a, const std::vector<Tokens>& b,
                              const std::vector<Tokens>& refs, int top_k, int max_n) {
  check_sizes(a.size(), refs.size(), "compare (system A)");
  check_sizes(b.size(), refs.size(), "compare (system B)");
  CompareReport rep;
  rep.corpus_bleu[0] = bleu(a, refs, max_n);
  rep.corpus_bleu[1] = bleu(b, refs, max_n);
  rep.buckets = {{"1-10", 1, 10, 0, {}, {}},
                 {"11-25", 11, 25, 0, {}, {}},
                 {"26-50", 26, 50, 0, {}, {}},
                 {"51+", 51, 0, 0, {}, {}}};

  // [system][order] n-gram -> count
  std::array<std::vector<std::map<std::string, double>>, 2> conf, unconf;
  for (int s = 0; s < 2; ++s) {
    conf[s].resize(max_n);
    unconf[s].resize(max_n);
  }

  for (std::size_t i = 0; i < refs.size(); ++i) {
    SentenceRow row;
    row.id = i + 1;
    const Tokens* sys[2] = {&a[i], &b[i]};
    for (int s = 0; s < 2; ++s) {
      auto bl = sentence_bleu(*sys[s], refs[i], max_n);
      auto prf = precision_recall_f(*sys[s], refs[i]);
      row.bleu[s] = bl.score;
      row.bp[s] = bl.brevity_penalty;
      row.precision[s] = prf.precision;
      row.recall[s] = prf.recall;
      row.f[s] = prf.f;
      for (int n = 1; n <= max_n; ++n) {
        auto r = ngram_counts(refs[i], n);
        for (const auto& [g, c] : ngram_counts(*sys[s], n)) {
          auto it = r.find(g);
          double m = it == r.end() ? 0 : std::min(c, it->second);
          if (m > 0) conf[s][n - 1][g] += m;
          if (c - m > 0) unconf[s][n - 1][g] += c - m;
        }
      }
    }
    row.d_bleu = row.bleu[1] - row.bleu[0];
    row.d_precision = row.precision[1] - row.precision[0];
    row.d_recall = row.recall[1] - row.recall[0];
    row.d_f = row.f[1] - row.f[0];
    row.d_bp = row.bp[1] - row.bp[0];
    rep.rows.push_back(row);

    const std::size_t len = refs[i].size();
    for (auto& bk : rep.buckets) {
      if (len < bk.min_len && !(len == 0 && bk.min_len == 1)) continue;
      if (bk.max_len != 0 && len > bk.max_len) continue;
      ++bk.sentences;
      for (int s = 0; s < 2; ++s) {
        auto m = meteor_lite(*sys[s], refs[i]);
        bk.meteor[s] += m.score;
        bk.fragmentation[s] += m.fragmentation;
      }
      break;
    }
  }
  for (auto& bk : rep.buckets)
    for (int s = 0; s < 2; ++s)
      if (bk.sentences) {
        bk.meteor[s] /= static_cast<double>(bk.sentences);
        bk.fragmentation[s] /= static_cast<double>(bk.sentences);
      }

  auto table = [&](const std::map<std::string, double>& own, const std::map<std::string, double>& other) {
    std::vector<NGramDiff> out;
    for (const auto& [g, c] : own) {
      auto it = other.find(g);
      double o = it == other.end() ? 0 : it->second;
      if (c - o > 0) out.push_back({g, c, o, c - o});
    }
    std::stable_sort(out.begin(), out.end(), [](const NGramDiff& x, const NGramDiff& y) {
      if (x.diff != y.diff) return x.diff > y.diff;
      return x.ngram < y.ngram;
    });
    if (top_k > 0 && static_cast<int>(out.size()) > top_k) out.resize(top_k);
    return out;
  };
  for (int s = 0; s < 2; ++s) {
    for (int n = 0; n < max_n; ++n) {
      rep.ngrams.confirmed[s].push_back(table(conf[s][n], conf[1 - s][n]));
      rep.ngrams.unconfirmed[s].push_back(table(unconf[s][n], unconf[1 - s][n]));
    }
  }
  return rep;
}

namespace {

std::string fmt(double v) { return format_g(v, 6); }

}  // namespace

std::string format_report_text(const CompareReport& r) {
  std::string out;
  out += "corpus BLEU  A " + fmt(r.corpus_bleu[0].score) + "  B " + fmt(r.corpus_bleu[1].score) +
         "  delta " + fmt(r.corpus_bleu[1].score - r.corpus_bleu[0].score) + "\n\n";
  out += "sentence  BLEU(A) BLEU(B) dBLEU  P(A) P(B) dP  R(A) R(B) dR  F(A) F(B) dF  BP(A) BP(B) dBP\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.id);
    auto three = [&](const std::array<double, 2>& v, double d) {
      out += "  " + fmt(v[0]) + " " + fmt(v[1]) + " " + fmt(d);
    };
    three(row.bleu, row.d_bleu);
    three(row.precision, row.d_precision);
    three(row.recall, row.d_recall);
    three(row.f, row.d_f);
    three(row.bp, row.d_bp);
    out += "\n";
  }
  const char* names[2] = {"A", "B"};
  for (int s = 0; s < 2; ++s) {
    for (int kind = 0; kind < 2; ++kind) {
      const auto& tabs = kind == 0 ? r.ngrams.confirmed[s] : r.ngrams.unconfirmed[s];
      for (std::size_t n = 0; n < tabs.size(); ++n) {
        out += "\n" + std::string(kind == 0 ? "confirmed" : "unconfirmed") + " " +
               std::to_string(n + 1) + "-grams where " + names[s] + " leads\n";
        for (const auto& d : tabs[n])
          out += d.ngram + " " + fmt(d.own) + " - " + fmt(d.other) + " = " + fmt(d.diff) + "\n";
      }
    }
  }
  out += "\nMETEOR by reference length\n";
  for (const auto& bk : r.buckets)
    out += bk.name + " words  n=" + std::to_string(bk.sentences) + "  A " + fmt(bk.meteor[0]) +
           " (frag " + fmt(bk.fragmentation[0]) + ")  B " + fmt(bk.meteor[1]) + " (frag " +
           fmt(bk.fragmentation[1]) + ")\n";
  return out;
}

std::string format_report_tsv(const CompareReport& r) {
  std::string out = "#sentences\nid\tbleu_a\tbleu_b\td_bleu\tp_a\tp_b\td_p\tr_a\tr_b\td_r\tf_a\tf_b\td_f\tbp_a\tbp_b\td_bp\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.id);
    auto three = [&](const std::array<double, 2>& v, double d) {
      out += "\t" + fmt(v[0]) + "\t" + fmt(v[1]) + "\t" + fmt(d);
    };
    three(row.bleu, row.d_bleu);
    three(row.precision, row.d_precision);
    three(row.recall, row.d_recall);
    three(row.f, row.d_f);
    three(row.bp, row.d_bp);
    out += "\n";
  }
  out += "#ngrams\nsystem\tkind\tn\tngram\town\tother\tdiff\n";
  for (int s = 0; s < 2; ++s)
    for (int kind = 0; kind < 2; ++kind) {
      const auto& tabs = kind == 0 ? r.ngrams.confirmed[s] : r.ngrams.unconfirmed[s];
      for (std::size_t n = 0; n < tabs.size(); ++n)
        for (const auto& d : tabs[n])
          out += std::string(s == 0 ? "A" : "B") + "\t" + (kind == 0 ? "confirmed" : "unconfirmed") +
                 "\t" + std::to_string(n + 1) + "\t" + d.ngram + "\t" + fmt(d.own) + "\t" +
                 fmt(d.other) + "\t" + fmt(d.diff) + "\n";
    }
  out += "#meteor_by_length\nbucket\tsentences\tmeteor_a\tmeteor_b\tfrag_a\tfrag_b\n";
  for (const auto& bk : r.buckets)
    out += bk.name + "\t" + std::to_string(bk.sentences) + "\t" + fmt(bk.meteor[0]) + "\t" +
           fmt(bk.meteor[1]) + "\t" + fmt(bk.fragmentation[0]) + "\t" + fmt(bk.fragmentation[1]) + "\n";
  return out;
}

SystemScores score_system(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs) {
  check_sizes(hyps.size(), refs.size(), "evaluate");
  SystemScores s;
  s.sentences = hyps.size();
  s.bleu = bleu(hyps, refs);
  EvalCounts total;
  double wer_sum = 0, met_sum = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto c = eval_counts(hyps[i], refs[i]);
    total.correct += c.correct;
    total.output_length += c.output_length;
    total.reference_length += c.reference_length;
    wer_sum += wer(hyps[i], refs[i]);
    met_sum += meteor_lite(hyps[i], refs[i]).score;
  }
  s.precision = ratio(static_cast<double>(total.correct), static_cast<double>(total.output_length));
  s.recall = ratio(static_cast<double>(total.correct), static_cast<double>(total.reference_length));
  s.f = s.precision + s.recall == 0 ? 0 : 2 * s.precision * s.recall / (s.precision + s.recall);
  if (s.sentences) {
    s.wer = wer_sum / static_cast<double>(s.sentences);
    s.meteor = met_sum / static_cast<double>(s.sentences);
  }
  return s;
}

std::string format_scores(const SystemScores& s) {
  std::string out;
  out += "sentences\t" + std::to_string(s.sentences) + "\n";
  out += "bleu\t" + fmt(s.bleu.score) + "\n";
  for (std::size_t n = 0; n < s.bleu.precisions.size(); ++n)
    out += "bleu_p" + std::to_string(n + 1) + "\t" + fmt(s.bleu.precisions[n]) + "\n";
  out += "bleu_bp\t" + fmt(s.bleu.brevity_penalty) + "\n";
  out += "wer\t" + fmt(s.wer) + "\n";
  out += "precision\t" + fmt(s.precision) + "\n";
  out += "recall\t" + fmt(s.recall) + "\n";
  out += "f\t" + fmt(s.f) + "\n";
  out += "meteor\t" + fmt(s.meteor) + "\n";
  return out;
}

// --- human ------------------------------------------------------------------

std::vector<HumanScoreTable> read_human_scores(std::string_view text, std::string_view source) {
  std::vector<HumanScoreTable> tables;
  std::size_t n = 0;
  bool first = true;
  const std::string src(source);
  for (const auto& raw : split_on(text, "\n")) {
    ++n;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const bool tabbed = line.find('\t') != std::string_view::npos;
    std::vector<std::string> fields;
    for (const auto& f : split_on(line, tabbed ? "\t" : ",")) fields.emplace_back(trim(f));
    const bool header = first && !fields.empty() &&
                        (fields.size() < 2 || !std::all_of(fields[1].begin(), fields[1].end(), ::isdigit) ||
                         fields[1].empty());
    first = false;
    if (header) continue;
    if (fields.size() < 3 || fields.size() % 2 == 0)
      throw DataError(src, n, "expected 'id, fluency, adequacy' with score pairs per evaluator");
    const std::size_t evaluators = (fields.size() - 1) / 2;
    if (tables.empty()) tables.resize(evaluators);
    if (tables.size() != evaluators) throw DataError(src, n, "evaluator column count changed");
    for (std::size_t e = 0; e < evaluators; ++e) {
      HumanRow r;
      r.id = fields[0];
      try {
        r.fluency = static_cast<int>(parse_int(fields[1 + 2 * e], "fluency"));
        r.adequacy = static_cast<int>(parse_int(fields[2 + 2 * e], "adequacy"));
      } catch (const DataError& err) {
        throw DataError(src, n, err.what());
      }
      if (r.fluency < 1 || r.fluency > 5 || r.adequacy < 1 || r.adequacy > 5)
        throw DataError(src, n, "scores must lie in 1..5");
      tables[e].rows.push_back(r);
    }
  }
  return tables;
}

HumanSummary aggregate_human(const HumanScoreTable& t) {
  if (t.rows.empty()) throw DataError("no human scores to aggregate");
  HumanSummary s;
  s.n = t.rows.size();
  for (const auto& r : t.rows) {
    if (r.fluency < 1 || r.fluency > 5 || r.adequacy < 1 || r.adequacy > 5)
      throw DataError("sentence " + r.id + ": scores must lie in 1..5");
    s.fluency_mean += r.fluency;
    s.adequacy_mean += r.adequacy;
    s.fluency_dist[r.fluency - 1] += 1;
    s.adequacy_dist[r.adequacy - 1] += 1;
  }
  const double n = static_cast<double>(s.n);
  s.fluency_mean /= n;
  s.adequacy_mean /= n;
  for (int k = 0; k < 5; ++k) {
    s.fluency_dist[k] /= n;
    s.adequacy_dist[k] /= n;
  }
  s.fluency_percent = s.fluency_mean / 5;
  s.adequacy_percent = s.adequacy_mean / 5;
  return s;
}

std::string format_human_summary(const HumanSummary& s) {
  std::string out = "sentences\t" + std::to_string(s.n) + "\n";
  out += "fluency_mean\t" + fmt(s.fluency_mean) + "\n";
  out += "fluency_percent\t" + fmt(100 * s.fluency_percent) + "\n";
  out += "adequacy_mean\t" + fmt(s.adequacy_mean) + "\n";
  out += "adequacy_percent\t" + fmt(100 * s.adequacy_percent) + "\n";
  for (int k = 0; k < 5; ++k)
    out += "fluency_at_" + std::to_string(k + 1) + "\t" + fmt(s.fluency_dist[k]) + "\n";
  for (int k = 0; k < 5; ++k)
    out += "adequacy_at_" + std::to_string(k + 1) + "\t" + fmt(s.adequacy_dist[k]) + "\n";
  return out;
}

}  // namespace desksmt::eval
