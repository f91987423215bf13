#include <cmath>

#include "desksmt/decoder.hpp"
#include "desksmt/error.hpp"
#include "hypergraph.hpp"

namespace desksmt::decoder {

const std::array<std::string_view, kNumFeatures>& feature_names() {
  static const std::array<std::string_view, kNumFeatures> names{
      "lm",             "phi_s_given_t", "lex_s_given_t", "phi_t_given_s",
      "lex_t_given_s",  "phrase_penalty", "word_penalty", "distortion",
      "reorder_fwd",    "reorder_bwd",   "glue",          "oov"};
  return names;
}

int feature_index(std::string_view name) {
  const auto& n = feature_names();
  for (int k = 0; k < kNumFeatures; ++k)
    if (n[k] == name) return k;
  return -1;
}

FeatureVector& operator+=(FeatureVector& a, const FeatureVector& b) {
  for (int k = 0; k < kNumFeatures; ++k) a[k] += b[k];
  return a;
}

FeatureWeights FeatureWeights::defaults() {
  FeatureWeights f;
  f.w[kLm] = 0.5;
  f.w[kPhiSgivenT] = 0.2;
  f.w[kLexSgivenT] = 0.2;
  f.w[kPhiTgivenS] = 0.2;
  f.w[kLexTgivenS] = 0.2;
  f.w[kPhrasePenalty] = 0.2;
  f.w[kWordPenalty] = 0.5;
  f.w[kDistortion] = 0.3;
  f.w[kReorderFwd] = 0.3;
  f.w[kReorderBwd] = 0.3;
  f.w[kGlue] = -0.1;
  f.w[kOov] = -10;
  return f;
}

double FeatureWeights::dot(const FeatureVector& h) const {
  double s = 0;
  for (int k = 0; k < kNumFeatures; ++k) s += w[k] * h[k];
  return s;
}

double FeatureWeights::get(std::string_view name) const {
  int k = feature_index(name);
  if (k < 0) throw UsageError("unknown feature '" + std::string(name) + "'");
  return w[k];
}

void FeatureWeights::set(std::string_view name, double v) {
  int k = feature_index(name);
  if (k < 0) throw UsageError("unknown feature '" + std::string(name) + "'");
  if (!std::isfinite(v)) throw DataError("weight for '" + std::string(name) + "' is not finite");
  w[k] = v;
}

std::string FeatureWeights::write(const std::vector<std::string>& comments) const {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "version\t" + std::string(kWeightsVersion) + "\n";
  for (int k = 0; k < kNumFeatures; ++k)
    out += std::string(feature_names()[k]) + "\t" + format_g(w[k], 17) + "\n";
  return out;
}

FeatureWeights FeatureWeights::read(std::string_view text, std::string_view source) {
  FeatureWeights f = defaults();
  bool versioned = false;
  std::size_t n = 0;
  const std::string src(source);
  for (const auto& raw : split_on(text, "\n")) {
    ++n;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto sep = line.find_first_of("\t=");
    if (sep == std::string_view::npos) throw DataError(src, n, "expected 'name<TAB>value'");
    auto key = trim(line.substr(0, sep));
    auto val = trim(line.substr(sep + 1));
    if (key == "version") {
      if (val != kWeightsVersion)
        throw DataError(src, n, "unsupported weights version '" + std::string(val) + "'");
      versioned = true;
      continue;
    }
    int k = feature_index(key);
    if (k < 0) throw DataError(src, n, "unknown feature '" + std::string(key) + "'");
    f.w[k] = parse_double(val, "weight");
    if (!std::isfinite(f.w[k])) throw DataError(src, n, "weight is not finite");
  }
  if (!versioned) throw DataError(src + ": weights file lacks a 'version' line");
  return f;
}

namespace {

double log10_or_uniform(const std::vector<double>& row, int o, std::size_t k) {
  if (row.empty()) return std::log10(1.0 / static_cast<double>(k));
  return std::log10(row.at(o));
}

}  // namespace

namespace detail {

int orientation(int prev_start, int prev_end, int start, int end, phrasetab::OrientationSet set,
                bool backward) {
  if (start == prev_end + 1) return 0;
  if (end == prev_start - 1) return 1;
  if (set == phrasetab::OrientationSet::kMsd) return 2;
  // The forward model labels by where the previous phrase lies, the
  // backward model by where the next one lies.
  bool next_right = start > prev_end;
  if (backward) return next_right ? 3 : 2;
  return next_right ? 2 : 3;
}

}  // namespace detail

FeatureVector phrase_features(int source_len, const std::vector<PhraseStep>& steps,
                              const lm::NGramModel& lm, const ReorderingSpec& reo) {
  FeatureVector f{};
  std::vector<lm::WordId> ctx{corpus::Vocabulary::kBos};
  int prev_start = -1, prev_end = -1;
  const PhraseStep* prev = nullptr;
  const std::size_t k = reo.table ? reo.table->orientations() : 3;
  std::vector<char> covered(std::max(source_len, 0), 0);
  for (const auto& st : steps) {
    for (int i = st.s1; i <= st.s2; ++i) {
      if (i < 0 || i >= source_len || covered[i])
        throw InvariantError("phrase derivation covers a source word twice or out of range");
      covered[i] = 1;
    }
    for (int i = 0; i < 4; ++i) f[kPhiSgivenT + i] += std::log10(st.scores[i]);
    f[kPhrasePenalty] += 1;
    f[kWordPenalty] += static_cast<double>(st.tgt.size());
    if (st.oov) f[kOov] += static_cast<double>(st.s2 - st.s1 + 1);
    f[kDistortion] -= std::abs(st.s1 - prev_end - 1);
    if (reo.table) {
      int o = detail::orientation(prev_start, prev_end, st.s1, st.s2, reo.set(), false);
      f[kReorderFwd] += log10_or_uniform(st.reo_fwd, o, k);
      if (prev && reo.table->bidirectional) {
        int ob = detail::orientation(prev_start, prev_end, st.s1, st.s2, reo.set(), true);
        f[kReorderBwd] += log10_or_uniform(prev->reo_bwd, ob, k);
      }
    }
    for (const auto& w : st.tgt) {
      lm::WordId id = lm.id_of(w);
      f[kLm] += lm.score(ctx, id);
      ctx.push_back(id);
    }
    prev_start = st.s1;
    prev_end = st.s2;
    prev = &st;
  }
  for (char c : covered)
    if (!c) throw InvariantError("phrase derivation leaves a source word uncovered");
  f[kLm] += lm.score(ctx, corpus::Vocabulary::kEos);
  if (reo.table && prev && reo.table->bidirectional) {
    int ob = detail::orientation(prev_start, prev_end, source_len, source_len, reo.set(), true);
    f[kReorderBwd] += log10_or_uniform(prev->reo_bwd, ob, k);
  }
  return f;
}

namespace {

void rule_static(const RuleApplication& r, FeatureVector& f) {
  for (int i = 0; i < 4; ++i) f[kPhiSgivenT + i] += std::log10(r.scores[i]);
  if (r.glue) {
    f[kGlue] += 1;
  } else {
    f[kPhrasePenalty] += 1;
  }
  for (const auto& s : r.tgt) f[kWordPenalty] += s.is_nt() ? 0 : 1;
  f[kOov] += r.oov_words;
  for (const auto& c : r.children) rule_static(c, f);
}

void yield_into(const RuleApplication& r, Tokens& out) {
  for (const auto& s : r.tgt) {
    if (s.is_nt())
      yield_into(r.children.at(s.nt), out);
    else
      out.push_back(s.text);
  }
}

}  // namespace

Tokens rule_yield(const RuleApplication& root) {
  Tokens out;
  yield_into(root, out);
  return out;
}

FeatureVector rule_features(const RuleApplication& root, const lm::NGramModel& lm) {
  FeatureVector f{};
  rule_static(root, f);
  f[kLm] = lm.score_sentence(rule_yield(root)).total;
  return f;
}

namespace detail {

double lm_inner(const lm::NGramModel& lm, const std::vector<lm::WordId>& ids) {
  double s = 0;
  const std::size_t keep = static_cast<std::size_t>(lm.order() - 1);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    std::size_t b = k > keep ? k - keep : 0;
    s += lm.score(std::span<const lm::WordId>(ids.data() + b, k - b), ids[k]);
  }
  return s;
}

std::string LmState::key() const {
  std::string k;
  auto put = [&](const std::vector<lm::WordId>& v) {
    k.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(lm::WordId));
    k.push_back('|');
  };
  put(left);
  put(right);
  k.push_back(len > left.size() ? 'L' : 'S');
  return k;
}

LmState combine_lm(const lm::NGramModel& lm, const std::vector<ruletab::Symbol>& tgt,
                   const std::vector<const LmState*>& kids, double& delta) {
  const std::size_t keep = static_cast<std::size_t>(lm.order() - 1);
  LmState out;
  std::vector<lm::WordId> ctx;
  bool gap = false;  // a long child broke the running context
  auto score_into = [&](lm::WordId w) {
    std::size_t b = ctx.size() > keep ? ctx.size() - keep : 0;
    double s = lm.score(std::span<const lm::WordId>(ctx.data() + b, ctx.size() - b), w);
    ctx.push_back(w);
    if (!gap && out.left.size() < keep) out.left.push_back(w);
    return s;
  };
  delta = 0;
  for (const auto& sym : tgt) {
    if (!sym.is_nt()) {
      delta += score_into(lm.id_of(sym.text));
      ++out.len;
      continue;
    }
    const LmState& c = *kids.at(sym.nt);
    for (std::size_t k = 0; k < c.left.size(); ++k) {
      double old = lm.score(std::span<const lm::WordId>(c.left.data(), k), c.left[k]);
      delta += score_into(c.left[k]) - old;
    }
    out.len += c.len;
    if (c.len > c.left.size()) {
      gap = true;
      ctx = c.right;
    }
  }
  if (ctx.size() > keep) ctx.erase(ctx.begin(), ctx.end() - static_cast<std::ptrdiff_t>(keep));
  out.right = std::move(ctx);
  return out;
}

double finish_lm(const lm::NGramModel& lm, const LmState& s) {
  std::vector<lm::WordId> ctx{corpus::Vocabulary::kBos};
  double d = 0;
  for (std::size_t k = 0; k < s.left.size(); ++k) {
    d += lm.score(ctx, s.left[k]) - lm.score(std::span<const lm::WordId>(s.left.data(), k), s.left[k]);
    ctx.push_back(s.left[k]);
  }
  std::vector<lm::WordId> tail = s.len > s.left.size() ? s.right : ctx;
  d += lm.score(tail, corpus::Vocabulary::kEos);
  return d;
}

void check_rescore(double search_score, const FeatureVector& rescored, const FeatureWeights& w) {
  double r = w.dot(rescored);
  if (std::abs(r - search_score) > 1e-9)
    throw InvariantError("derivation re-score " + format_g(r, 17) + " differs from search score " +
                         format_g(search_score, 17));
}

}  // namespace detail

std::string format_nbest(std::size_t sent_id, const Translation& t) {
  std::string out = std::to_string(sent_id) + " ||| " + join(t.target) + " |||";
  for (int k = 0; k < kNumFeatures; ++k)
    out += " " + std::string(feature_names()[k]) + "=" + format_g(t.features[k], 10);
  out += " ||| " + format_g(t.score, 10);
  return out;
}

NBestEntry parse_nbest_line(std::string_view line) {
  auto parts = split_on(line, "|||");
  if (parts.size() != 4) throw DataError("n-best line needs 4 '|||' fields");
  NBestEntry e;
  e.sent_id = static_cast<std::size_t>(parse_int(trim(parts[0]), "sentence id"));
  e.target = split_ws(parts[1]);
  std::vector<char> seen(kNumFeatures, 0);
  for (const auto& kv : split_ws(parts[2])) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw DataError("bad feature '" + kv + "'");
    int k = feature_index(std::string_view(kv).substr(0, eq));
    if (k < 0) throw DataError("unknown feature '" + kv.substr(0, eq) + "'");
    e.features[k] = parse_double(std::string_view(kv).substr(eq + 1), "feature value");
    seen[k] = 1;
  }
  e.score = parse_double(trim(parts[3]), "total score");
  return e;
}

std::vector<NBestEntry> read_nbest(std::string_view text) {
  std::vector<NBestEntry> out;
  std::size_t n = 0;
  for (const auto& line : split_on(text, "\n")) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_nbest_line(line));
    } catch (const DataError& e) {
      throw DataError("<n-best>", n, e.what());
    }
  }
  return out;
}

}  // namespace desksmt::decoder
