#include "desksmt/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "desksmt/error.hpp"

namespace desksmt::lm {

namespace {

constexpr std::size_t kCountShard = 256;
constexpr double kBosLogprob = -99;

using Vocab = corpus::Vocabulary;

std::vector<WordId> unpack(const std::string& k) {
  std::vector<WordId> ids(k.size() / sizeof(WordId));
  std::memcpy(ids.data(), k.data(), k.size());
  return ids;
}

WordId first_id(const std::string& k) {
  WordId w;
  std::memcpy(&w, k.data(), sizeof w);
  return w;
}

OrderDiscounts estimate_discounts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                  const DiscountMode& mode, bool skip_bos) {
  OrderDiscounts od;
  od.d = {mode.fixed, mode.fixed, mode.fixed};
  if (!mode.counts_of_counts) return od;
  std::array<double, 5> n{};
  for (const auto& [k, c] : counts) {
    if (skip_bos && first_id(k) == Vocab::kBos) continue;
    if (c >= 1 && c <= 4) n[c] += 1;
  }
  if (n[1] == 0 || n[2] == 0 || n[3] == 0 || n[4] == 0) {
    od.fell_back = true;
    return od;
  }
  double y = n[1] / (n[1] + 2 * n[2]);
  std::array<double, 3> d{1 - 2 * y * n[2] / n[1], 2 - 3 * y * n[3] / n[2],
                          3 - 4 * y * n[4] / n[3]};
  for (int i = 0; i < 3; ++i) {
    if (!(d[i] >= 0 && d[i] <= i + 1)) {
      od.fell_back = true;
      return od;
    }
  }
  od.d = d;
  return od;
}

double discount_for(const OrderDiscounts& od, std::uint64_t c) {
  double d = od.d[std::min<std::uint64_t>(c, 3) - 1];
  return std::min(d, static_cast<double>(c));
}

}  // namespace

NGramModel::NGramModel(int order) : order_(order), tables_(order) {}

std::string NGramModel::key(std::span<const WordId> ids) {
  std::string k(ids.size() * sizeof(WordId), '\0');
  if (!ids.empty()) std::memcpy(k.data(), ids.data(), k.size());
  return k;
}

const NGramEntry* NGramModel::find(std::span<const WordId> ngram) const {
  if (ngram.empty() || ngram.size() > tables_.size()) return nullptr;
  const auto& t = tables_[ngram.size() - 1];
  auto it = t.find(key(ngram));
  return it == t.end() ? nullptr : &it->second;
}

void NGramModel::set(std::span<const WordId> ngram, NGramEntry e) {
  if (ngram.empty() || ngram.size() > tables_.size())
    throw InvariantError("n-gram length outside model order");
  tables_[ngram.size() - 1][key(ngram)] = e;
}

std::vector<std::pair<std::vector<WordId>, NGramEntry>> NGramModel::entries(int k) const {
  std::vector<std::pair<std::vector<WordId>, NGramEntry>> out;
  for (const auto& [key, e] : tables_.at(k - 1)) out.emplace_back(unpack(key), e);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

double NGramModel::score(std::span<const WordId> history, WordId w) const {
  const std::size_t keep = std::min<std::size_t>(history.size(), order_ - 1);
  std::vector<WordId> buf(history.end() - keep, history.end());
  buf.push_back(w);
  double bow = 0;
  for (std::size_t start = 0; start <= keep; ++start) {
    std::span<const WordId> ngram(buf.data() + start, buf.size() - start);
    if (const auto* e = find(ngram)) return bow + e->logprob;
    if (start < keep) {
      if (const auto* h = find(ngram.first(ngram.size() - 1))) bow += h->backoff;
    }
  }
  return bow + unk_logprob_;
}

double NGramModel::score_word(const Tokens& history, std::string_view word) const {
  std::vector<WordId> h;
  h.reserve(history.size());
  for (const auto& t : history) h.push_back(vocab_.id_of(t));
  return score(h, vocab_.id_of(word));
}

SentenceScore NGramModel::score_sentence(const Tokens& tokens) const {
  std::vector<WordId> ctx{Vocab::kBos};
  SentenceScore s;
  for (const auto& t : tokens) {
    WordId w = vocab_.id_of(t);
    s.total += score(ctx, w);
    ctx.push_back(w);
  }
  s.total += score(ctx, Vocab::kEos);
  s.perplexity = std::pow(10.0, -s.total / static_cast<double>(tokens.size() + 1));
  return s;
}

NGramModel train_lm(const std::vector<Tokens>& corpus, int order,
                    DiscountMode mode, int jobs) {
  if (order < 2) throw UsageError("LM order must be at least 2");
  std::size_t ntok = 0;
  for (const auto& s : corpus) ntok += s.size();
  if (corpus.empty() || ntok == 0) throw DataError("cannot train an LM on an empty corpus");

  NGramModel m(order);
  Vocab& vocab = m.mutable_vocab();
  std::vector<std::vector<WordId>> padded;
  padded.reserve(corpus.size());
  for (const auto& s : corpus) {
    std::vector<WordId> ids{Vocab::kBos};
    for (const auto& t : s) {
      if (t == Vocab::kBosStr || t == Vocab::kEosStr || t == Vocab::kNullStr)
        throw DataError("reserved token '" + t + "' inside LM training text");
      ids.push_back(vocab.add(t));
    }
    ids.push_back(Vocab::kEos);
    padded.push_back(std::move(ids));
  }

  using CountTable = std::unordered_map<std::string, std::uint64_t>;
  const std::size_t nshards = shard_count(padded.size(), kCountShard);
  std::vector<std::vector<CountTable>> shard_counts(nshards, std::vector<CountTable>(order));
  for_each_shard(padded.size(), kCountShard, jobs,
                 [&](std::size_t shard, std::size_t b, std::size_t e) {
                   auto& tables = shard_counts[shard];
                   for (std::size_t i = b; i < e; ++i) {
                     const auto& s = padded[i];
                     for (int k = 1; k <= order; ++k) {
                       for (std::size_t p = 0; p + k <= s.size(); ++p) {
                         std::string key(k * sizeof(WordId), '\0');
                         std::memcpy(key.data(), s.data() + p, key.size());
                         ++tables[k - 1][key];
                       }
                     }
                   }
                 });
  std::vector<CountTable> raw(order);
  for (auto& tables : shard_counts)
    for (int k = 0; k < order; ++k)
      for (auto& [key, c] : tables[k]) raw[k][key] += c;
  shard_counts.clear();

  // Counts that drive each order: raw at the top and for <s>-initial
  // n-grams, distinct left extensions otherwise.
  std::vector<CountTable> adj(order);
  adj[order - 1] = raw[order - 1];
  for (int k = order - 1; k >= 1; --k) {
    CountTable& a = adj[k - 1];
    for (const auto& [key, c] : raw[k]) ++a[key.substr(sizeof(WordId))];
    for (const auto& [key, c] : raw[k - 1])
      if (first_id(key) == Vocab::kBos) a[key] = c;
    for (const auto& [key, c] : raw[k - 1])
      if (!a.count(key)) a[key] = c;  // only "<s>" itself can reach here
  }

  std::vector<OrderDiscounts> discounts(order);
  for (int k = 1; k <= order; ++k)
    discounts[k - 1] = estimate_discounts(adj[k - 1], mode, k == 1);
  m.set_discounts(discounts);

  // Unigrams, interpolated with the uniform distribution over the
  // vocabulary minus <s> (and minus the reserved NULL id).
  std::vector<double> prob1(vocab.size(), 0.0);
  {
    double total = 0, held = 0;
    for (const auto& [key, c] : adj[0]) {
      if (first_id(key) == Vocab::kBos) continue;
      total += c;
      held += discount_for(discounts[0], c);
    }
    const double gamma = held / total;
    const double vsize = static_cast<double>(vocab.size() - 2);
    for (WordId w = 0; w < vocab.size(); ++w) {
      if (w == Vocab::kNull || w == Vocab::kBos) continue;
      double c = 0;
      std::string key(sizeof(WordId), '\0');
      std::memcpy(key.data(), &w, sizeof w);
      if (auto it = adj[0].find(key); it != adj[0].end()) c = static_cast<double>(it->second);
      double p = (c > 0 ? (c - discount_for(discounts[0], static_cast<std::uint64_t>(c))) / total : 0.0) +
                 gamma / vsize;
      prob1[w] = p;
      m.set(std::span<const WordId>(&w, 1), {std::log10(p), 0});
    }
    WordId bos = Vocab::kBos;
    m.set(std::span<const WordId>(&bos, 1), {kBosLogprob, 0});
    m.set_unk_logprob(std::log10(prob1[Vocab::kUnk]));
  }

  // Higher orders; backoff weights of order-k histories are set on the
  // (k-1)-gram entries.
  std::unordered_map<std::string, double> lower;  // linear probs of order k-1
  for (WordId w = 0; w < vocab.size(); ++w) {
    if (w == Vocab::kNull || w == Vocab::kBos) continue;
    std::string key(sizeof(WordId), '\0');
    std::memcpy(key.data(), &w, sizeof w);
    lower[key] = prob1[w];
  }
  for (int k = 2; k <= order; ++k) {
    struct HistStats {
      double total = 0;
      double held = 0;
    };
    std::unordered_map<std::string, HistStats> hist;
    const auto& od = discounts[k - 1];
    for (const auto& [key, c] : adj[k - 1]) {
      auto& h = hist[key.substr(0, (k - 1) * sizeof(WordId))];
      h.total += c;
      h.held += discount_for(od, c);
    }
    std::unordered_map<std::string, double> current;
    for (const auto& [key, c] : adj[k - 1]) {
      const auto& h = hist.at(key.substr(0, (k - 1) * sizeof(WordId)));
      double gamma = h.held / h.total;
      auto low = lower.find(key.substr(sizeof(WordId)));
      if (low == lower.end()) throw InvariantError("missing lower-order n-gram during LM training");
      double p = (c - discount_for(od, c)) / h.total + gamma * low->second;
      current[key] = p;
      auto ids = unpack(key);
      m.set(ids, {std::log10(p), 0});
    }
    for (const auto& [hkey, h] : hist) {
      auto ids = unpack(hkey);
      const NGramEntry* e = m.find(ids);
      if (!e) throw InvariantError("LM history without a stored entry");
      NGramEntry upd = *e;
      upd.backoff = std::log10(h.held / h.total);
      if (h.held == 0) upd.backoff = kBosLogprob;  // no mass left for unseen words
      m.set(ids, upd);
    }
    lower = std::move(current);
  }
  return m;
}

double corpus_perplexity(const NGramModel& m, const std::vector<Tokens>& corpus) {
  double total = 0, n = 0;
  for (const auto& s : corpus) {
    total += m.score_sentence(s).total;
    n += static_cast<double>(s.size() + 1);
  }
  return n == 0 ? 1.0 : std::pow(10.0, -total / n);
}

std::string write_arpa(const NGramModel& m) {
  std::string out = "\\data\\\n";
  for (int k = 1; k <= m.order(); ++k)
    out += "ngram " + std::to_string(k) + "=" + std::to_string(m.count(k)) + "\n";
  const auto& v = m.vocab();
  for (int k = 1; k <= m.order(); ++k) {
    out += "\n\\" + std::to_string(k) + "-grams:\n";
    for (const auto& [ids, e] : m.entries(k)) {
      out += format_g(e.logprob, 9) + "\t";
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ' ';
        out += v.string_of(ids[i]);
      }
      if (k < m.order()) out += "\t" + format_g(e.backoff, 9);
      out += "\n";
    }
  }
  out += "\n\\end\\\n";
  return out;
}

NGramModel read_arpa(std::string_view text) {
  std::vector<std::string> lines;
  for (auto& l : split_on(text, "\n")) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(l);
  }
  std::size_t i = 0;
  auto skip_blank = [&] {
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
  };
  skip_blank();
  if (i >= lines.size() || trim(lines[i]) != "\\data\\")
    throw DataError("ARPA: missing \\data\\ header");
  ++i;
  std::map<int, std::size_t> declared;
  while (i < lines.size() && starts_with(trim(lines[i]), "ngram ")) {
    std::string_view l = trim(lines[i]).substr(6);
    auto eq = l.find('=');
    if (eq == std::string_view::npos) throw DataError("ARPA: malformed count line '" + lines[i] + "'");
    int k = static_cast<int>(parse_int(trim(l.substr(0, eq)), "ARPA order"));
    declared[k] = static_cast<std::size_t>(parse_int(trim(l.substr(eq + 1)), "ARPA count"));
    ++i;
  }
  if (declared.empty()) throw DataError("ARPA: no ngram count lines");
  const int order = declared.rbegin()->first;
  for (int k = 1; k <= order; ++k)
    if (!declared.count(k)) throw DataError("ARPA: missing count for order " + std::to_string(k));
  if (order < 1) throw DataError("ARPA: bad order");

  NGramModel m(order);
  bool have_unk = false;
  for (int k = 1; k <= order; ++k) {
    skip_blank();
    const std::string header = "\\" + std::to_string(k) + "-grams:";
    if (i >= lines.size() || trim(lines[i]) != header)
      throw DataError("ARPA: expected section header '" + header + "'" +
                      (i < lines.size() ? ", got '" + lines[i] + "'" : ""));
    ++i;
    std::size_t seen = 0;
    for (; i < lines.size(); ++i) {
      std::string_view l = trim(lines[i]);
      if (l.empty() || l.front() == '\\') break;
      auto cols = split_on(lines[i], "\t");
      if (cols.size() < 2 || cols.size() > 3)
        throw DataError("ARPA: malformed line in " + header + ": '" + lines[i] + "'");
      NGramEntry e;
      e.logprob = parse_double(trim(cols[0]), "ARPA logprob");
      if (cols.size() == 3) e.backoff = parse_double(trim(cols[2]), "ARPA backoff");
      auto words = split_ws(cols[1]);
      if (static_cast<int>(words.size()) != k)
        throw DataError("ARPA: line in " + header + " has " + std::to_string(words.size()) + " words");
      std::vector<WordId> ids;
      for (const auto& w : words) {
        if (k == 1) {
          ids.push_back(m.mutable_vocab().add(w));
        } else {
          auto id = m.vocab().find(w);
          if (!id) throw DataError("ARPA: word '" + w + "' in " + header + " is not a unigram");
          ids.push_back(*id);
        }
      }
      if (k == 1 && ids[0] == corpus::Vocabulary::kUnk) {
        have_unk = true;
        m.set_unk_logprob(e.logprob);
      }
      m.set(ids, e);
      ++seen;
    }
    if (seen != declared[k])
      throw DataError("ARPA: section " + header + " has " + std::to_string(seen) +
                      " entries but \\data\\ declares " + std::to_string(declared[k]));
  }
  skip_blank();
  if (i >= lines.size() || trim(lines[i]) != "\\end\\") throw DataError("ARPA: missing \\end\\");
  if (!have_unk) m.set_unk_logprob(-100);
  return m;
}

}  // namespace desksmt::lm
