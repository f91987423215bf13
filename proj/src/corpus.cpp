#include "desksmt/corpus.hpp"

#include <algorithm>

#include "desksmt/error.hpp"

namespace desksmt::corpus {

namespace {

constexpr char32_t kDanda = 0x0964;
constexpr char32_t kDoubleDanda = 0x0965;

bool is_ascii_punct(char32_t c) {
  return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
         (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
}

bool is_split_punct(char32_t c) {
  return is_ascii_punct(c) || c == kDanda || c == kDoubleDanda;
}

bool is_digit(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= 0x0966 && c <= 0x096F);
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0x00A0 || c == 0x2009 || c == 0x200A || c == 0x3000;
}

bool is_closing(std::string_view t) {
  return t == "." || t == "?" || t == "!" || t == "," || t == "।" ||
         t == "॥";
}

}  // namespace

LangProfile parse_profile(std::string_view name) {
  if (name == "english" || name == "en") return LangProfile::kEnglish;
  if (name == "devanagari" || name == "bho" || name == "hi")
    return LangProfile::kDevanagari;
  throw UsageError("unknown language profile '" + std::string(name) +
                   "' (expected english|devanagari)");
}

std::string_view profile_name(LangProfile p) {
  return p == LangProfile::kEnglish ? "english" : "devanagari";
}

Token Token::parse(std::string_view text) {
  if (text.empty()) throw DataError("empty token");
  for (char c : text)
    if (c == ' ' || c == '\t' || c == '\n')
      throw DataError("token contains whitespace: '" + std::string(text) + "'");
  Token t;
  t.factors = split_on(text, std::string_view(&kFactorSeparator, 1));
  for (const auto& f : t.factors)
    if (f.empty())
      throw DataError("empty factor in token '" + std::string(text) + "'");
  t.surface = t.factors.front();
  return t;
}

std::string Token::str() const {
  return join(factors, std::string_view(&kFactorSeparator, 1));
}

Vocabulary::Vocabulary() {
  for (auto w : {kNullStr, kBosStr, kEosStr, kUnkStr}) add(w);
}

WordId Vocabulary::add(std::string_view word) {
  if (auto it = ids_.find(std::string(word)); it != ids_.end())
    return it->second;
  auto id = static_cast<WordId>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(words_.back(), id);
  return id;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  if (auto it = ids_.find(std::string(word)); it != ids_.end())
    return it->second;
  return std::nullopt;
}

WordId Vocabulary::id_of(std::string_view word) const {
  return find(word).value_or(kUnk);
}

const std::string& Vocabulary::string_of(WordId id) const {
  if (id >= words_.size())
    throw InvariantError("vocabulary id out of range: " + std::to_string(id));
  return words_[id];
}

Tokens tokenize_line(std::string_view line, LangProfile profile) {
  const std::u32string cps = utf8_decode(line);
  Tokens out;
  std::u32string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(utf8_encode(cur));
      cur.clear();
    }
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    char32_t c = cps[i];
    if (is_space(c) || c == U'\n') {
      flush();
      continue;
    }
    if (is_split_punct(c)) {
      // Decimal and thousands separators stay inside numbers.
      bool in_number = (c == U'.' || c == U',') && i > 0 &&
                       i + 1 < cps.size() && is_digit(cps[i - 1]) &&
                       is_digit(cps[i + 1]);
      if (!in_number) {
        flush();
        out.push_back(utf8_encode(c));
        continue;
      }
    }
    if (profile == LangProfile::kEnglish && c >= U'A' && c <= U'Z')
      c = c - U'A' + U'a';
    cur.push_back(c);
  }
  flush();
  return out;
}

std::vector<Tokens> tokenize(std::string_view text, LangProfile profile) {
  utf8_decode(text);  // reports offsets relative to the whole text
  std::vector<Tokens> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    out.push_back(tokenize_line(text.substr(start, nl - start), profile));
    start = nl + 1;
  }
  return out;
}

std::vector<SentencePair> clean(std::vector<SentencePair> pairs,
                                std::size_t max_len) {
  if (max_len < 1) throw UsageError("clean: max_len must be >= 1");
  std::erase_if(pairs, [&](const SentencePair& p) {
    return p.source.empty() || p.target.empty() || p.source.size() > max_len ||
           p.target.size() > max_len;
  });
  return pairs;
}

std::string detokenize(const Tokens& tokens, LangProfile /*profile*/) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && !is_closing(tokens[i])) out += ' ';
    out += tokens[i];
  }
  return out;
}

Tokens project_factors(const Tokens& factored,
                       const std::set<std::size_t>& keep) {
  Tokens out;
  out.reserve(factored.size());
  for (std::size_t pos = 0; pos < factored.size(); ++pos) {
    Token t = Token::parse(factored[pos]);
    std::string projected;
    for (std::size_t k : keep) {
      if (k >= t.factors.size())
        throw DataError("token " + std::to_string(pos) + " ('" +
                        factored[pos] + "') has no factor " +
                        std::to_string(k));
      if (!projected.empty()) projected += kFactorSeparator;
      projected += t.factors[k];
    }
    out.push_back(std::move(projected));
  }
  return out;
}

std::vector<Tokens> read_corpus(const std::string& path) {
  std::vector<Tokens> out;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    try {
      utf8_decode(line);
    } catch (const DataError& e) {
      throw DataError(path, lineno, e.what());
    }
    out.push_back(split_ws(line));
  }
  return out;
}

std::vector<SentencePair> read_parallel(const std::string& source_path,
                                        const std::string& target_path) {
  auto src = read_corpus(source_path);
  auto tgt = read_corpus(target_path);
  if (src.size() != tgt.size())
    throw DataError(target_path, std::min(src.size(), tgt.size()) + 1,
                    "parallel corpus line count mismatch (" +
                        std::to_string(src.size()) + " vs " +
                        std::to_string(tgt.size()) + ")");
  std::vector<SentencePair> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    out[i].source = std::move(src[i]);
    out[i].target = std::move(tgt[i]);
  }
  return out;
}

std::string write_corpus(const std::vector<Tokens>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += join(s);
    out += '\n';
  }
  return out;
}

}  // namespace desksmt::corpus
