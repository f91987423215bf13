#pragma once

// Text ingestion: tokenization, cleaning, factored tokens, vocabularies and
// de-tokenization.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "desksmt/util.hpp"

namespace desksmt::corpus {

enum class LangProfile { kEnglish, kDevanagari };

LangProfile parse_profile(std::string_view name);
std::string_view profile_name(LangProfile p);

inline constexpr char kFactorSeparator = '|';

// A word with its factors; factors[0] is always the surface form.
struct Token {
  std::string surface;
  std::vector<std::string> factors;

  // Parses "surface|factor1|..."; rejects empty factors and whitespace.
  static Token parse(std::string_view text);
  std::string str() const;
};

using WordId = std::uint32_t;

// Dense bidirectional string <-> id map with four reserved ids.
class Vocabulary {
 public:
  static constexpr WordId kNull = 0;
  static constexpr WordId kBos = 1;
  static constexpr WordId kEos = 2;
  static constexpr WordId kUnk = 3;
  static constexpr std::string_view kNullStr = "NULL";
  static constexpr std::string_view kBosStr = "<s>";
  static constexpr std::string_view kEosStr = "</s>";
  static constexpr std::string_view kUnkStr = "<unk>";

  Vocabulary();

  // Registers `word` if new; returns its id either way.
  WordId add(std::string_view word);
  std::optional<WordId> find(std::string_view word) const;
  // Unknown strings map to kUnk.
  WordId id_of(std::string_view word) const;
  const std::string& string_of(WordId id) const;
  std::size_t size() const { return words_.size(); }
  bool operator==(const Vocabulary& o) const { return words_ == o.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
};

struct SentencePair {
  Tokens source;
  Tokens target;
  // Index into a caller-held list of dependency trees, when the source side
  // carries one.
  std::optional<std::size_t> source_tree;

  bool operator==(const SentencePair&) const = default;
};

// One token sequence per input line. A trailing newline does not start an
// extra line.
std::vector<Tokens> tokenize(std::string_view text, LangProfile profile);
Tokens tokenize_line(std::string_view line, LangProfile profile);

// Drops pairs with an empty side or a side longer than max_len tokens.
std::vector<SentencePair> clean(std::vector<SentencePair> pairs,
                                std::size_t max_len = 80);

std::string detokenize(const Tokens& tokens, LangProfile profile);

// Keeps the requested factor indices of each factored token, '|'-joined in
// index order.
Tokens project_factors(const Tokens& factored, const std::set<std::size_t>& keep);

// Whitespace-split corpus, one sentence per line.
std::vector<Tokens> read_corpus(const std::string& path);
// Two files of equal line count.
std::vector<SentencePair> read_parallel(const std::string& source_path,
                                        const std::string& target_path);
std::string write_corpus(const std::vector<Tokens>& sentences);

}  // namespace desksmt::corpus
