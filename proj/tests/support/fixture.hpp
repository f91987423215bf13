#pragma once

// Synthetic English -> Bhojpuri-like parallel data: SVO becomes SOV, "the"
// has no translation, "a" becomes "एगो".

#include <cstdint>
#include <string>
#include <vector>

#include "desksmt/lm.hpp"
#include "desksmt/phrasetab.hpp"

namespace fixture {

struct ParallelLine {
  std::string source;
  std::string target;
};

std::vector<ParallelLine> synthetic_corpus(std::size_t n, std::uint64_t seed = 7);

// Writes train/dev/test files (800/100/100 for n = 1000) and a pipeline
// config into `dir`; returns the config path.
std::string write_pipeline_fixture(const std::string& dir, std::size_t n = 1000,
                                   const std::string& extra_config = "");

// Phrase system trained on the first `n` synthetic pairs.
struct PhraseSystem {
  desksmt::lm::NGramModel lm;
  desksmt::phrasetab::PhraseTable table;
  desksmt::phrasetab::ReorderingTable reordering;
  std::vector<std::string> source_words;
};

PhraseSystem train_phrase_system(std::size_t n, int max_phrase_len = 3);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_;
};

}  // namespace fixture
