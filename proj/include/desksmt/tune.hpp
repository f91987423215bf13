#pragma once

// Minimum-error-rate training: coordinate and random-direction line
// searches over the exact piecewise-linear envelope of an accumulated
// n-best pool, maximizing corpus BLEU.

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "desksmt/decoder.hpp"
#include "desksmt/eval.hpp"

namespace desksmt::tune {

using decoder::FeatureVector;
using decoder::FeatureWeights;

struct PoolEntry {
  Tokens target;
  FeatureVector features{};
};

class NBestPool {
 public:
  explicit NBestPool(std::size_t sentences = 0) : entries_(sentences), seen_(sentences) {}

  // False when the sentence already holds this target string.
  bool add(std::size_t sent, Tokens target, const FeatureVector& f);
  std::size_t sentences() const { return entries_.size(); }
  std::size_t size() const;
  const std::vector<PoolEntry>& at(std::size_t sent) const { return entries_.at(sent); }

 private:
  std::vector<std::vector<PoolEntry>> entries_;
  std::vector<std::set<std::string>> seen_;
};

// Per-sentence argmax of w·h; equal scores go to the bytewise smallest target.
std::vector<std::size_t> select(const NBestPool& pool, const FeatureWeights& w);
double pool_bleu(const NBestPool& pool, const FeatureWeights& w, const std::vector<Tokens>& refs);

struct LineSearchResult {
  double gamma = 0;  // step along the direction
  double bleu = 0;   // pool BLEU at w + gamma * direction
};

// Exact search over the upper envelope: candidate steps are the midpoints
// between breakpoints plus one unit beyond either end. Ties prefer gamma = 0's
// interval, then the smallest |gamma|.
LineSearchResult line_search(const NBestPool& pool, const std::vector<Tokens>& refs,
                             const FeatureWeights& w, const FeatureVector& direction);

struct OptimizeOptions {
  int random_restarts = 3;  // random directions tried per round
  int max_updates = 100;
  std::uint64_t seed = 1;
};

struct OptimizeTrace {
  FeatureWeights weights;
  std::vector<double> bleu;  // pool BLEU at the start and after each accepted update
};

// Accepts the best single-direction update while it strictly improves pool BLEU.
OptimizeTrace optimize_pool(const NBestPool& pool, const std::vector<Tokens>& refs,
                            const FeatureWeights& initial, const OptimizeOptions& opt);

struct MertConfig {
  int nbest = 100;
  int max_iterations = 10;
  double min_weight_delta = 1e-4;
  int random_restarts = 3;
  std::uint64_t seed = 1;
};

struct MertIteration {
  double dev_bleu = 0;  // decoder 1-best on the dev set
  double pool_bleu = 0;  // after optimization
  std::size_t pool_size = 0;
  std::size_t updates = 0;
};

struct MertResult {
  FeatureWeights weights;  // L1-normalized
  std::vector<MertIteration> iterations;

  std::vector<std::string> history() const;
};

// `decode` returns an n-best list per dev sentence for the given weights.
using DevDecoder =
    std::function<std::vector<std::vector<decoder::Translation>>(const FeatureWeights&, int nbest)>;

MertResult mert(const std::vector<Tokens>& refs, const DevDecoder& decode,
                const FeatureWeights& initial, const MertConfig& config = {});

// Scales all weights so their absolute values sum to one.
FeatureWeights l1_normalize(const FeatureWeights& w);

}  // namespace desksmt::tune
