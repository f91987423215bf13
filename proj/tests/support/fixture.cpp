#include "fixture.hpp"

#include "desksmt/align.hpp"
#include "desksmt/util.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <utility>

namespace fixture {

namespace {

using Pair = std::pair<const char*, const char*>;

const Pair kNouns[] = {
    {"boy", "लइका"},     {"girl", "लइकी"},    {"man", "आदमी"},     {"woman", "औरत"},
    {"dog", "कुकुर"},     {"cat", "बिलार"},     {"book", "किताब"},   {"house", "घर"},
    {"river", "नदी"},    {"tree", "पेड़"},      {"horse", "घोड़ा"},    {"teacher", "मास्टर"},
    {"farmer", "किसान"}, {"child", "बच्चा"},   {"water", "पानी"},    {"food", "खाना"},
    {"letter", "चिट्ठी"}, {"village", "गाँव"},   {"field", "खेत"},     {"king", "राजा"},
};
const Pair kVerbs[] = {
    {"sees", "देखेला"},      {"eats", "खाला"},          {"reads", "पढ़ेला"},   {"writes", "लिखेला"},
    {"likes", "पसंद करेला"}, {"calls", "बोलावेला"},     {"finds", "पावेला"},   {"brings", "ले आवेला"},
    {"helps", "मदद करेला"},  {"carries", "ढोवेला"},
};
const Pair kAdjectives[] = {
    {"big", "बड़"}, {"small", "छोट"}, {"good", "नीमन"}, {"old", "पुरान"}, {"new", "नया"}, {"red", "लाल"},
};

template <typename T, std::size_t N>
const T& pick(Rng& r, const T (&xs)[N]) {
  return xs[r.below(N)];
}

void noun_phrase(Rng& r, std::string& en, std::string& hi) {
  const bool definite = r.unit() < 0.6;
  en += definite ? "the " : "a ";
  if (!definite) hi += "एगो ";
  if (r.unit() < 0.3) {
    const auto& a = pick(r, kAdjectives);
    en += std::string(a.first) + " ";
    hi += std::string(a.second) + " ";
  }
  const auto& n = pick(r, kNouns);
  en += n.first;
  hi += n.second;
}

void write(const std::filesystem::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

}  // namespace

std::vector<ParallelLine> synthetic_corpus(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<ParallelLine> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string en, hi;
    if (r.unit() < 0.2) {
      en += "today ";
      hi += "आज ";
    }
    std::string s_en, s_hi, o_en, o_hi;
    noun_phrase(r, s_en, s_hi);
    noun_phrase(r, o_en, o_hi);
    const auto& v = pick(r, kVerbs);
    en += s_en + " " + v.first + " " + o_en + " .";
    hi += s_hi + " " + o_hi + " " + v.second + " ।";
    out.push_back({en, hi});
  }
  return out;
}

std::string write_pipeline_fixture(const std::string& dir, std::size_t n, const std::string& extra_config) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto lines = synthetic_corpus(n);
  const std::size_t test = n / 10, dev = n / 10, train = n - test - dev;
  auto dump = [&](std::size_t b, std::size_t e, const char* name) {
    std::string s, t;
    for (std::size_t i = b; i < e; ++i) {
      s += lines[i].source + "\n";
      t += lines[i].target + "\n";
    }
    write(fs::path(dir) / (std::string(name) + ".en"), s);
    write(fs::path(dir) / (std::string(name) + ".hi"), t);
  };
  dump(0, train, "train");
  dump(train, train + dev, "dev");
  dump(train + dev, n, "test");
  std::string cfg =
      "paths.train_source = train.en\n"
      "paths.train_target = train.hi\n"
      "paths.dev_source = dev.en\n"
      "paths.dev_target = dev.hi\n"
      "paths.test_source = test.en\n"
      "paths.test_target = test.hi\n"
      "paths.model_dir = model\n"
      "corpus.source_lang = en\n"
      "corpus.target_lang = hi\n"
      "lm.order = 3\n"
      "align.model = 2\n"
      "align.iterations = 5\n"
      "align.symmetrization = grow-diag-final-and\n"
      "reorder.orientation_set = msd\n"
      "reorder.bidirectional = true\n"
      "decoder.kind = phrase\n"
      "tune.enabled = true\n"
      "tune.iterations = 2\n"
      "eval.metrics = bleu,wer,prf,meteor\n" +
      extra_config;
  const auto path = fs::path(dir) / "pipeline.cfg";
  write(path, cfg);
  return path.string();
}

PhraseSystem train_phrase_system(std::size_t n, int max_phrase_len) {
  using namespace desksmt;
  std::vector<corpus::SentencePair> pairs;
  std::vector<Tokens> targets;
  std::set<std::string> words;
  for (const auto& l : synthetic_corpus(n)) {
    pairs.push_back({split_ws(l.source), split_ws(l.target)});
    targets.push_back(pairs.back().target);
    for (const auto& w : pairs.back().source) words.insert(w);
  }
  align::AlignerOptions ao;
  ao.ibm1_iterations = 4;
  ao.ibm2_iterations = 2;
  auto wa = align::align_corpus(pairs, ao);
  PhraseSystem sys;
  sys.lm = lm::train_lm(targets, 3);
  phrasetab::ExtractOptions eo;
  eo.max_phrase_len = max_phrase_len;
  sys.table = phrasetab::build_phrase_table(pairs, wa.links, wa.forward, wa.backward, eo);
  phrasetab::ReorderingOptions ro;
  ro.max_phrase_len = max_phrase_len;
  sys.reordering = phrasetab::extract_reordering(pairs, wa.links, ro);
  sys.source_words.assign(words.begin(), words.end());
  return sys;
}

}  // namespace fixture
