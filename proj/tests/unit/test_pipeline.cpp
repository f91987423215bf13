#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "desksmt/error.hpp"
#include "desksmt/pipeline.hpp"
#include "fixture.hpp"

using namespace desksmt;
using namespace desksmt::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("desksmt_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp_dir(const fs::path& dir) {
  std::string all;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) all += f.filename().string() + "\n" + read_file(f.string());
  return all;
}

}  // namespace

TEST(Config, UnknownAndDuplicateKeysNameTheLine) {
  try {
    parse_config("lm.order = 3\nlm.colour = red\n", "x.cfg", "/tmp");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse_config("lm.order = 3\n# c\nlm.order = 4\n", "x.cfg", "/tmp");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_config("lm.order = three\n", "x.cfg", "/tmp"), DataError);
}

TEST(Config, HashIgnoresPaths) {
  auto a = parse_config("paths.model_dir = a\nlm.order = 3\n", "x", "/tmp");
  auto b = parse_config("paths.model_dir = b\nlm.order = 3\n", "x", "/tmp");
  auto c = parse_config("paths.model_dir = a\nlm.order = 4\n", "x", "/tmp");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(a.model_dir, "/tmp/a");
}

TEST(Config, MissingInputFilesRejected) {
  auto c = parse_config("paths.train_source = nowhere.en\n", "x", "/tmp");
  EXPECT_THROW(validate_config(c), DataError);
}

TEST(Pipeline, HierarchicalRunIsJobInvariant) {
  std::string first;
  for (int jobs : {1, 3}) {
    auto dir = scratch("hier" + std::to_string(jobs));
    auto cfg_path = fixture::write_pipeline_fixture(dir.string(), 120,
                                                    "decoder.kind = hier\ndecoder.nbest = 20\n");
    std::string text = read_file(cfg_path);
    text.replace(text.find("decoder.kind = phrase\n"), 22, "");
    text.replace(text.find("tune.iterations = 2\n"), 20, "tune.iterations = 1\n");
    auto cfg = parse_config(text, cfg_path, dir.string());
    validate_config(cfg);
    std::ostringstream log;
    run_pipeline(cfg, {jobs, 1}, log);
    EXPECT_TRUE(fs::exists(dir / "model" / "rule-table"));
    EXPECT_TRUE(fs::exists(dir / "model" / "report.txt"));
    auto all = slurp_dir(dir / "model");
    if (first.empty())
      first = all;
    else
      EXPECT_EQ(all, first);
  }
}

TEST(Translator, EmptySentenceGivesEmptyTranslation) {
  DecodeSettings s;
  auto sys = fixture::train_phrase_system(30);
  Translator t(s, sys.lm);
  t.set_phrase_table(sys.table, sys.reordering);
  auto out = t.translate({}, nullptr, decoder::FeatureWeights::defaults(), 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(out[0].target.empty());
}
