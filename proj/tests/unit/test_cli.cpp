#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "desksmt/util.hpp"
#include "fixture.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::string& args, const std::string& stdin_text = "") {
  static int counter = 0;
  const auto dir = fs::temp_directory_path() / "desksmt_cli_unit";
  fs::create_directories(dir);
  const auto tag = std::to_string(counter++);
  const auto in = dir / ("in" + tag), out = dir / ("out" + tag), err = dir / ("err" + tag);
  desksmt::write_file(in.string(), stdin_text);
  const std::string cmd = std::string(DESKSMT_CLI) + " " + args + " <" + in.string() + " >" + out.string() +
                          " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, desksmt::read_file(out.string()),
          desksmt::read_file(err.string())};
}

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
  auto r = run("frobnicate");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE((r.err + r.out).find("Usage"), std::string::npos);
}

TEST(Cli, NoArgumentsIsUsageError) { EXPECT_EQ(run("").code, 1); }

TEST(Cli, EmptyTranslateInput) {
  auto r = run("translate --lm /nonexistent.arpa");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "");
}

TEST(Cli, MissingFileIsDataError) {
  EXPECT_EQ(run("train-lm --corpus /nonexistent/corpus.txt").code, 2);
}

TEST(Cli, BadOptionValueIsUsageError) {
  EXPECT_EQ(run("train-lm --corpus x --order nope").code, 1);
}

TEST(Cli, TokenizeAndEvaluate) {
  auto r = run("tokenize --lang en", "Why are you weeping?\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "why are you weeping ?\n");
  const auto dir = fs::temp_directory_path() / "desksmt_cli_unit";
  desksmt::write_file((dir / "ref").string(), "a b c d\n");
  auto e = run("evaluate --hyp " + (dir / "ref").string() + " --ref " + (dir / "ref").string());
  EXPECT_EQ(e.code, 0);
  EXPECT_NE(e.out.find("bleu\t1"), std::string::npos) << e.out;
}

TEST(Cli, TrainAndDecodeRoundTrip) {
  const auto dir = fs::temp_directory_path() / "desksmt_cli_unit" / "tiny";
  fs::create_directories(dir);
  std::string src, tgt;
  for (const auto& l : fixture::synthetic_corpus(80)) {
    src += l.source + "\n";
    tgt += l.target + "\n";
  }
  auto p = [&](const char* n) { return (dir / n).string(); };
  desksmt::write_file(p("s"), src);
  desksmt::write_file(p("t"), tgt);
  ASSERT_EQ(run("train-lm --corpus " + p("t") + " -o " + p("lm")).code, 0);
  ASSERT_EQ(run("train-align --source " + p("s") + " --target " + p("t") + " -o " + p("al") + " --lex-forward " +
                p("lf") + " --lex-backward " + p("lb"))
                .code,
            0);
  ASSERT_EQ(run("extract-phrases --source " + p("s") + " --target " + p("t") + " --alignments " + p("al") +
                " --lex-forward " + p("lf") + " --lex-backward " + p("lb") + " -o " + p("pt"))
                .code,
            0);
  auto r = run("decode --lm " + p("lm") + " --phrase-table " + p("pt"), "the boy sees a dog .\n");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "लइका एगो कुकुर देखेला ।\n");
}
