#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli/cli.hpp"
#include "cli/config_file.hpp"
#include "causalrag/error.hpp"
#include "fixtures.hpp"

namespace causalrag::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "causalrag");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("causalrag_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // ingest + index of the fixture corpus; returns the index path.
  std::string build_fixture_index() {
    const auto chunks = path("chunks.jsonl");
    EXPECT_EQ(run({"ingest", "--corpus", testing::fixture("corpus.jsonl").string(), "--out", chunks})
                  .code,
              0);
    const auto index = path("fixture.idx");
    EXPECT_EQ(run({"index", "--chunks", chunks, "--out", index}).code, 0);
    return index;
  }

  fs::path dir_;
};

TEST_F(CliTest, Version) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("causalrag "), std::string::npos);
  EXPECT_NE(r.out.find("templates: cot_v1 generic_v1 none"), std::string::npos);
  EXPECT_NE(r.out.find("index format: 1"), std::string::npos);
  EXPECT_NE(r.out.find("default lexicon: causal_lex_v1"), std::string::npos);
}

TEST_F(CliTest, IngestReportsCounts) {
  const auto r = run({"ingest", "--corpus", testing::fixture("corpus.jsonl").string(), "--out",
                      path("c.jsonl"), "--max-chunk-chars", "200", "--overlap-chars", "50"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("10 documents, ", 0), 0u);
  EXPECT_GT(read_chunks(path("c.jsonl")).size(), 10u);
}

TEST_F(CliTest, IndexAndRetrieve) {
  const auto index = build_fixture_index();
  EXPECT_EQ(Index::load(index).size(), 10u);
  const auto r = run({"retrieve", "--index", index, "--query", "ammonia confusion cirrhosis",
                      "--k", "3", "--show-psi"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("psi"), std::string::npos);
  std::istringstream lines(r.out);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    rows += line.find('#') != std::string::npos ? 1 : 0;
  }
  EXPECT_EQ(rows, 3u);
}

TEST_F(CliTest, RetrieveRejectsIncompatibleEmbedder) {
  const auto index = build_fixture_index();
  const auto r = run({"retrieve", "--index", index, "--query", "x", "--dim", "128"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliTest, EvalWritesReport) {
  const auto index = build_fixture_index();
  const auto r = run({"eval", "--index", index, "--dataset",
                      testing::fixture("mcq_dataset.jsonl").string(), "--script",
                      testing::fixture("mcq_script.jsonl").string(), "--out", path("report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("75.0% (9/12)"), std::string::npos);
  std::ifstream in(path("report.json"));
  const auto report = report_from_json(std::string(std::istreambuf_iterator<char>(in), {}));
  EXPECT_EQ(report.counts.correct, 9u);
  EXPECT_EQ(report.config.mode, "full_medcot_rag");
}

TEST_F(CliTest, EvalYesNoWithoutIndex) {
  const auto r = run({"eval", "--mode", "zero_shot", "--kind", "yes_no", "--dataset",
                      testing::fixture("yesno_dataset.jsonl").string(), "--script",
                      testing::fixture("yesno_script.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("75.0% (3/4)"), std::string::npos);
}

TEST_F(CliTest, AblateWithConfigFile) {
  const auto index = build_fixture_index();
  const auto conf = path("run.conf");
  std::ofstream(conf) << "# fixture run\n"
                      << "script = " << testing::fixture("mcq_script.jsonl").string() << "\n"
                      << "index = " << index << "\n"
                      << "dataset = " << testing::fixture("mcq_dataset.jsonl").string() << "\n"
                      << "modes = generic_cot_only,full_medcot_rag\n";
  const auto r = run({"--config", conf, "ablate", "--out", path("ablation.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("generic_cot_only"), std::string::npos);
  EXPECT_NE(r.out.find("(baseline)"), std::string::npos);
  EXPECT_EQ(r.out.find("basic_rag"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("ablation.json")));
}

TEST_F(CliTest, CommandLineOverridesConfigFile) {
  const auto conf = path("over.conf");
  std::ofstream(conf) << "mode = full_medcot_rag\nscript = /nonexistent.jsonl\n";
  const auto r = run({"--config", conf, "eval", "--mode", "zero_shot", "--kind", "yes_no",
                      "--dataset", testing::fixture("yesno_dataset.jsonl").string(), "--script",
                      testing::fixture("yesno_script.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mode zero_shot"), std::string::npos);
}

TEST_F(CliTest, UnknownConfigKeyFails) {
  const auto conf = path("bad.conf");
  std::ofstream(conf) << "api_key = sk-should-not-be-here\n";
  const auto r = run({"--config", conf, "eval", "--dataset", "x"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown config key 'api-key'"), std::string::npos);
}

TEST_F(CliTest, AskPrintsAnswerAndPrompt) {
  const auto index = build_fixture_index();
  const auto script = path("ask.jsonl");
  std::ofstream(script) << R"j({"item_id":"cli","response":"Reasoning.\nFinal Answer: (b)"})j" << "\n";
  const auto r = run({"ask", "--index", index, "--question", "Why does edema occur?", "--option",
                      "A=Lymph", "--option", "B=Low oncotic pressure", "--script", script,
                      "--show-prompt"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Step 2 — Causal Mechanism"), std::string::npos);
  EXPECT_NE(r.out.find("[Evidence 1]"), std::string::npos);
  EXPECT_NE(r.out.find("answer: B"), std::string::npos);
}

TEST_F(CliTest, ValidationErrorsBeforeWork) {
  EXPECT_EQ(run({"eval", "--mode", "bogus", "--dataset", "x", "--script", "y"}).code, 1);
  EXPECT_EQ(run({"eval", "--dataset", testing::fixture("mcq_dataset.jsonl").string(), "--script",
                 testing::fixture("mcq_script.jsonl").string()})
                .code,
            1); // retrieval mode without --index
  const auto bad_beta = run({"eval", "--mode", "full_medcot_rag", "--beta", "0", "--index", "x",
                             "--dataset", "y", "--script", "z"});
  EXPECT_EQ(bad_beta.code, 1);
  EXPECT_NE(bad_beta.err.find("beta"), std::string::npos);
  const auto remote = run({"eval", "--generator", "remote_chat", "--dataset", "y", "--mode",
                           "zero_shot"});
  EXPECT_EQ(remote.code, 1);
  EXPECT_NE(remote.err.find("endpoint"), std::string::npos);
}

TEST_F(CliTest, ParseErrorsUseCliExitCodes) {
  EXPECT_NE(run({}).code, 0);
  EXPECT_NE(run({"frobnicate"}).code, 0);
  EXPECT_NE(run({"ingest"}).code, 0);
  EXPECT_EQ(run({"ingest", "--help"}).code, 0);
}

TEST(ConfigFile, ParsesFlatKeyValues) {
  const auto values = parse_config_text("# comment\n\nmax_new_tokens = 128\nchat-url=\"http://x\"\n"
                                        "  Alpha = 0.5\n",
                                        "inline");
  EXPECT_EQ(values.at("max-new-tokens"), "128");
  EXPECT_EQ(values.at("chat-url"), "http://x");
  EXPECT_EQ(values.at("alpha"), "0.5");
  EXPECT_THROW(parse_config_text("a = 1\na = 2\n", "inline"), ParseError);
  EXPECT_THROW(parse_config_text("novalue\n", "inline"), ParseError);
}

} // namespace
} // namespace causalrag::cli
