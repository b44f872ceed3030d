#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "causalrag/error.hpp"
#include "causalrag/evaluation.hpp"
#include "fixtures.hpp"

namespace causalrag {
namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("causalrag_eval_" + name);
  std::ofstream(path) << content;
  return path;
}

TEST(Dataset, LoadsFixtures) {
  const auto mcq = load_dataset(testing::fixture("mcq_dataset.jsonl"), DatasetKind::mcq);
  ASSERT_EQ(mcq.size(), 12u);
  EXPECT_EQ(mcq[0].id, "q01");
  EXPECT_EQ(mcq[0].gold, "A");
  EXPECT_EQ(mcq[0].task.labels(), (std::vector<char>{'A', 'B', 'C', 'D'}));
  const auto yn = load_dataset(testing::fixture("yesno_dataset.jsonl"), DatasetKind::yes_no);
  ASSERT_EQ(yn.size(), 4u);
  EXPECT_EQ(yn[1].gold, "no");
  EXPECT_EQ(yn[1].task.type, TaskType::yes_no);
}

TEST(Dataset, RejectsBadRecords) {
  EXPECT_THROW(load_dataset(write_temp("a.jsonl", R"({"id":"q","question":"Q?","answer":"A"})"
                                                  "\n"),
                            DatasetKind::mcq),
               ParseError);
  EXPECT_THROW(load_dataset(write_temp("b.jsonl",
                                       R"({"id":"q","question":"Q?","options":{"A":"x","B":"y"},"answer":"C"})"
                                       "\n"),
                            DatasetKind::mcq),
               ValidationError);
  EXPECT_THROW(load_dataset(write_temp("c.jsonl", R"({"id":"q","question":"Q?","answer":"perhaps"})"
                                                  "\n"),
                            DatasetKind::yes_no),
               ValidationError);
  EXPECT_THROW(load_dataset(write_temp("d.jsonl", R"({"id":"q","question":"Q?","answer":"yes"})"
                                                  "\n"
                                                  R"({"id":"q","question":"R?","answer":"no"})"
                                                  "\n"),
                            DatasetKind::yes_no),
               ValidationError);
}

TEST(StrictMatch, Semantics) {
  EXPECT_TRUE(strict_match({"B"}, "B"));
  EXPECT_FALSE(strict_match({"B"}, "C"));
  EXPECT_FALSE(strict_match({}, "B"));
  EXPECT_TRUE(strict_match({"yes"}, "yes"));
}

TEST(PipelineConfig, ModeTraitsAndValidation) {
  EXPECT_EQ(all_pipeline_modes().size(), 6u);
  for (auto m : all_pipeline_modes()) {
    EXPECT_EQ(parse_pipeline_mode(to_string(m)), m);
    EXPECT_NO_THROW(PipelineConfig::for_mode(m).validate());
  }
  EXPECT_FALSE(parse_pipeline_mode("medcot").has_value());

  auto full = PipelineConfig::for_mode(PipelineMode::full_medcot_rag);
  EXPECT_EQ(full.prompt_template, PromptTemplate::cot_v1);
  full.weights.beta = 0.0;
  EXPECT_THROW(full.validate(), ConfigError);
  full.weights.beta = 0.3;
  full.prompt_template = PromptTemplate::generic_v1;
  EXPECT_THROW(full.validate(), ConfigError);

  const auto basic = PipelineConfig::for_mode(PipelineMode::basic_rag);
  EXPECT_EQ(basic.effective_weights().beta, 0.0);
  EXPECT_EQ(basic.effective_weights().alpha, 0.7);
  EXPECT_TRUE(mode_traits(PipelineMode::causal_rag_no_cot).enhances_query);
  EXPECT_FALSE(mode_traits(PipelineMode::rag_plus_generic_cot).enhances_query);
  EXPECT_EQ(PipelineConfig::for_mode(PipelineMode::generic_cot_only).prompt_template,
            PromptTemplate::generic_v1);
}

TEST(RunEval, FixtureAccuracyAndRows) {
  auto f = testing::mcq_fixture_pipeline();
  const auto config = PipelineConfig::for_mode(PipelineMode::full_medcot_rag);
  const auto report = run_eval(config, f.items, f.resources());
  EXPECT_EQ(report.counts.total, 12u);
  EXPECT_EQ(report.counts.correct, 9u);
  EXPECT_EQ(report.counts.unparseable, 1u);
  EXPECT_EQ(report.counts.errored, 0u);
  EXPECT_DOUBLE_EQ(report.accuracy, 0.75);
  EXPECT_FALSE(report.degraded);
  ASSERT_EQ(report.rows.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(report.rows[i].id, f.items[i].id);
    EXPECT_EQ(report.rows[i].retrieved_chunk_ids.size(), 5u);
    EXPECT_EQ(report.rows[i].prompt_hash.size(), 16u);
  }
  EXPECT_EQ(report.config.lexicon_version, "causal_lex_v1");
  EXPECT_EQ(report.config.generator, "scripted_mock:mcq_script.jsonl");
  EXPECT_NO_THROW(verify_report(report));
}

TEST(RunEval, NonRetrievalModesSkipTheIndex) {
  auto f = testing::mcq_fixture_pipeline();
  EvalResources bare{nullptr, nullptr, nullptr, f.generator.get()};
  const auto report =
      run_eval(PipelineConfig::for_mode(PipelineMode::generic_cot_only), f.items, bare);
  for (const auto& row : report.rows) {
    EXPECT_TRUE(row.retrieved_chunk_ids.empty());
  }
  EXPECT_TRUE(report.config.embedding_provider.empty());
  EXPECT_THROW(run_eval(PipelineConfig::for_mode(PipelineMode::basic_rag), f.items, bare),
               ConfigError);
}

TEST(RunEval, ConcurrencyDoesNotChangeResults) {
  auto f = testing::mcq_fixture_pipeline();
  auto config = PipelineConfig::for_mode(PipelineMode::full_medcot_rag);
  config.concurrency = 1;
  const auto serial = run_eval(config, f.items, f.resources());
  config.concurrency = 8;
  const auto parallel = run_eval(config, f.items, f.resources());
  ASSERT_EQ(serial.rows.size(), parallel.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    EXPECT_EQ(serial.rows[i].prompt_hash, parallel.rows[i].prompt_hash);
    EXPECT_EQ(serial.rows[i].retrieved_chunk_ids, parallel.rows[i].retrieved_chunk_ids);
    EXPECT_EQ(serial.rows[i].correct, parallel.rows[i].correct);
  }
}

TEST(RunEval, GenerationFailuresAreCountedNotFatal) {
  auto f = testing::mcq_fixture_pipeline();
  // Only three items have scripted answers; the rest error.
  ScriptedMockGenerator partial({{{"", "q01"}, "Final Answer: A"},
                                 {{"", "q02"}, "Final Answer: B"},
                                 {{"", "q03"}, "Final Answer: A"}},
                                "partial");
  EvalResources res{&f.index, f.embedder.get(), &CausalLexicon::builtin(), &partial};
  const auto report = run_eval(PipelineConfig::for_mode(PipelineMode::full_medcot_rag), f.items, res);
  EXPECT_EQ(report.counts.correct, 2u);
  EXPECT_EQ(report.counts.errored, 9u);
  EXPECT_TRUE(report.degraded);
  EXPECT_TRUE(report.rows[5].errored);
  EXPECT_FALSE(report.rows[5].correct);
  EXPECT_FALSE(report.rows[5].error.empty());
  EXPECT_NE(format_report(report).find("[DEGRADED]"), std::string::npos);
}

TEST(Report, JsonRoundTripAndTamperDetection) {
  auto f = testing::mcq_fixture_pipeline();
  const auto report = run_eval(PipelineConfig::for_mode(PipelineMode::full_medcot_rag), f.items,
                               f.resources());
  const std::string json = report_to_json(report);
  EXPECT_NE(json.find("\"schema\": \"causalrag.eval_report/1\""), std::string::npos);
  const auto back = report_from_json(json);
  EXPECT_EQ(back.counts.correct, report.counts.correct);
  EXPECT_EQ(back.rows.size(), report.rows.size());
  EXPECT_EQ(back.rows[10].prediction, report.rows[10].prediction);
  EXPECT_EQ(report_to_json(back), json);

  auto tampered = back;
  tampered.counts.correct = 12;
  EXPECT_THROW(verify_report(tampered), Error);
  EXPECT_THROW(report_from_json("{}"), FormatError);
}

TEST(RelativeDelta, FormulaAndFormatting) {
  EXPECT_NEAR(*relative_delta(0.605, 0.5), 0.21, 1e-12);
  EXPECT_EQ(format_delta(relative_delta(0.605, 0.5)), "+21.0%");
  EXPECT_EQ(format_delta(relative_delta(0.5, 0.5)), "0.0%");
  EXPECT_EQ(format_delta(relative_delta(0.45, 0.5)), "-10.0%");
  EXPECT_FALSE(relative_delta(0.5, 0.0).has_value());
  EXPECT_EQ(format_delta(std::nullopt), "n/a");
}

// Ablation table cells: (baseline, variant, printed delta). The MedQA
// "RAG only" cell (54.6 vs 57.8 printed as -3.2%) is an absolute difference
// rather than a ratio and is left out.
TEST(RelativeDelta, PublishedAblationCells) {
  struct Cell {
    double base, variant;
    const char* printed;
  };
  const Cell cells[] = {
      {57.8, 60.6, "+4.8%"}, {57.8, 70.1, "+21.3%"}, {68.3, 62.5, "-8.5%"},
      {68.3, 70.2, "+2.8%"}, {68.3, 74.4, "+8.9%"},  {64.5, 62.9, "-2.5%"},
      {64.5, 64.1, "-0.6%"}, {64.5, 73.5, "+14.0%"},
  };
  for (const auto& c : cells) {
    EXPECT_EQ(format_delta(relative_delta(c.variant / 100.0, c.base / 100.0)), c.printed)
        << c.variant << " vs " << c.base;
  }
  EXPECT_NE(format_delta(relative_delta(0.546, 0.578)), "-3.2%");
}

TEST(Ablation, ModeSpecificScriptsAndTable) {
  auto f = testing::mcq_fixture_pipeline();
  std::map<std::pair<std::string, std::string>, std::string> script;
  for (std::size_t i = 0; i < f.items.size(); ++i) {
    const auto& item = f.items[i];
    script[{"generic_cot_only", item.id}] = "Final Answer: " + std::string(i < 6 ? item.gold : "Z");
    script[{"full_medcot_rag", item.id}] = "Final Answer: " + std::string(i < 9 ? item.gold : "Z");
  }
  ScriptedMockGenerator gen(script, "ablation");
  EvalResources res{&f.index, f.embedder.get(), &CausalLexicon::builtin(), &gen};
  const std::vector<PipelineConfig> configs{PipelineConfig::for_mode(PipelineMode::generic_cot_only),
                                            PipelineConfig::for_mode(PipelineMode::full_medcot_rag)};
  const auto result = run_ablation(configs, f.items, res);
  ASSERT_EQ(result.table.size(), 2u);
  EXPECT_TRUE(result.table[0].is_baseline);
  EXPECT_DOUBLE_EQ(result.table[0].accuracy, 0.5);
  EXPECT_DOUBLE_EQ(result.table[1].accuracy, 0.75);
  EXPECT_EQ(format_delta(result.table[1].relative_delta), "+50.0%");
  const auto text = format_ablation_table(result);
  EXPECT_NE(text.find("(baseline)"), std::string::npos);
  EXPECT_NE(text.find("+50.0%"), std::string::npos);
  EXPECT_NE(ablation_to_json(result).find("\"relative_delta\""), std::string::npos);

  EXPECT_THROW(run_ablation(configs, f.items, res, "basic_rag"), ConfigError);
  const std::vector<PipelineConfig> dup{configs[0], configs[0]};
  EXPECT_THROW(run_ablation(dup, f.items, res), ConfigError);
}

} // namespace
} // namespace causalrag
