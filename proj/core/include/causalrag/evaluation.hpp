#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalrag/causal.hpp"
#include "causalrag/embedding.hpp"
#include "causalrag/generation.hpp"
#include "causalrag/index.hpp"
#include "causalrag/prompt.hpp"

namespace causalrag {

enum class DatasetKind { mcq, yes_no };

std::string_view to_string(DatasetKind kind) noexcept;
std::optional<DatasetKind> parse_dataset_kind(std::string_view name) noexcept;

struct QAItem {
  std::string id;
  std::string question;
  TaskKind task;
  std::string gold; // uppercase letter for MCQ, "yes"/"no" for binary
};

/// JSON Lines. MCQ: {"id", "question", "options": {"A": ..}, "answer": "A"};
/// yes/no: {"id", "question", "answer": "yes"|"no"}. Throws ParseError on
/// schema problems and ValidationError naming the item for bad gold labels or
/// duplicate ids.
std::vector<QAItem> load_dataset(const std::filesystem::path& path, DatasetKind kind);

/// Case-insensitive equality; an unparsed prediction never matches.
bool strict_match(const ExtractedAnswer& prediction, std::string_view gold) noexcept;

enum class PipelineMode {
  zero_shot,
  basic_rag,
  causal_rag_no_cot,
  generic_cot_only,
  rag_plus_generic_cot,
  full_medcot_rag,
};

std::string_view to_string(PipelineMode mode) noexcept;
std::optional<PipelineMode> parse_pipeline_mode(std::string_view name) noexcept;
std::span<const PipelineMode> all_pipeline_modes() noexcept;

struct ModeTraits {
  bool uses_retrieval = false;
  bool semantic_only = false;  // retrieval ranks by similarity alone (beta forced to 0)
  bool enhances_query = false; // clinical modifiers appended before embedding
  PromptTemplate default_template = PromptTemplate::none;
};

ModeTraits mode_traits(PipelineMode mode) noexcept;

struct PipelineConfig {
  PipelineMode mode = PipelineMode::full_medcot_rag;
  std::string label; // report/table label; defaults to the mode name
  RetrievalWeights weights;
  PromptTemplate prompt_template = PromptTemplate::cot_v1;
  std::vector<std::string> query_modifiers = default_query_modifiers();
  std::size_t budget_tokens = kDefaultContextBudget;
  std::size_t concurrency = 4;

  /// Defaults for `mode`: its template, default weights and modifiers.
  static PipelineConfig for_mode(PipelineMode mode);

  /// Throws ConfigError on invalid weights, a zero budget, or full_medcot_rag
  /// with beta == 0 or a template other than cot_v1.
  void validate() const;

  std::string effective_label() const;

  /// Weights actually used for retrieval (beta zeroed for semantic-only modes).
  RetrievalWeights effective_weights() const;
};

struct EvalRow {
  std::string id;
  ExtractedAnswer prediction;
  std::string gold;
  bool correct = false;
  bool errored = false;
  std::string error;
  std::vector<std::string> retrieved_chunk_ids;
  std::string prompt_hash;
  std::string response;

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct EvalCounts {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t unparseable = 0;
  std::size_t errored = 0;

  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

struct ConfigDescriptor {
  std::string label;
  std::string mode;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t k = 0;
  std::string prompt_template;
  std::vector<std::string> query_modifiers;
  std::size_t budget_tokens = 0;
  std::string embedding_provider; // empty for modes without retrieval
  std::string lexicon_version;    // empty for modes without retrieval
  std::string generator;

  friend bool operator==(const ConfigDescriptor&, const ConfigDescriptor&) = default;
};

inline constexpr double kDegradedErrorFraction = 0.10;

struct EvalReport {
  ConfigDescriptor config;
  std::vector<EvalRow> rows;
  EvalCounts counts;
  double accuracy = 0.0;
  bool degraded = false; // more than 10% of items errored
  std::string timestamp; // UTC, ISO 8601
};

/// Everything run_eval needs besides the config and items. `index`, `embedder`
/// and `lexicon` may be null for modes without retrieval.
struct EvalResources {
  const Index* index = nullptr;
  EmbeddingProvider* embedder = nullptr;
  const CausalLexicon* lexicon = nullptr;
  Generator* generator = nullptr;
};

/// Runs the pipeline over `items` with up to `config.concurrency` items in
/// flight. Failures on an item (retrieval or generation) mark the row errored
/// and incorrect; the run continues. Rows keep dataset order.
EvalReport run_eval(const PipelineConfig& config, std::span<const QAItem> items,
                    const EvalResources& resources);

/// Recounts the rows and throws Error if counts, accuracy or the degraded flag
/// disagree with them.
void verify_report(const EvalReport& report);

std::string report_to_json(const EvalReport& report, int indent = 2);
EvalReport report_from_json(std::string_view json);

/// Human-readable one-report summary.
std::string format_report(const EvalReport& report);

struct AblationRow {
  std::string label;
  double accuracy = 0.0;
  std::optional<double> relative_delta; // nullopt when the baseline accuracy is 0
  bool is_baseline = false;
};

struct AblationResult {
  std::vector<EvalReport> reports;
  std::vector<AblationRow> table;
  std::string baseline_label;
};

/// (accuracy - baseline) / baseline, or nullopt when baseline == 0.
std::optional<double> relative_delta(double accuracy, double baseline) noexcept;

/// "+21.0%" style, one decimal; "n/a" for nullopt.
std::string format_delta(std::optional<double> delta);

/// Builds the comparison table. Throws ConfigError if no report carries
/// `baseline_label`.
std::vector<AblationRow> comparison_table(std::span<const EvalReport> reports,
                                          std::string_view baseline_label);

/// Runs every config and builds the comparison table against the config
/// labelled `baseline_label` (by default generic_cot_only).
AblationResult run_ablation(std::span<const PipelineConfig> configs, std::span<const QAItem> items,
                            const EvalResources& resources,
                            std::string_view baseline_label = "generic_cot_only");

std::string format_ablation_table(const AblationResult& result);
std::string ablation_to_json(const AblationResult& result, int indent = 2);

} // namespace causalrag
