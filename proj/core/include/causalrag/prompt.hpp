#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalrag/index.hpp"

namespace causalrag {

enum class TaskType { multiple_choice, yes_no, free_form };

std::string_view to_string(TaskType type) noexcept;

struct AnswerOption {
  char label = 'A';
  std::string text;

  friend bool operator==(const AnswerOption&, const AnswerOption&) = default;
};

struct TaskKind {
  TaskType type = TaskType::free_form;
  std::vector<AnswerOption> options; // multiple_choice only, sorted by label

  static TaskKind multiple_choice(std::vector<AnswerOption> options);
  static TaskKind yes_no() { return {TaskType::yes_no, {}}; }
  static TaskKind free_form() { return {TaskType::free_form, {}}; }

  /// Multiple choice needs >= 2 options with distinct labels in 'A'..'Z'.
  void validate() const;

  std::vector<char> labels() const;

  friend bool operator==(const TaskKind&, const TaskKind&) = default;
};

enum class PromptTemplate { cot_v1, generic_v1, none };

std::string_view to_string(PromptTemplate t) noexcept;
std::optional<PromptTemplate> parse_prompt_template(std::string_view name) noexcept;

/// The four causal reasoning stage headers, in order.
const std::array<std::string_view, 4>& cot_stage_headers();

/// Raw template resource: system and user parts with {question}, {evidence},
/// {options} and {answer_format} placeholders.
struct TemplateSource {
  std::string_view system;
  std::string_view user;
};

TemplateSource template_source(PromptTemplate t) noexcept;

struct PromptBundle {
  std::string system;   // system role content
  std::string user;     // user role content
  std::string rendered; // system + "\n\n" + user
  TaskKind task;
  PromptTemplate template_id = PromptTemplate::cot_v1;
  std::vector<std::string> included_chunk_ids;
  std::size_t token_estimate = 0;
  std::size_t dropped_chunks = 0;
};

/// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text) noexcept;

inline constexpr std::size_t kDefaultContextBudget = 4096;

/// Renders `tmpl` for the question and as many leading `docs` as fit in
/// `budget_tokens`. Docs are taken greedily in rank order; the first one that
/// does not fit and everything after it are dropped. Throws BudgetError when the
/// template and question alone exceed the budget, ConfigError on an invalid task.
PromptBundle build_prompt(PromptTemplate tmpl, std::string_view question, const TaskKind& task,
                          std::span<const ScoredDocument> docs, std::size_t budget_tokens);

/// build_prompt with the four-stage causal template.
PromptBundle build_causal_cot_prompt(std::string_view question, const TaskKind& task,
                                     std::span<const ScoredDocument> docs,
                                     std::size_t budget_tokens);

} // namespace causalrag
