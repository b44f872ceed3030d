#include "causalrag/prompt.hpp"

#include <algorithm>
#include <map>

#include "causalrag/error.hpp"
#include "causalrag/text.hpp"

namespace causalrag {
namespace {

constexpr std::array<std::string_view, 4> kStageHeaders{
    "Step 1 — Clinical Features",
    "Step 2 — Causal Mechanism",
    "Step 3 — Differential Diagnosis",
    "Step 4 — Evidence Synthesis & Final Answer",
};

// Template resources. Placeholders: {evidence} {question} {options} {answer_format}.

constexpr std::string_view kCotV1System =
    "You are a clinical reasoning assistant answering medical questions. Reason the way a "
    "clinician works through a case: start from the presenting findings, explain how they "
    "arise, weigh the competing explanations, and only then commit to an answer. Use the "
    "numbered evidence passages where they are relevant and cite them as [Evidence i]. Work "
    "through the four steps listed under Reasoning, in order, writing each step under its "
    "header.";

constexpr std::string_view kCotV1User =
    "{evidence}## Question\n"
    "{question}\n"
    "\n"
    "{options}"
    "## Reasoning\n"
    "Step 1 — Clinical Features\n"
    "Identify the symptoms, signs, history and test results that matter for this question.\n"
    "\n"
    "Step 2 — Causal Mechanism\n"
    "Explain the underlying pathophysiology that links these features, citing the evidence "
    "where it applies.\n"
    "\n"
    "Step 3 — Differential Diagnosis\n"
    "Evaluate the competing diagnoses or answer choices against the features and the "
    "mechanism, and rule out those that do not fit.\n"
    "\n"
    "Step 4 — Evidence Synthesis & Final Answer\n"
    "Combine the findings and the evidence into a single decision.\n"
    "\n"
    "{answer_format}";

constexpr std::string_view kGenericV1System =
    "You are a medical question answering assistant. Use the numbered evidence passages where "
    "they are relevant.";

constexpr std::string_view kGenericV1User =
    "{evidence}## Question\n"
    "{question}\n"
    "\n"
    "{options}"
    "Let's think step by step.\n"
    "\n"
    "{answer_format}";

constexpr std::string_view kNoneSystem = "You are a medical question answering assistant.";

constexpr std::string_view kNoneUser =
    "{evidence}## Question\n"
    "{question}\n"
    "\n"
    "{options}"
    "{answer_format}";

std::string join_labels(const TaskKind& task) {
  std::string out;
  const auto labels = task.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) {
      out += (i + 1 == labels.size()) ? " or " : ", ";
    }
    out += labels[i];
  }
  return out;
}

std::string answer_format(PromptTemplate tmpl, const TaskKind& task) {
  const bool reasoned = tmpl != PromptTemplate::none;
  const std::string lead = reasoned ? "Give a brief justification, then end" : "End";
  switch (task.type) {
  case TaskType::multiple_choice:
    return lead + " your response with the exact line \"Final Answer: <LETTER>\", where <LETTER> is " +
           join_labels(task) + ".";
  case TaskType::yes_no:
    return lead + " your response with the exact line \"Final Answer: yes\" or \"Final Answer: no\".";
  case TaskType::free_form:
    if (tmpl == PromptTemplate::cot_v1) {
      return "Elaborate on each of the four steps in order, writing your reasoning under each "
             "header, and state your conclusion under Step 4.";
    }
    return "Answer the question in a few sentences.";
  }
  return {};
}

std::string options_block(const TaskKind& task) {
  if (task.type != TaskType::multiple_choice) {
    return {};
  }
  std::string out = "## Options\n";
  for (const auto& o : task.options) {
    out += o.label;
    out += ". ";
    out += normalize_text(o.text);
    out += '\n';
  }
  out += '\n';
  return out;
}

std::string evidence_block(PromptTemplate tmpl, std::span<const ScoredDocument> docs) {
  if (docs.empty()) {
    return tmpl == PromptTemplate::cot_v1 ? "## Evidence\n(no evidence retrieved)\n\n" : "";
  }
  std::string out = "## Evidence\n";
  for (std::size_t i = 0; i < docs.size(); ++i) {
    out += "[Evidence " + std::to_string(i + 1) + "] (source: " + docs[i].chunk_id + ") ";
    out += normalize_text(docs[i].text);
    out += '\n';
  }
  out += '\n';
  return out;
}

// Single pass; substituted values are never rescanned.
std::string substitute(std::string_view tmpl, const std::map<std::string_view, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(open));
      break;
    }
    const auto name = tmpl.substr(open + 1, close - open - 1);
    if (auto it = values.find(name); it != values.end()) {
      out += it->second;
    } else {
      out.append(tmpl.substr(open, close - open + 1));
    }
    pos = close + 1;
  }
  return out;
}

struct Rendered {
  std::string system;
  std::string user;
  std::string full;
};

Rendered render(PromptTemplate tmpl, std::string_view question, const TaskKind& task,
                std::span<const ScoredDocument> docs) {
  const auto source = template_source(tmpl);
  const std::map<std::string_view, std::string> values{
      {"evidence", evidence_block(tmpl, docs)},
      {"question", normalize_text(question)},
      {"options", options_block(task)},
      {"answer_format", answer_format(tmpl, task)},
  };
  Rendered r;
  r.system = substitute(source.system, values);
  r.user = substitute(source.user, values);
  r.full = r.system + "\n\n" + r.user;
  return r;
}

} // namespace

std::string_view to_string(TaskType type) noexcept {
  switch (type) {
  case TaskType::multiple_choice:
    return "multiple_choice";
  case TaskType::yes_no:
    return "yes_no";
  case TaskType::free_form:
    return "free_form";
  }
  return "free_form";
}

TaskKind TaskKind::multiple_choice(std::vector<AnswerOption> options) {
  std::sort(options.begin(), options.end(),
            [](const AnswerOption& a, const AnswerOption& b) { return a.label < b.label; });
  TaskKind task{TaskType::multiple_choice, std::move(options)};
  task.validate();
  return task;
}

void TaskKind::validate() const {
  if (type != TaskType::multiple_choice) {
    if (!options.empty()) {
      throw ConfigError("only multiple-choice tasks carry options");
    }
    return;
  }
  if (options.size() < 2) {
    throw ConfigError("a multiple-choice task needs at least two options");
  }
  for (std::size_t i = 0; i < options.size(); ++i) {
    const char label = options[i].label;
    if (label < 'A' || label > 'Z') {
      throw ConfigError(std::string("option label '") + label + "' is not a letter A-Z");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (options[j].label == label) {
        throw ConfigError(std::string("duplicate option label '") + label + "'");
      }
    }
  }
}

std::vector<char> TaskKind::labels() const {
  std::vector<char> out;
  out.reserve(options.size());
  for (const auto& o : options) {
    out.push_back(o.label);
  }
  return out;
}

std::string_view to_string(PromptTemplate t) noexcept {
  switch (t) {
  case PromptTemplate::cot_v1:
    return "cot_v1";
  case PromptTemplate::generic_v1:
    return "generic_v1";
  case PromptTemplate::none:
    return "none";
  }
  return "none";
}

std::optional<PromptTemplate> parse_prompt_template(std::string_view name) noexcept {
  for (auto t : {PromptTemplate::cot_v1, PromptTemplate::generic_v1, PromptTemplate::none}) {
    if (to_string(t) == name) {
      return t;
    }
  }
  return std::nullopt;
}

const std::array<std::string_view, 4>& cot_stage_headers() { return kStageHeaders; }

TemplateSource template_source(PromptTemplate t) noexcept {
  switch (t) {
  case PromptTemplate::cot_v1:
    return {kCotV1System, kCotV1User};
  case PromptTemplate::generic_v1:
    return {kGenericV1System, kGenericV1User};
  case PromptTemplate::none:
    return {kNoneSystem, kNoneUser};
  }
  return {kNoneSystem, kNoneUser};
}

std::size_t estimate_tokens(std::string_view text) noexcept {
  return (utf8_length(text) + 3) / 4;
}

PromptBundle build_prompt(PromptTemplate tmpl, std::string_view question, const TaskKind& task,
                          std::span<const ScoredDocument> docs, std::size_t budget_tokens) {
  task.validate();

  Rendered best = render(tmpl, question, task, {});
  std::size_t best_tokens = estimate_tokens(best.full);
  if (best_tokens > budget_tokens) {
    throw BudgetError("prompt template and question need " + std::to_string(best_tokens) +
                      " tokens, budget is " + std::to_string(budget_tokens));
  }

  std::size_t included = 0;
  while (included < docs.size()) {
    Rendered candidate = render(tmpl, question, task, docs.first(included + 1));
    const std::size_t tokens = estimate_tokens(candidate.full);
    if (tokens > budget_tokens) {
      break;
    }
    best = std::move(candidate);
    best_tokens = tokens;
    ++included;
  }

  PromptBundle bundle;
  bundle.system = std::move(best.system);
  bundle.user = std::move(best.user);
  bundle.rendered = std::move(best.full);
  bundle.task = task;
  bundle.template_id = tmpl;
  for (std::size_t i = 0; i < included; ++i) {
    bundle.included_chunk_ids.push_back(docs[i].chunk_id);
  }
  bundle.token_estimate = best_tokens;
  bundle.dropped_chunks = docs.size() - included;
  return bundle;
}

PromptBundle build_causal_cot_prompt(std::string_view question, const TaskKind& task,
                                     std::span<const ScoredDocument> docs,
                                     std::size_t budget_tokens) {
  return build_prompt(PromptTemplate::cot_v1, question, task, docs, budget_tokens);
}

} // namespace causalrag
