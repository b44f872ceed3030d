#include "causalrag/evaluation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "causalrag/error.hpp"
#include "causalrag/parallel.hpp"
#include "causalrag/text.hpp"

namespace causalrag {
namespace {

using json = nlohmann::json;

constexpr std::array<PipelineMode, 6> kModes{
    PipelineMode::zero_shot,         PipelineMode::basic_rag,
    PipelineMode::causal_rag_no_cot, PipelineMode::generic_cot_only,
    PipelineMode::rag_plus_generic_cot, PipelineMode::full_medcot_rag,
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string required_string(const json& record, const char* key, const std::string& source,
                            std::size_t line_no) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw ParseError(source, line_no, std::string("missing or non-string key '") + key + "'");
  }
  return it->get<std::string>();
}

ConfigDescriptor describe(const PipelineConfig& config, const EvalResources& resources) {
  const auto traits = mode_traits(config.mode);
  const auto weights = config.effective_weights();
  ConfigDescriptor d;
  d.label = config.effective_label();
  d.mode = std::string(to_string(config.mode));
  d.prompt_template = std::string(to_string(config.prompt_template));
  d.budget_tokens = config.budget_tokens;
  d.generator = resources.generator ? resources.generator->descriptor() : "";
  if (traits.uses_retrieval) {
    d.alpha = weights.alpha;
    d.beta = weights.beta;
    d.k = weights.k;
    if (traits.enhances_query) {
      d.query_modifiers = config.query_modifiers;
    }
    d.embedding_provider = resources.embedder ? resources.embedder->descriptor() : "";
    d.lexicon_version = resources.lexicon ? resources.lexicon->version() : "";
  }
  return d;
}

EvalRow run_item(const PipelineConfig& config, const ModeTraits& traits, const QAItem& item,
                 const EvalResources& resources) {
  EvalRow row;
  row.id = item.id;
  row.gold = item.gold;
  try {
    std::vector<ScoredDocument> docs;
    if (traits.uses_retrieval) {
      const std::span<const std::string> modifiers =
          traits.enhances_query ? std::span<const std::string>(config.query_modifiers)
                                : std::span<const std::string>();
      docs = retrieve(*resources.index, item.question, config.effective_weights(),
                      *resources.embedder, *resources.lexicon, modifiers);
      for (const auto& d : docs) {
        row.retrieved_chunk_ids.push_back(d.chunk_id);
      }
    }
    const PromptBundle bundle =
        build_prompt(config.prompt_template, item.question, item.task, docs, config.budget_tokens);
    row.prompt_hash = prompt_hash(bundle.rendered);

    const Completion completion = resources.generator->generate(
        bundle, {item.id, std::string(to_string(config.mode))});
    row.response = completion.text;
    switch (item.task.type) {
    case TaskType::multiple_choice: {
      const auto labels = item.task.labels();
      row.prediction = extract_mcq_answer(completion.text, labels);
      break;
    }
    case TaskType::yes_no:
      row.prediction = extract_yesno_answer(completion.text);
      break;
    case TaskType::free_form:
      break;
    }
    row.correct = strict_match(row.prediction, row.gold);
  } catch (const Error& e) {
    row.errored = true;
    row.error = e.what();
    row.prediction = {};
    row.correct = false;
  }
  return row;
}

EvalCounts recount(const std::vector<EvalRow>& rows) {
  EvalCounts c;
  c.total = rows.size();
  for (const auto& r : rows) {
    c.correct += r.correct ? 1 : 0;
    c.errored += r.errored ? 1 : 0;
    c.unparseable += (!r.errored && !r.prediction.parsed()) ? 1 : 0;
  }
  return c;
}

double accuracy_of(const EvalCounts& c) {
  return c.total == 0 ? 0.0 : static_cast<double>(c.correct) / static_cast<double>(c.total);
}

bool is_degraded(const EvalCounts& c) { return c.errored * 10 > c.total; }

std::string percent(double fraction) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << fraction * 100.0 << '%';
  return out.str();
}

json descriptor_json(const ConfigDescriptor& d) {
  return {
      {"label", d.label},
      {"mode", d.mode},
      {"alpha", d.alpha},
      {"beta", d.beta},
      {"k", d.k},
      {"template", d.prompt_template},
      {"query_modifiers", d.query_modifiers},
      {"budget_tokens", d.budget_tokens},
      {"embedding_provider", d.embedding_provider},
      {"lexicon_version", d.lexicon_version},
      {"generator", d.generator},
  };
}

json report_json(const EvalReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({
        {"id", r.id},
        {"prediction", r.prediction.value ? json(*r.prediction.value) : json(nullptr)},
        {"gold", r.gold},
        {"correct", r.correct},
        {"errored", r.errored},
        {"error", r.error},
        {"retrieved_chunk_ids", r.retrieved_chunk_ids},
        {"prompt_hash", r.prompt_hash},
        {"response", r.response},
    });
  }
  return {
      {"schema", "causalrag.eval_report/1"},
      {"config", descriptor_json(report.config)},
      {"counts",
       {{"total", report.counts.total},
        {"correct", report.counts.correct},
        {"unparseable", report.counts.unparseable},
        {"errored", report.counts.errored}}},
      {"accuracy", report.accuracy},
      {"degraded", report.degraded},
      {"timestamp", report.timestamp},
      {"rows", std::move(rows)},
  };
}

} // namespace

std::string_view to_string(DatasetKind kind) noexcept {
  return kind == DatasetKind::mcq ? "mcq" : "yes_no";
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view name) noexcept {
  if (name == "mcq") {
    return DatasetKind::mcq;
  }
  if (name == "yes_no" || name == "yesno") {
    return DatasetKind::yes_no;
  }
  return std::nullopt;
}

std::vector<QAItem> load_dataset(const std::filesystem::path& path, DatasetKind kind) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open dataset '" + path.string() + "'");
  }
  const std::string source = path.string();
  std::vector<QAItem> items;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_text(line).empty()) {
      continue;
    }
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) {
      throw ParseError(source, line_no, "record is not a JSON object");
    }

    QAItem item;
    item.id = required_string(record, "id", source, line_no);
    item.question = normalize_text(required_string(record, "question", source, line_no));
    const std::string answer = normalize_text(required_string(record, "answer", source, line_no));
    if (item.id.empty() || item.question.empty()) {
      throw ParseError(source, line_no, "empty id or question");
    }

    if (kind == DatasetKind::mcq) {
      const auto options = record.find("options");
      if (options == record.end() || !options->is_object()) {
        throw ParseError(source, line_no, "MCQ record needs an 'options' object");
      }
      std::vector<AnswerOption> parsed;
      for (const auto& [label, text] : options->items()) {
        if (label.size() != 1 || !text.is_string()) {
          throw ParseError(source, line_no, "option '" + label + "' needs a one-letter label and a string");
        }
        const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
        parsed.push_back({upper, text.get<std::string>()});
      }
      try {
        item.task = TaskKind::multiple_choice(std::move(parsed));
      } catch (const ConfigError& e) {
        throw ValidationError("item '" + item.id + "': " + e.what());
      }
      const std::string gold = to_lower_ascii(answer);
      const auto labels = item.task.labels();
      if (gold.size() != 1 ||
          std::find(labels.begin(), labels.end(),
                    static_cast<char>(std::toupper(static_cast<unsigned char>(gold[0])))) ==
              labels.end()) {
        throw ValidationError("item '" + item.id + "': gold answer '" + answer +
                              "' is not among the option labels");
      }
      item.gold = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(gold[0]))));
    } else {
      item.task = TaskKind::yes_no();
      item.gold = to_lower_ascii(answer);
      if (item.gold != "yes" && item.gold != "no") {
        throw ValidationError("item '" + item.id + "': gold answer '" + answer +
                              "' must be yes or no");
      }
    }

    if (!ids.insert(item.id).second) {
      throw ValidationError("duplicate item id '" + item.id + "'");
    }
    items.push_back(std::move(item));
  }
  return items;
}

bool strict_match(const ExtractedAnswer& prediction, std::string_view gold) noexcept {
  if (!prediction.value) {
    return false;
  }
  const std::string& p = *prediction.value;
  if (p.size() != gold.size()) {
    return false;
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (ascii_lower(p[i]) != ascii_lower(gold[i])) {
      return false;
    }
  }
  return true;
}

std::string_view to_string(PipelineMode mode) noexcept {
  switch (mode) {
  case PipelineMode::zero_shot:
    return "zero_shot";
  case PipelineMode::basic_rag:
    return "basic_rag";
  case PipelineMode::causal_rag_no_cot:
    return "causal_rag_no_cot";
  case PipelineMode::generic_cot_only:
    return "generic_cot_only";
  case PipelineMode::rag_plus_generic_cot:
    return "rag_plus_generic_cot";
  case PipelineMode::full_medcot_rag:
    return "full_medcot_rag";
  }
  return "zero_shot";
}

std::optional<PipelineMode> parse_pipeline_mode(std::string_view name) noexcept {
  for (auto m : kModes) {
    if (to_string(m) == name) {
      return m;
    }
  }
  return std::nullopt;
}

std::span<const PipelineMode> all_pipeline_modes() noexcept { return kModes; }

ModeTraits mode_traits(PipelineMode mode) noexcept {
  switch (mode) {
  case PipelineMode::zero_shot:
    return {false, false, false, PromptTemplate::none};
  case PipelineMode::basic_rag:
    return {true, true, false, PromptTemplate::none};
  case PipelineMode::causal_rag_no_cot:
    return {true, false, true, PromptTemplate::none};
  case PipelineMode::generic_cot_only:
    return {false, false, false, PromptTemplate::generic_v1};
  case PipelineMode::rag_plus_generic_cot:
    return {true, true, false, PromptTemplate::generic_v1};
  case PipelineMode::full_medcot_rag:
    return {true, false, true, PromptTemplate::cot_v1};
  }
  return {};
}

PipelineConfig PipelineConfig::for_mode(PipelineMode mode) {
  PipelineConfig config;
  config.mode = mode;
  config.prompt_template = mode_traits(mode).default_template;
  return config;
}

void PipelineConfig::validate() const {
  weights.validate();
  if (budget_tokens == 0) {
    throw ConfigError("budget_tokens must be positive");
  }
  if (mode == PipelineMode::full_medcot_rag) {
    if (!(weights.beta > 0.0)) {
      throw ConfigError("full_medcot_rag requires beta > 0");
    }
    if (prompt_template != PromptTemplate::cot_v1) {
      throw ConfigError("full_medcot_rag requires the cot_v1 template");
    }
  }
  if (mode_traits(mode).semantic_only && !(weights.alpha > 0.0)) {
    throw ConfigError(std::string(to_string(mode)) + " ranks by similarity and needs alpha > 0");
  }
}

std::string PipelineConfig::effective_label() const {
  return label.empty() ? std::string(to_string(mode)) : label;
}

RetrievalWeights PipelineConfig::effective_weights() const {
  RetrievalWeights w = weights;
  if (mode_traits(mode).semantic_only) {
    w.beta = 0.0;
  }
  return w;
}

EvalReport run_eval(const PipelineConfig& config, std::span<const QAItem> items,
                    const EvalResources& resources) {
  config.validate();
  const auto traits = mode_traits(config.mode);
  if (resources.generator == nullptr) {
    throw ConfigError("run_eval needs a generator");
  }
  if (traits.uses_retrieval) {
    if (!resources.index || !resources.embedder || !resources.lexicon) {
      throw ConfigError(std::string(to_string(config.mode)) +
                        " needs an index, an embedding provider and a lexicon");
    }
    check_compatible(*resources.index, *resources.embedder, *resources.lexicon);
  }

  EvalReport report;
  report.config = describe(config, resources);
  report.rows.resize(items.size());
  parallel_for_bounded(items.size(), config.concurrency, [&](std::size_t i) {
    report.rows[i] = run_item(config, traits, items[i], resources);
  });

  report.counts = recount(report.rows);
  report.accuracy = accuracy_of(report.counts);
  report.degraded = is_degraded(report.counts);
  report.timestamp = utc_timestamp();
  verify_report(report);
  return report;
}

void verify_report(const EvalReport& report) {
  const EvalCounts expected = recount(report.rows);
  if (!(expected == report.counts)) {
    throw Error("report counts disagree with its rows");
  }
  for (const auto& r : report.rows) {
    if (r.correct != strict_match(r.prediction, r.gold)) {
      throw Error("row '" + r.id + "' has a correct flag that disagrees with its prediction");
    }
  }
  if (report.accuracy != accuracy_of(expected)) {
    throw Error("report accuracy disagrees with its rows");
  }
  if (report.degraded != is_degraded(expected)) {
    throw Error("report degraded flag disagrees with its rows");
  }
}

std::string report_to_json(const EvalReport& report, int indent) {
  return report_json(report).dump(indent);
}

EvalReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    EvalReport r;
    const json& c = j.at("config");
    r.config.label = c.at("label").get<std::string>();
    r.config.mode = c.at("mode").get<std::string>();
    r.config.alpha = c.at("alpha").get<double>();
    r.config.beta = c.at("beta").get<double>();
    r.config.k = c.at("k").get<std::size_t>();
    r.config.prompt_template = c.at("template").get<std::string>();
    r.config.query_modifiers = c.at("query_modifiers").get<std::vector<std::string>>();
    r.config.budget_tokens = c.at("budget_tokens").get<std::size_t>();
    r.config.embedding_provider = c.at("embedding_provider").get<std::string>();
    r.config.lexicon_version = c.at("lexicon_version").get<std::string>();
    r.config.generator = c.at("generator").get<std::string>();

    const json& counts = j.at("counts");
    r.counts.total = counts.at("total").get<std::size_t>();
    r.counts.correct = counts.at("correct").get<std::size_t>();
    r.counts.unparseable = counts.at("unparseable").get<std::size_t>();
    r.counts.errored = counts.at("errored").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.degraded = j.at("degraded").get<bool>();
    r.timestamp = j.at("timestamp").get<std::string>();

    for (const auto& row : j.at("rows")) {
      EvalRow e;
      e.id = row.at("id").get<std::string>();
      if (!row.at("prediction").is_null()) {
        e.prediction.value = row.at("prediction").get<std::string>();
      }
      e.gold = row.at("gold").get<std::string>();
      e.correct = row.at("correct").get<bool>();
      e.errored = row.at("errored").get<bool>();
      e.error = row.at("error").get<std::string>();
      e.retrieved_chunk_ids = row.at("retrieved_chunk_ids").get<std::vector<std::string>>();
      e.prompt_hash = row.at("prompt_hash").get<std::string>();
      e.response = row.at("response").get<std::string>();
      r.rows.push_back(std::move(e));
    }
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  }
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out << "configuration: " << report.config.label << " (mode " << report.config.mode
      << ", template " << report.config.prompt_template << ")\n";
  if (!report.config.embedding_provider.empty()) {
    out << "retrieval:     alpha=" << report.config.alpha << " beta=" << report.config.beta
        << " k=" << report.config.k << " provider=" << report.config.embedding_provider
        << " lexicon=" << report.config.lexicon_version << '\n';
  }
  out << "generator:     " << report.config.generator << '\n';
  out << "accuracy:      " << percent(report.accuracy) << " (" << report.counts.correct << '/'
      << report.counts.total << ")\n";
  out << "unparseable:   " << report.counts.unparseable << '\n';
  out << "errored:       " << report.counts.errored << (report.degraded ? "  [DEGRADED]" : "")
      << '\n';
  return out.str();
}

std::optional<double> relative_delta(double accuracy, double baseline) noexcept {
  if (baseline == 0.0) {
    return std::nullopt;
  }
  return (accuracy - baseline) / baseline;
}

std::string format_delta(std::optional<double> delta) {
  if (!delta) {
    return "n/a";
  }
  const double tenths = std::round(*delta * 1000.0) / 10.0;
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  if (tenths == 0.0) {
    out << 0.0 << '%';
  } else {
    out << (tenths > 0 ? "+" : "") << tenths << '%';
  }
  return out.str();
}

std::vector<AblationRow> comparison_table(std::span<const EvalReport> reports,
                                          std::string_view baseline_label) {
  const auto base = std::find_if(reports.begin(), reports.end(), [&](const EvalReport& r) {
    return r.config.label == baseline_label;
  });
  if (base == reports.end()) {
    throw ConfigError("baseline configuration '" + std::string(baseline_label) +
                      "' is not part of the ablation");
  }
  std::vector<AblationRow> table;
  for (const auto& r : reports) {
    AblationRow row;
    row.label = r.config.label;
    row.accuracy = r.accuracy;
    row.is_baseline = (&r == &*base);
    row.relative_delta = row.is_baseline ? std::optional<double>(0.0)
                                         : relative_delta(r.accuracy, base->accuracy);
    table.push_back(std::move(row));
  }
  return table;
}

AblationResult run_ablation(std::span<const PipelineConfig> configs, std::span<const QAItem> items,
                            const EvalResources& resources, std::string_view baseline_label) {
  if (configs.empty()) {
    throw ConfigError("ablation needs at least one configuration");
  }
  std::unordered_set<std::string> labels;
  bool has_baseline = false;
  for (const auto& c : configs) {
    c.validate();
    if (!labels.insert(c.effective_label()).second) {
      throw ConfigError("duplicate ablation label '" + c.effective_label() + "'");
    }
    has_baseline = has_baseline || c.effective_label() == baseline_label;
  }
  if (!has_baseline) {
    throw ConfigError("baseline configuration '" + std::string(baseline_label) +
                      "' is not part of the ablation");
  }

  AblationResult result;
  result.baseline_label = std::string(baseline_label);
  for (const auto& c : configs) {
    result.reports.push_back(run_eval(c, items, resources));
  }
  result.table = comparison_table(result.reports, baseline_label);
  return result;
}

std::string format_ablation_table(const AblationResult& result) {
  std::size_t width = std::string_view("configuration").size();
  for (const auto& row : result.table) {
    width = std::max(width, row.label.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width) + 2) << "configuration" << std::right
      << std::setw(10) << "accuracy" << std::setw(12) << "correct"
      << "  delta vs " << result.baseline_label << '\n';
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const auto& row = result.table[i];
    const auto& counts = result.reports[i].counts;
    const std::string correct = std::to_string(counts.correct) + "/" + std::to_string(counts.total);
    out << std::left << std::setw(static_cast<int>(width) + 2) << row.label << std::right
        << std::setw(10) << percent(row.accuracy) << std::setw(12) << correct << "  "
        << format_delta(row.relative_delta) << (row.is_baseline ? " (baseline)" : "") << '\n';
  }
  return out.str();
}

std::string ablation_to_json(const AblationResult& result, int indent) {
  json table = json::array();
  for (const auto& row : result.table) {
    table.push_back({
        {"label", row.label},
        {"accuracy", row.accuracy},
        {"relative_delta", row.relative_delta ? json(*row.relative_delta) : json(nullptr)},
        {"baseline", row.is_baseline},
    });
  }
  json reports = json::array();
  for (const auto& r : result.reports) {
    reports.push_back(report_json(r));
  }
  return json{{"schema", "causalrag.ablation/1"},
              {"baseline", result.baseline_label},
              {"table", std::move(table)},
              {"reports", std::move(reports)}}
      .dump(indent);
}

} // namespace causalrag
