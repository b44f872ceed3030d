#include "cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "causalrag/causal.hpp"
#include "causalrag/corpus.hpp"
#include "causalrag/embedding.hpp"
#include "causalrag/error.hpp"
#include "causalrag/evaluation.hpp"
#include "causalrag/generation.hpp"
#include "causalrag/index.hpp"
#include "causalrag/prompt.hpp"
#include "causalrag/version.hpp"
#include "cli/config_file.hpp"

namespace causalrag::cli {
namespace {

struct EmbedFlags {
  std::string kind = "local_hash";
  std::size_t dim = 0; // 0: the index's dimension, or 256 when building
  std::string url;
  std::string model;
  std::string key_env;
  int timeout_ms = 30000;
  std::size_t batch = 64;
};

struct GenFlags {
  std::string kind = "scripted_mock";
  std::string script;
  std::string url;
  std::string model;
  std::string key_env;
  std::size_t max_new_tokens = 256;
  double temperature = 0.0;
  int timeout_ms = 60000;
};

struct RetrievalFlags {
  double alpha = 0.7;
  double beta = 0.3;
  std::size_t k = 5;
  std::vector<std::string> modifiers = default_query_modifiers();
  bool no_modifiers = false;
};

struct AppConfig {
  std::vector<std::string> corpus;
  std::string out;
  std::size_t max_chunk_chars = 1200;
  std::size_t overlap_chars = 200;

  std::string chunks;
  std::string index;
  std::string lexicon;
  double saturation = kDefaultSaturation;

  std::string query;
  bool show_psi = false;

  std::string question;
  std::string task = "mcq";
  std::vector<std::string> options;
  std::string item_id = "cli";
  bool show_prompt = false;

  std::string dataset;
  std::string kind = "mcq";
  std::string mode = "full_medcot_rag";
  std::vector<std::string> modes;
  std::string baseline = "generic_cot_only";

  std::string template_name;
  std::size_t budget_tokens = kDefaultContextBudget;
  std::size_t concurrency = 4;

  EmbedFlags embed;
  GenFlags gen;
  RetrievalFlags retrieval;
};

// --- option registration -----------------------------------------------------

void add_embedding_options(CLI::App& sub, EmbedFlags& f) {
  sub.add_option("--embedder", f.kind, "Embedding provider")
      ->check(CLI::IsMember({"local_hash", "remote_http"}))
      ->capture_default_str();
  sub.add_option("--dim", f.dim, "Embedding dimension (0: from the index, else 256)");
  sub.add_option("--embed-url", f.url, "Embeddings endpoint URL (remote_http)");
  sub.add_option("--embed-model", f.model, "Embedding model name (remote_http)");
  sub.add_option("--embed-key-env", f.key_env,
                 "Environment variable holding the embeddings API key");
  sub.add_option("--embed-timeout-ms", f.timeout_ms, "Embedding request timeout")
      ->capture_default_str();
  sub.add_option("--embed-batch", f.batch, "Texts per embedding request")->capture_default_str();
}

void add_generation_options(CLI::App& sub, GenFlags& f) {
  sub.add_option("--generator", f.kind, "Generation provider")
      ->check(CLI::IsMember({"scripted_mock", "remote_chat"}))
      ->capture_default_str();
  sub.add_option("--script", f.script, "Mock script (JSON Lines) for scripted_mock");
  sub.add_option("--chat-url", f.url, "Chat-completions endpoint URL (remote_chat)");
  sub.add_option("--chat-model", f.model, "Chat model name (remote_chat)");
  sub.add_option("--chat-key-env", f.key_env, "Environment variable holding the chat API key");
  sub.add_option("--max-new-tokens", f.max_new_tokens, "Generation budget")->capture_default_str();
  sub.add_option("--temperature", f.temperature, "Sampling temperature")->capture_default_str();
  sub.add_option("--gen-timeout-ms", f.timeout_ms, "Generation request timeout")
      ->capture_default_str();
}

void add_retrieval_options(CLI::App& sub, AppConfig& cfg) {
  auto& f = cfg.retrieval;
  sub.add_option("--k", f.k, "Number of chunks to retrieve")->capture_default_str();
  sub.add_option("--alpha", f.alpha, "Weight on semantic similarity")->capture_default_str();
  sub.add_option("--beta", f.beta, "Weight on causal relevance")->capture_default_str();
  sub.add_option("--modifiers", f.modifiers, "Clinical query modifiers (comma separated)")
      ->delimiter(',');
  sub.add_flag("--no-modifiers", f.no_modifiers, "Do not enhance the query");
  sub.add_option("--lexicon", cfg.lexicon, "Causal lexicon file (JSON Lines)");
}

// --- helpers ---------------------------------------------------------------

EmbeddingProviderConfig embedding_config(const AppConfig& cfg, const Index* index) {
  EmbeddingProviderConfig c;
  c.kind = cfg.embed.kind == "remote_http" ? EmbeddingProviderKind::remote_http
                                           : EmbeddingProviderKind::local_hash;
  c.dim = cfg.embed.dim != 0 ? cfg.embed.dim : (index ? index->dim() : 256);
  c.endpoint_url = cfg.embed.url;
  c.model_name = cfg.embed.model;
  c.api_key_env_var = cfg.embed.key_env;
  c.timeout = std::chrono::milliseconds(cfg.embed.timeout_ms);
  c.batch_size = cfg.embed.batch;
  c.max_in_flight = cfg.concurrency;
  c.validate();
  return c;
}

GenProviderConfig generation_config(const AppConfig& cfg) {
  GenProviderConfig c;
  c.kind = cfg.gen.kind == "remote_chat" ? GenProviderKind::remote_chat
                                         : GenProviderKind::scripted_mock;
  c.script_path = cfg.gen.script;
  c.endpoint_url = cfg.gen.url;
  c.model_name = cfg.gen.model;
  c.api_key_env_var = cfg.gen.key_env;
  c.max_new_tokens = cfg.gen.max_new_tokens;
  c.temperature = cfg.gen.temperature;
  c.timeout = std::chrono::milliseconds(cfg.gen.timeout_ms);
  c.max_in_flight = cfg.concurrency;
  c.validate();
  return c;
}

RetrievalWeights weights_of(const AppConfig& cfg) {
  RetrievalWeights w{cfg.retrieval.alpha, cfg.retrieval.beta, cfg.retrieval.k};
  w.validate();
  return w;
}

std::vector<std::string> modifiers_of(const AppConfig& cfg) {
  return cfg.retrieval.no_modifiers ? std::vector<std::string>{} : cfg.retrieval.modifiers;
}

CausalLexicon lexicon_of(const AppConfig& cfg) {
  return load_lexicon(cfg.lexicon.empty() ? std::nullopt
                                          : std::optional<std::filesystem::path>(cfg.lexicon));
}

PromptTemplate template_of(const std::string& name, PromptTemplate fallback) {
  if (name.empty()) {
    return fallback;
  }
  const auto t = parse_prompt_template(name);
  if (!t) {
    throw ConfigError("unknown template '" + name + "' (expected cot_v1, generic_v1 or none)");
  }
  return *t;
}

PipelineMode mode_of(const std::string& name) {
  const auto m = parse_pipeline_mode(name);
  if (!m) {
    throw ConfigError("unknown mode '" + name + "'");
  }
  return *m;
}

DatasetKind dataset_kind_of(const std::string& name) {
  const auto k = parse_dataset_kind(name);
  if (!k) {
    throw ConfigError("unknown dataset kind '" + name + "' (expected mcq or yes_no)");
  }
  return *k;
}

PipelineConfig pipeline_config(const AppConfig& cfg, PipelineMode mode, bool template_override) {
  PipelineConfig pc = PipelineConfig::for_mode(mode);
  pc.weights = {cfg.retrieval.alpha, cfg.retrieval.beta, cfg.retrieval.k};
  pc.query_modifiers = modifiers_of(cfg);
  pc.budget_tokens = cfg.budget_tokens;
  pc.concurrency = cfg.concurrency;
  if (template_override) {
    pc.prompt_template = template_of(cfg.template_name, pc.prompt_template);
  }
  pc.validate();
  return pc;
}

bool needs_retrieval(std::span<const PipelineConfig> configs) {
  return std::any_of(configs.begin(), configs.end(),
                     [](const PipelineConfig& c) { return mode_traits(c.mode).uses_retrieval; });
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write '" + path + "'");
  }
  out << content << '\n';
}

std::string preview(std::string_view text, std::size_t max_chars) {
  if (text.size() <= max_chars) {
    return std::string(text);
  }
  std::size_t cut = max_chars;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) {
    --cut;
  }
  return std::string(text.substr(0, cut)) + "...";
}

// --- commands ----------------------------------------------------------------

int cmd_ingest(const AppConfig& cfg, std::ostream& out) {
  const ChunkingOptions options{cfg.max_chunk_chars, cfg.overlap_chars};
  if (options.max_chunk_chars == 0 || options.overlap_chars >= options.max_chunk_chars) {
    throw ConfigError("need 0 <= overlap-chars < max-chunk-chars");
  }
  std::vector<std::filesystem::path> paths(cfg.corpus.begin(), cfg.corpus.end());
  const auto docs = load_corpora(paths);
  std::vector<Chunk> chunks;
  for (const auto& d : docs) {
    auto cs = chunk_document(d, options);
    std::move(cs.begin(), cs.end(), std::back_inserter(chunks));
  }
  write_chunks(cfg.out, chunks);
  out << docs.size() << " documents, " << chunks.size() << " chunks\n";
  return 0;
}

int cmd_index(const AppConfig& cfg, std::ostream& out) {
  const auto lexicon = lexicon_of(cfg);
  const auto embed = embedding_config(cfg, nullptr);
  const auto chunks = read_chunks(cfg.chunks);
  if (chunks.empty()) {
    throw ConfigError("chunk file '" + cfg.chunks + "' is empty");
  }
  auto provider = make_embedding_provider(embed);
  const Index index = build_index(chunks, *provider, lexicon, cfg.saturation);
  index.save(cfg.out);
  out << "indexed " << index.size() << " chunks (dim " << index.dim() << ", provider "
      << index.header().provider_descriptor << ", lexicon " << index.header().lexicon_version
      << ")\n";
  return 0;
}

int cmd_retrieve(const AppConfig& cfg, std::ostream& out) {
  const auto weights = weights_of(cfg);
  const auto lexicon = lexicon_of(cfg);
  const Index index = Index::load(cfg.index);
  const auto embed = embedding_config(cfg, &index);
  auto provider = make_embedding_provider(embed);
  const auto modifiers = modifiers_of(cfg);
  const auto results = retrieve(index, cfg.query, weights, *provider, lexicon, modifiers);

  out << std::left << std::setw(6) << "rank" << std::setw(24) << "chunk_id" << std::right
      << std::setw(11) << "composite" << std::setw(10) << "sim";
  if (cfg.show_psi) {
    out << std::setw(8) << "psi";
  }
  out << "  text\n";
  out << std::fixed << std::setprecision(4);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << std::left << std::setw(6) << (i + 1) << std::setw(24) << r.chunk_id << std::right
        << std::setw(11) << r.composite << std::setw(10) << r.sim;
    if (cfg.show_psi) {
      out << std::setw(8) << r.psi;
    }
    out << "  " << preview(r.text, 72) << '\n';
  }
  return 0;
}

TaskKind task_of(const AppConfig& cfg) {
  if (cfg.task == "yes_no") {
    return TaskKind::yes_no();
  }
  if (cfg.task == "free_form") {
    return TaskKind::free_form();
  }
  if (cfg.task != "mcq") {
    throw ConfigError("unknown task '" + cfg.task + "' (expected mcq, yes_no or free_form)");
  }
  std::vector<AnswerOption> options;
  for (const auto& o : cfg.options) {
    const auto eq = o.find('=');
    if (eq != 1) {
      throw ConfigError("option '" + o + "' must look like A=text");
    }
    options.push_back({static_cast<char>(std::toupper(static_cast<unsigned char>(o[0]))),
                       o.substr(2)});
  }
  return TaskKind::multiple_choice(std::move(options));
}

int cmd_ask(const AppConfig& cfg, std::ostream& out) {
  const TaskKind task = task_of(cfg);
  const PromptTemplate tmpl = template_of(cfg.template_name, PromptTemplate::cot_v1);
  const auto gen_config = generation_config(cfg);

  std::vector<ScoredDocument> docs;
  if (!cfg.index.empty()) {
    const auto weights = weights_of(cfg);
    const auto lexicon = lexicon_of(cfg);
    const Index index = Index::load(cfg.index);
    auto provider = make_embedding_provider(embedding_config(cfg, &index));
    docs = retrieve(index, cfg.question, weights, *provider, lexicon, modifiers_of(cfg));
  }
  const PromptBundle bundle = build_prompt(tmpl, cfg.question, task, docs, cfg.budget_tokens);
  if (cfg.show_prompt) {
    out << "----- prompt (" << bundle.token_estimate << " tokens est., " << bundle.dropped_chunks
        << " chunks dropped) -----\n"
        << bundle.rendered << "\n----- end prompt -----\n";
  }

  auto generator = make_generator(gen_config);
  const Completion completion = generator->generate(bundle, {cfg.item_id, ""});
  out << completion.text << '\n';

  ExtractedAnswer answer;
  if (task.type == TaskType::multiple_choice) {
    const auto labels = task.labels();
    answer = extract_mcq_answer(completion.text, labels);
  } else if (task.type == TaskType::yes_no) {
    answer = extract_yesno_answer(completion.text);
  }
  if (task.type != TaskType::free_form) {
    out << "answer: " << answer.display() << '\n';
  }
  return 0;
}

struct EvalSetup {
  std::vector<QAItem> items;
  std::optional<Index> index;
  std::optional<CausalLexicon> lexicon;
  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<Generator> generator;

  EvalResources resources() const {
    return {index ? &*index : nullptr, embedder.get(), lexicon ? &*lexicon : nullptr,
            generator.get()};
  }
};

// Everything is validated and loaded before any provider is created.
EvalSetup prepare_eval(const AppConfig& cfg, std::span<const PipelineConfig> configs) {
  EvalSetup s;
  const auto gen_config = generation_config(cfg);
  s.items = load_dataset(cfg.dataset, dataset_kind_of(cfg.kind));
  if (needs_retrieval(configs)) {
    if (cfg.index.empty()) {
      throw ConfigError("retrieval modes need --index");
    }
    s.lexicon = lexicon_of(cfg);
    s.index = Index::load(cfg.index);
    s.embedder = make_embedding_provider(embedding_config(cfg, &*s.index));
    check_compatible(*s.index, *s.embedder, *s.lexicon);
  }
  s.generator = make_generator(gen_config);
  return s;
}

int cmd_eval(const AppConfig& cfg, std::ostream& out) {
  const std::vector<PipelineConfig> configs{pipeline_config(cfg, mode_of(cfg.mode), true)};
  const EvalSetup setup = prepare_eval(cfg, configs);
  const EvalReport report = run_eval(configs.front(), setup.items, setup.resources());
  out << format_report(report);
  if (!cfg.out.empty()) {
    write_file(cfg.out, report_to_json(report));
    out << "report written to " << cfg.out << '\n';
  }
  return 0;
}

int cmd_ablate(const AppConfig& cfg, std::ostream& out) {
  std::vector<PipelineConfig> configs;
  if (cfg.modes.empty()) {
    for (auto m : all_pipeline_modes()) {
      configs.push_back(pipeline_config(cfg, m, false));
    }
  } else {
    for (const auto& name : cfg.modes) {
      configs.push_back(pipeline_config(cfg, mode_of(name), false));
    }
  }
  const EvalSetup setup = prepare_eval(cfg, configs);
  const AblationResult result = run_ablation(configs, setup.items, setup.resources(), cfg.baseline);
  out << format_ablation_table(result);
  if (!cfg.out.empty()) {
    write_file(cfg.out, ablation_to_json(result));
    out << "ablation written to " << cfg.out << '\n';
  }
  return 0;
}

// --- config file injection ---------------------------------------------------

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) {
      return args[i].substr(9);
    }
  }
  return std::nullopt;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin() + 1, args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

bool is_truthy(const std::string& value) {
  const std::string v = to_lower_ascii(value);
  return v == "1" || v == "true" || v == "yes" || v == "on";
}

// Appends `--key value` for every config entry that belongs to the chosen
// subcommand and was not given explicitly. Flags on the command line win.
std::vector<std::string> inject_config(const CLI::App& app, const std::vector<std::string>& args,
                                       const ConfigValues& values) {
  std::set<std::string> known;
  for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    for (const auto* opt : sub->get_options()) {
      for (const auto& name : opt->get_lnames()) {
        known.insert(name);
      }
    }
  }
  for (const auto& [key, value] : values) {
    if (!known.contains(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  const CLI::App* chosen = nullptr;
  for (std::size_t i = 1; i < args.size() && chosen == nullptr; ++i) {
    for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
      if (sub->get_name() == args[i]) {
        chosen = sub;
        break;
      }
    }
  }
  std::vector<std::string> result = args;
  if (chosen == nullptr) {
    return result;
  }
  for (const auto* opt : chosen->get_options()) {
    for (const auto& name : opt->get_lnames()) {
      const auto it = values.find(name);
      if (it == values.end() || given_on_command_line(args, "--" + name)) {
        continue;
      }
      if (opt->get_expected_max() == 0) {
        if (is_truthy(it->second)) {
          result.push_back("--" + name);
        }
      } else {
        result.push_back("--" + name);
        result.push_back(it->second);
      }
    }
  }
  return result;
}

} // namespace

std::string version_text() {
  std::ostringstream out;
  out << "causalrag " << library_version() << '\n'
      << "templates: cot_v1 generic_v1 none\n"
      << "index format: " << kIndexFormatVersion << '\n'
      << "default lexicon: " << CausalLexicon::builtin().version();
  return out.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  AppConfig cfg;
  CLI::App app{"Causal-aware retrieval, chain-of-thought prompting and QA evaluation", "causalrag"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_text);
  std::string config_path;
  app.add_option("--config", config_path, "Flat key = value file supplying flag defaults");

  auto* ingest = app.add_subcommand("ingest", "Load corpus files and write chunks");
  ingest->add_option("--corpus", cfg.corpus, "Corpus JSON Lines file(s)")->required()->delimiter(',');
  ingest->add_option("--out", cfg.out, "Output chunk file")->required();
  ingest->add_option("--max-chunk-chars", cfg.max_chunk_chars)->capture_default_str();
  ingest->add_option("--overlap-chars", cfg.overlap_chars)->capture_default_str();

  auto* index = app.add_subcommand("index", "Embed and score chunks into an index file");
  index->add_option("--chunks", cfg.chunks, "Chunk file from `ingest`")->required();
  index->add_option("--out", cfg.out, "Output index file")->required();
  index->add_option("--lexicon", cfg.lexicon, "Causal lexicon file (JSON Lines)");
  index->add_option("--saturation", cfg.saturation, "Causal density that saturates psi")
      ->capture_default_str();
  index->add_option("--concurrency", cfg.concurrency)->capture_default_str();
  add_embedding_options(*index, cfg.embed);

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Rank chunks for a query");
  retrieve_cmd->add_option("--index", cfg.index, "Index file")->required();
  retrieve_cmd->add_option("--query", cfg.query, "Query text")->required();
  retrieve_cmd->add_flag("--show-psi", cfg.show_psi, "Print the causal score column");
  add_retrieval_options(*retrieve_cmd, cfg);
  add_embedding_options(*retrieve_cmd, cfg.embed);

  auto* ask = app.add_subcommand("ask", "Answer one question");
  ask->add_option("--question", cfg.question, "Question text")->required();
  ask->add_option("--index", cfg.index, "Index file (omit for no retrieval)");
  ask->add_option("--task", cfg.task, "mcq, yes_no or free_form")->capture_default_str();
  ask->add_option("--option", cfg.options, "Answer option as LETTER=text (repeatable)");
  ask->add_option("--template", cfg.template_name, "cot_v1, generic_v1 or none");
  ask->add_option("--item-id", cfg.item_id, "Item id passed to the generator")->capture_default_str();
  ask->add_option("--budget-tokens", cfg.budget_tokens)->capture_default_str();
  ask->add_flag("--show-prompt", cfg.show_prompt, "Print the rendered prompt");
  add_retrieval_options(*ask, cfg);
  add_embedding_options(*ask, cfg.embed);
  add_generation_options(*ask, cfg.gen);

  auto add_eval_options = [&](CLI::App& sub) {
    sub.add_option("--index", cfg.index, "Index file (needed by retrieval modes)");
    sub.add_option("--dataset", cfg.dataset, "Dataset JSON Lines file")->required();
    sub.add_option("--kind", cfg.kind, "mcq or yes_no")->capture_default_str();
    sub.add_option("--out", cfg.out, "Write the JSON report here");
    sub.add_option("--budget-tokens", cfg.budget_tokens)->capture_default_str();
    sub.add_option("--concurrency", cfg.concurrency, "Items in flight")->capture_default_str();
    add_retrieval_options(sub, cfg);
    add_embedding_options(sub, cfg.embed);
    add_generation_options(sub, cfg.gen);
  };

  auto* eval = app.add_subcommand("eval", "Evaluate one pipeline configuration");
  eval->add_option("--mode", cfg.mode, "Pipeline mode")->capture_default_str();
  eval->add_option("--template", cfg.template_name, "Override the mode's template");
  add_eval_options(*eval);

  auto* ablate = app.add_subcommand("ablate", "Evaluate several modes and compare them");
  ablate->add_option("--modes", cfg.modes, "Modes to run (comma separated, default all)")
      ->delimiter(',');
  ablate->add_option("--baseline", cfg.baseline, "Baseline mode for relative deltas")
      ->capture_default_str();
  add_eval_options(*ablate);

  try {
    std::vector<std::string> effective = args;
    if (const auto path = find_config_path(args)) {
      effective = inject_config(app, args, load_config_file(*path));
    }
    std::vector<std::string> reversed(effective.rbegin(), effective.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (ingest->parsed()) {
      return cmd_ingest(cfg, out);
    }
    if (index->parsed()) {
      return cmd_index(cfg, out);
    }
    if (retrieve_cmd->parsed()) {
      return cmd_retrieve(cfg, out);
    }
    if (ask->parsed()) {
      return cmd_ask(cfg, out);
    }
    if (eval->parsed()) {
      return cmd_eval(cfg, out);
    }
    if (ablate->parsed()) {
      return cmd_ablate(cfg, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

} // namespace causalrag::cli
