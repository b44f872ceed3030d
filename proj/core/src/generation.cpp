#include "causalrag/generation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "causalrag/error.hpp"
#include "causalrag/hashing.hpp"
#include "causalrag/text.hpp"

namespace causalrag {
namespace {

using json = nlohmann::json;

constexpr std::string_view kFinalAnswerMarker = "final answer";
constexpr std::string_view kDefaultItem = "*";

bool is_alpha(char c) noexcept {
  const char l = ascii_lower(c);
  return l >= 'a' && l <= 'z';
}

bool is_alnum(char c) noexcept { return is_alpha(c) || (c >= '0' && c <= '9'); }

// Characters allowed between the marker and the answer.
bool is_separator(char c) noexcept {
  return is_space(c) || c == ':' || c == '-' || c == '*' || c == '(' || c == '[' || c == '=' ||
         c == '.' || c == '#' || c == '_' || c == '"' || c == '\'' ||
         static_cast<unsigned char>(c) >= 0x80; // dashes and quotes outside ASCII
}

// Position just past the separator run that follows a marker at `marker_pos`.
std::size_t skip_separators(std::string_view lowered, std::size_t marker_pos) {
  std::size_t pos = marker_pos + kFinalAnswerMarker.size();
  while (pos < lowered.size() && is_separator(lowered[pos])) {
    ++pos;
  }
  return pos;
}

bool word_at(std::string_view lowered, std::size_t pos, std::string_view word) {
  if (lowered.substr(pos, word.size()) != word) {
    return false;
  }
  const std::size_t end = pos + word.size();
  return end == lowered.size() || !is_alnum(lowered[end]);
}

std::vector<std::size_t> marker_positions(std::string_view lowered) {
  std::vector<std::size_t> out;
  for (std::size_t pos = lowered.find(kFinalAnswerMarker); pos != std::string_view::npos;
       pos = lowered.find(kFinalAnswerMarker, pos + 1)) {
    out.push_back(pos);
  }
  return out;
}

std::string_view last_nonempty_line(std::string_view text) {
  std::size_t end = text.size();
  while (end > 0) {
    std::size_t start = text.rfind('\n', end - 1);
    start = (start == std::string_view::npos) ? 0 : start + 1;
    const auto line = text.substr(start, end - start);
    if (!std::all_of(line.begin(), line.end(), is_space)) {
      return line;
    }
    if (start == 0) {
      break;
    }
    end = start - 1;
  }
  return {};
}

bool contains_label(std::span<const char> labels, char upper) {
  return std::any_of(labels.begin(), labels.end(),
                     [&](char l) { return static_cast<char>(ascii_lower(l)) == ascii_lower(upper); });
}

char to_upper(char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c; }

} // namespace

std::string_view to_string(GenProviderKind kind) noexcept {
  return kind == GenProviderKind::remote_chat ? "remote_chat" : "scripted_mock";
}

void GenProviderConfig::validate() const {
  if (max_new_tokens < 1) {
    throw ConfigError("max_new_tokens must be at least 1");
  }
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be a non-negative number");
  }
  if (timeout.count() <= 0) {
    throw ConfigError("generation timeout must be positive");
  }
  if (kind == GenProviderKind::remote_chat && endpoint_url.empty()) {
    throw ConfigError("remote_chat generator needs an endpoint URL");
  }
  if (kind == GenProviderKind::scripted_mock && script_path.empty()) {
    throw ConfigError("scripted_mock generator needs a script path");
  }
}

std::string GenProviderConfig::descriptor() const {
  if (kind == GenProviderKind::scripted_mock) {
    return "scripted_mock:" + script_path.filename().string();
  }
  std::string t = std::to_string(temperature);
  return "remote_chat:" + model_name + ":max_tokens=" + std::to_string(max_new_tokens) +
         ":temperature=" + t;
}

std::string prompt_hash(std::string_view rendered) { return to_hex64(fnv1a64(rendered)); }

// --- scripted mock ---------------------------------------------------------

ScriptedMockGenerator::ScriptedMockGenerator(const std::filesystem::path& script_path)
    : source_name_(script_path.filename().string()) {
  std::ifstream in(script_path);
  if (!in) {
    throw Error("cannot open mock script '" + script_path.string() + "'");
  }
  const std::string source = script_path.string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_text(line).empty()) {
      continue;
    }
    std::string item_id;
    std::string mode;
    std::string response;
    try {
      const json record = json::parse(line);
      item_id = record.at("item_id").get<std::string>();
      response = record.at("response").get<std::string>();
      if (record.contains("mode")) {
        mode = record.at("mode").get<std::string>();
      }
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, std::string("bad script row: ") + e.what());
    }
    if (item_id.empty()) {
      throw ParseError(source, line_no, "empty item_id");
    }
    if (!responses_.emplace(std::make_pair(mode, item_id), std::move(response)).second) {
      throw ParseError(source, line_no, "duplicate script row for item '" + item_id + "'");
    }
  }
}

ScriptedMockGenerator::ScriptedMockGenerator(
    std::map<std::pair<std::string, std::string>, std::string> responses, std::string source_name)
    : responses_(std::move(responses)), source_name_(std::move(source_name)) {}

Completion ScriptedMockGenerator::generate(const PromptBundle& prompt,
                                           const GenerationRequest& request) {
  const std::string wildcard(kDefaultItem);
  const std::pair<std::string, std::string> keys[] = {
      {request.mode, request.item_id},
      {"", request.item_id},
      {request.mode, wildcard},
      {"", wildcard},
  };
  for (const auto& key : keys) {
    if (auto it = responses_.find(key); it != responses_.end()) {
      return {it->second, "scripted_mock:" + source_name_, prompt_hash(prompt.rendered)};
    }
  }
  throw GenerationError(request.item_id, "mock script has no response and no default row");
}

std::string ScriptedMockGenerator::descriptor() const { return "scripted_mock:" + source_name_; }

// --- remote chat -------------------------------------------------------------

RemoteChatGenerator::RemoteChatGenerator(GenProviderConfig config, std::shared_ptr<HttpClient> http)
    : config_(std::move(config)), http_(std::move(http)),
      api_key_(resolve_api_key(config_.api_key_env_var)) {
  config_.validate();
  if (!http_) {
    http_ = make_default_http_client();
  }
}

std::string RemoteChatGenerator::request_body(const PromptBundle& prompt) const {
  const json body = {
      {"model", config_.model_name},
      {"messages",
       json::array({{{"role", "system"}, {"content", prompt.system}},
                    {{"role", "user"}, {"content", prompt.user}}})},
      {"max_tokens", config_.max_new_tokens},
      {"temperature", config_.temperature},
  };
  return body.dump();
}

Completion RemoteChatGenerator::generate(const PromptBundle& prompt,
                                         const GenerationRequest& request) {
  HttpHeaders headers{{"Content-Type", "application/json"}};
  if (api_key_) {
    headers.emplace_back("Authorization", "Bearer " + *api_key_);
  }
  const auto started = std::chrono::steady_clock::now();
  HttpResponse response;
  try {
    response = post_with_retries(*http_, config_.endpoint_url, request_body(prompt), headers,
                                 config_.timeout, config_.retry);
  } catch (const ProviderError& e) {
    throw GenerationError(request.item_id, e.what());
  }
  const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);

  std::string text;
  try {
    const json parsed = json::parse(response.body);
    text = parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw GenerationError(request.item_id, std::string("malformed chat response: ") + e.what());
  }
  return {std::move(text),
          "model=" + config_.model_name + ";latency_ms=" + std::to_string(latency.count()),
          prompt_hash(prompt.rendered)};
}

std::string RemoteChatGenerator::descriptor() const { return config_.descriptor(); }

std::unique_ptr<Generator> make_generator(const GenProviderConfig& config,
                                          std::shared_ptr<HttpClient> http) {
  config.validate();
  if (config.kind == GenProviderKind::scripted_mock) {
    return std::make_unique<ScriptedMockGenerator>(config.script_path);
  }
  return std::make_unique<RemoteChatGenerator>(config, std::move(http));
}

Completion generate(Generator& generator, const PromptBundle& prompt,
                    const GenerationRequest& request) {
  return generator.generate(prompt, request);
}

// --- answer extraction -------------------------------------------------------

ExtractedAnswer extract_mcq_answer(std::string_view completion, std::span<const char> valid_labels) {
  const std::string lowered = to_lower_ascii(completion);
  const std::string_view view(lowered);

  const auto markers = marker_positions(view);
  for (auto it = markers.rbegin(); it != markers.rend(); ++it) {
    const std::size_t pos = skip_separators(view, *it);
    if (pos < view.size() && is_alpha(view[pos]) &&
        (pos + 1 == view.size() || !is_alnum(view[pos + 1]))) {
      if (contains_label(valid_labels, view[pos])) {
        return {std::string(1, to_upper(view[pos]))};
      }
      break; // last marker names an invalid letter: use the fallback
    }
  }

  // Fallback: last "(x)" or standalone letter on the final non-empty line.
  // Lowercase "a" is skipped as a lone token since it is almost always the article.
  const auto line = last_nonempty_line(completion);
  for (std::size_t i = line.size(); i-- > 0;) {
    const char c = line[i];
    if (!is_alpha(c) || !contains_label(valid_labels, c)) {
      continue;
    }
    const bool left_free = i == 0 || !is_alnum(line[i - 1]);
    const bool right_free = i + 1 == line.size() || !is_alnum(line[i + 1]);
    if (!left_free || !right_free) {
      continue;
    }
    const bool parenthesized = i > 0 && i + 1 < line.size() && line[i - 1] == '(' && line[i + 1] == ')';
    if (!parenthesized && c == 'a') {
      continue;
    }
    return {std::string(1, to_upper(c))};
  }
  return {};
}

ExtractedAnswer extract_yesno_answer(std::string_view completion) {
  const std::string lowered = to_lower_ascii(completion);
  const std::string_view view(lowered);

  const auto markers = marker_positions(view);
  for (auto it = markers.rbegin(); it != markers.rend(); ++it) {
    const std::size_t pos = skip_separators(view, *it);
    if (word_at(view, pos, "yes")) {
      return {"yes"};
    }
    if (word_at(view, pos, "no")) {
      return {"no"};
    }
  }

  const std::string line = to_lower_ascii(last_nonempty_line(completion));
  const std::string_view lv(line);
  for (std::size_t i = lv.size(); i-- > 0;) {
    if (i > 0 && is_alnum(lv[i - 1])) {
      continue;
    }
    if (word_at(lv, i, "yes")) {
      return {"yes"};
    }
    if (word_at(lv, i, "no")) {
      return {"no"};
    }
  }
  return {};
}

} // namespace causalrag
