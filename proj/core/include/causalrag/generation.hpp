#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "causalrag/http.hpp"
#include "causalrag/prompt.hpp"

namespace causalrag {

enum class GenProviderKind { remote_chat, scripted_mock };

std::string_view to_string(GenProviderKind kind) noexcept;

struct GenProviderConfig {
  GenProviderKind kind = GenProviderKind::scripted_mock;
  std::string endpoint_url;    // remote only
  std::string model_name;      // remote only
  std::string api_key_env_var; // remote only
  std::size_t max_new_tokens = 256;
  double temperature = 0.0;
  std::filesystem::path script_path; // mock only
  std::chrono::milliseconds timeout{60000};
  std::size_t max_in_flight = 4;
  RetryPolicy retry;

  void validate() const;
  std::string descriptor() const;
};

/// Per-request metadata. The mock keys its responses on these; the remote
/// provider ignores them.
struct GenerationRequest {
  std::string item_id;
  std::string mode; // pipeline mode name, may be empty
};

struct Completion {
  std::string text;
  std::string provider_meta;
  std::string prompt_hash;
};

/// FNV-1a-64 of the rendered prompt bytes, as 16 hex digits.
std::string prompt_hash(std::string_view rendered);

class Generator {
public:
  virtual ~Generator() = default;

  /// Throws GenerationError carrying the item id on failure.
  virtual Completion generate(const PromptBundle& prompt, const GenerationRequest& request) = 0;

  virtual std::string descriptor() const = 0;
};

/// Mock script: JSON Lines of {"item_id", "response"} with an optional
/// `"item_id": "*"` default row. A row may also carry "mode"; such rows only
/// answer requests for that mode and take precedence over mode-less rows.
class ScriptedMockGenerator final : public Generator {
public:
  explicit ScriptedMockGenerator(const std::filesystem::path& script_path);
  ScriptedMockGenerator(std::map<std::pair<std::string, std::string>, std::string> responses,
                        std::string source_name);

  Completion generate(const PromptBundle& prompt, const GenerationRequest& request) override;
  std::string descriptor() const override;

private:
  // key: (mode or "", item_id or "*")
  std::map<std::pair<std::string, std::string>, std::string> responses_;
  std::string source_name_;
};

/// Chat-completions client: one request per prompt with the system and user
/// parts as two messages, retried per the config's RetryPolicy.
class RemoteChatGenerator final : public Generator {
public:
  RemoteChatGenerator(GenProviderConfig config, std::shared_ptr<HttpClient> http);

  Completion generate(const PromptBundle& prompt, const GenerationRequest& request) override;
  std::string descriptor() const override;

  /// Request body for `prompt` under this configuration.
  std::string request_body(const PromptBundle& prompt) const;

private:
  GenProviderConfig config_;
  std::shared_ptr<HttpClient> http_;
  std::optional<std::string> api_key_;
};

std::unique_ptr<Generator> make_generator(const GenProviderConfig& config,
                                          std::shared_ptr<HttpClient> http = nullptr);

Completion generate(Generator& generator, const PromptBundle& prompt,
                    const GenerationRequest& request);

/// Outcome of answer extraction. An empty value means the completion could not
/// be parsed; it is scored as incorrect.
struct ExtractedAnswer {
  std::optional<std::string> value;

  bool parsed() const noexcept { return value.has_value(); }
  std::string display() const { return value.value_or("<unparseable>"); }

  friend bool operator==(const ExtractedAnswer&, const ExtractedAnswer&) = default;
};

/// Last "final answer" marker followed by optional punctuation/whitespace and
/// a single letter; falls back to the last "(x)" or standalone letter on the
/// final non-empty line. Returned letters are uppercase. Never throws.
ExtractedAnswer extract_mcq_answer(std::string_view completion, std::span<const char> valid_labels);

/// Same strategy for "yes" / "no" (lowercase result).
ExtractedAnswer extract_yesno_answer(std::string_view completion);

} // namespace causalrag
