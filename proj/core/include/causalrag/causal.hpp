#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace causalrag {

enum class CausalCategory { causal_operator, treatment_effect, mechanism };

inline constexpr std::size_t kCausalCategoryCount = 3;

std::string_view to_string(CausalCategory category) noexcept;
std::optional<CausalCategory> parse_causal_category(std::string_view name) noexcept;

/// Default per-category weights used by the built-in lexicon.
double default_category_weight(CausalCategory category) noexcept;

struct LexiconEntry {
  std::string pattern; // lowercase, single-spaced
  double weight = 1.0;
  CausalCategory category = CausalCategory::causal_operator;
};

class CausalLexicon {
public:
  /// Patterns are normalized (whitespace collapsed, ASCII-lowercased).
  /// Throws ValidationError on an empty pattern, a non-positive or non-finite
  /// weight, or a duplicate pattern.
  CausalLexicon(std::vector<LexiconEntry> entries, std::string version);

  const std::vector<LexiconEntry>& entries() const noexcept { return entries_; }
  const std::string& version() const noexcept { return version_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// The built-in clinical causal lexicon (version "causal_lex_v1").
  static const CausalLexicon& builtin();

private:
  std::vector<LexiconEntry> entries_;
  std::string version_;
};

/// Loads a JSON Lines lexicon (`{"pattern", "weight", "category"}` per line),
/// or returns the built-in lexicon when `path` is empty. A file lexicon's
/// version is "file-" followed by a hash of its normalized entries.
CausalLexicon load_lexicon(const std::optional<std::filesystem::path>& path);

struct MatchCounts {
  double mass = 0.0;
  std::array<std::size_t, kCausalCategoryCount> per_category{};

  std::size_t count(CausalCategory c) const noexcept {
    return per_category[static_cast<std::size_t>(c)];
  }
};

/// Weighted count of case-insensitive whole-word pattern occurrences.
/// Occurrences of one pattern never overlap each other; occurrences of
/// different patterns may.
MatchCounts count_matches(std::string_view text, const CausalLexicon& lexicon);

inline constexpr double kDefaultSaturation = 0.05;

/// min(1, (mass / max(1, word_count)) / saturation). Throws ConfigError when
/// saturation is not positive.
double causal_score(std::string_view text, const CausalLexicon& lexicon,
                    double saturation = kDefaultSaturation);

} // namespace causalrag
