#include "causalrag/causal.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "causalrag/error.hpp"
#include "causalrag/hashing.hpp"
#include "causalrag/text.hpp"

namespace causalrag {
namespace {

using json = nlohmann::json;

struct BuiltinPattern {
  std::string_view pattern;
  CausalCategory category;
};

// clang-format off
constexpr BuiltinPattern kBuiltinPatterns[] = {
    // causal operators
    {"cause", CausalCategory::causal_operator},
    {"causes", CausalCategory::causal_operator},
    {"caused by", CausalCategory::causal_operator},
    {"leads to", CausalCategory::causal_operator},
    {"led to", CausalCategory::causal_operator},
    {"results in", CausalCategory::causal_operator},
    {"resulting in", CausalCategory::causal_operator},
    {"mediates", CausalCategory::causal_operator},
    {"mediated by", CausalCategory::causal_operator},
    {"induces", CausalCategory::causal_operator},
    {"induced by", CausalCategory::causal_operator},
    {"triggers", CausalCategory::causal_operator},
    {"gives rise to", CausalCategory::causal_operator},
    {"contributes to", CausalCategory::causal_operator},
    {"precipitates", CausalCategory::causal_operator},
    {"because of", CausalCategory::causal_operator},
    // treatment-action-effect relations
    {"treated with", CausalCategory::treatment_effect},
    {"treatment of", CausalCategory::treatment_effect},
    {"responds to", CausalCategory::treatment_effect},
    {"response to", CausalCategory::treatment_effect},
    {"contraindicated in", CausalCategory::treatment_effect},
    {"reduces the risk of", CausalCategory::treatment_effect},
    {"indicated for", CausalCategory::treatment_effect},
    {"first-line", CausalCategory::treatment_effect},
    {"inhibits", CausalCategory::treatment_effect},
    {"prevents", CausalCategory::treatment_effect},
    {"alleviates", CausalCategory::treatment_effect},
    {"reverses", CausalCategory::treatment_effect},
    // mechanistic explanations
    {"pathophysiology", CausalCategory::mechanism},
    {"pathogenesis", CausalCategory::mechanism},
    {"mechanism of", CausalCategory::mechanism},
    {"due to", CausalCategory::mechanism},
    {"secondary to", CausalCategory::mechanism},
    {"etiology", CausalCategory::mechanism},
    {"deficiency of", CausalCategory::mechanism},
    {"accumulation of", CausalCategory::mechanism},
    {"dysfunction of", CausalCategory::mechanism},
    {"mutation in", CausalCategory::mechanism},
    {"impaired", CausalCategory::mechanism},
};
// clang-format on

std::string normalize_pattern(std::string_view raw) { return to_lower_ascii(normalize_text(raw)); }

// Non-overlapping whole-word occurrences of `pattern` in `lowered`.
std::size_t count_occurrences(std::string_view lowered, std::string_view pattern) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = lowered.find(pattern, pos)) != std::string_view::npos) {
    const std::size_t end = pos + pattern.size();
    const bool left_ok = pos == 0 || !is_word_char(lowered[pos - 1]);
    const bool right_ok = end == lowered.size() || !is_word_char(lowered[end]);
    if (left_ok && right_ok) {
      ++count;
      pos = end;
    } else {
      ++pos;
    }
  }
  return count;
}

} // namespace

std::string_view to_string(CausalCategory category) noexcept {
  switch (category) {
  case CausalCategory::causal_operator:
    return "causal_operator";
  case CausalCategory::treatment_effect:
    return "treatment_effect";
  case CausalCategory::mechanism:
    return "mechanism";
  }
  return "causal_operator";
}

std::optional<CausalCategory> parse_causal_category(std::string_view name) noexcept {
  for (auto c : {CausalCategory::causal_operator, CausalCategory::treatment_effect,
                 CausalCategory::mechanism}) {
    if (to_string(c) == name) {
      return c;
    }
  }
  return std::nullopt;
}

double default_category_weight(CausalCategory category) noexcept {
  switch (category) {
  case CausalCategory::causal_operator:
    return 1.0;
  case CausalCategory::treatment_effect:
    return 1.2;
  case CausalCategory::mechanism:
    return 0.8;
  }
  return 1.0;
}

CausalLexicon::CausalLexicon(std::vector<LexiconEntry> entries, std::string version)
    : entries_(std::move(entries)), version_(std::move(version)) {
  std::unordered_set<std::string> seen;
  for (auto& e : entries_) {
    e.pattern = normalize_pattern(e.pattern);
    if (e.pattern.empty()) {
      throw ValidationError("lexicon pattern must not be empty");
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError("lexicon weight for '" + e.pattern + "' must be positive");
    }
    if (!seen.insert(e.pattern).second) {
      throw ValidationError("duplicate lexicon pattern '" + e.pattern + "'");
    }
  }
}

const CausalLexicon& CausalLexicon::builtin() {
  static const CausalLexicon lexicon = [] {
    std::vector<LexiconEntry> entries;
    for (const auto& p : kBuiltinPatterns) {
      entries.push_back({std::string(p.pattern), default_category_weight(p.category), p.category});
    }
    return CausalLexicon(std::move(entries), "causal_lex_v1");
  }();
  return lexicon;
}

CausalLexicon load_lexicon(const std::optional<std::filesystem::path>& path) {
  if (!path || path->empty()) {
    return CausalLexicon::builtin();
  }
  std::ifstream in(*path);
  if (!in) {
    throw Error("cannot open lexicon file '" + path->string() + "'");
  }

  const std::string source = path->string();
  std::vector<LexiconEntry> entries;
  std::unordered_set<std::string> seen;
  std::uint64_t digest = kFnv1a64Offset;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (normalize_text(line).empty()) {
      continue;
    }
    LexiconEntry entry;
    try {
      const json record = json::parse(line);
      entry.pattern = normalize_pattern(record.at("pattern").get<std::string>());
      entry.weight = record.at("weight").get<double>();
      const auto category_name = record.at("category").get<std::string>();
      const auto category = parse_causal_category(category_name);
      if (!category) {
        throw ParseError(source, line_no, "unknown category '" + category_name + "'");
      }
      entry.category = *category;
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, std::string("bad lexicon record: ") + e.what());
    }
    if (entry.pattern.empty()) {
      throw ParseError(source, line_no, "empty pattern");
    }
    if (!(entry.weight > 0.0) || !std::isfinite(entry.weight)) {
      throw ParseError(source, line_no, "weight must be a positive number");
    }
    if (!seen.insert(entry.pattern).second) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate pattern '" +
                            entry.pattern + "'");
    }
    const json canonical = {{"p", entry.pattern}, {"w", entry.weight}, {"c", to_string(entry.category)}};
    digest = fnv1a64(canonical.dump() + "\n", digest);
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) {
    throw ParseError(source, line_no, "lexicon file has no entries");
  }
  return CausalLexicon(std::move(entries), "file-" + to_hex64(digest));
}

MatchCounts count_matches(std::string_view text, const CausalLexicon& lexicon) {
  const std::string lowered = to_lower_ascii(text);
  MatchCounts counts;
  for (const auto& entry : lexicon.entries()) {
    const std::size_t n = count_occurrences(lowered, entry.pattern);
    counts.mass += entry.weight * static_cast<double>(n);
    counts.per_category[static_cast<std::size_t>(entry.category)] += n;
  }
  return counts;
}

double causal_score(std::string_view text, const CausalLexicon& lexicon, double saturation) {
  if (!(saturation > 0.0)) {
    throw ConfigError("causal score saturation must be positive");
  }
  const double words = static_cast<double>(std::max<std::size_t>(1, word_count(text)));
  const double density = count_matches(text, lexicon).mass / words;
  return std::min(1.0, density / saturation);
}

} // namespace causalrag
