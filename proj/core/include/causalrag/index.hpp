#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalrag/causal.hpp"
#include "causalrag/corpus.hpp"
#include "causalrag/embedding.hpp"

namespace causalrag {

struct RetrievalWeights {
  double alpha = 0.7; // semantic similarity
  double beta = 0.3;  // causal relevance
  std::size_t k = 5;

  /// Throws ConfigError unless alpha, beta >= 0, alpha + beta > 0 and k >= 1.
  void validate() const;
};

/// alpha * sim + beta * psi.
constexpr double composite_score(double sim, double psi, const RetrievalWeights& w) noexcept {
  return w.alpha * sim + w.beta * psi;
}

struct IndexEntry {
  std::string chunk_id;
  EmbeddingVector vector; // unit norm
  double psi = 0.0;
  std::string text;
};

struct ScoredDocument {
  std::string chunk_id;
  double sim = 0.0;
  double psi = 0.0;
  double composite = 0.0;
  std::string text;

  friend bool operator==(const ScoredDocument&, const ScoredDocument&) = default;
};

struct IndexHeader {
  std::uint32_t format_version = 0;
  std::uint32_t dim = 0;
  std::uint64_t entry_count = 0;
  std::string lexicon_version;
  std::string provider_descriptor;

  friend bool operator==(const IndexHeader&, const IndexHeader&) = default;
};

inline constexpr std::string_view kIndexMagic = "CRAGIDX\n";
inline constexpr std::uint32_t kIndexFormatVersion = 1;

const std::vector<std::string>& default_query_modifiers();

/// Appends each modifier once, space-separated, in order.
std::string enhance_query(std::string_view query, std::span<const std::string> modifiers);

/// Exact full-scan index over pre-embedded, pre-scored chunks. Immutable after
/// construction; concurrent searches are safe.
class Index {
public:
  Index(IndexHeader header, std::vector<IndexEntry> entries);

  const IndexHeader& header() const noexcept { return header_; }
  const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t dim() const noexcept { return header_.dim; }

  /// Scores every entry against a unit-norm query vector and returns the top
  /// min(k, size) by composite score, descending, ties by ascending chunk_id.
  std::vector<ScoredDocument> search(const EmbeddingVector& query,
                                     const RetrievalWeights& weights) const;

  /// Little-endian binary format: magic, version, dim, count, lexicon version,
  /// provider descriptor, then per entry the length-prefixed chunk id, psi as
  /// f64, dim f32 vector components and the length-prefixed chunk text.
  void save(const std::filesystem::path& path) const;
  static Index load(const std::filesystem::path& path);

  std::string serialize() const;
  static Index deserialize(std::string_view bytes);

private:
  IndexHeader header_;
  std::vector<IndexEntry> entries_;
};

/// Embeds all chunks in batches and precomputes psi per chunk.
Index build_index(std::span<const Chunk> chunks, EmbeddingProvider& provider,
                  const CausalLexicon& lexicon, double saturation = kDefaultSaturation);

Index build_index(std::span<const Chunk> chunks, const EmbeddingProviderConfig& provider,
                  const CausalLexicon& lexicon, double saturation = kDefaultSaturation);

/// Throws ConfigError when the provider or lexicon differs from the ones the
/// index was built with (dimension, descriptor, lexicon version).
void check_compatible(const Index& index, const EmbeddingProvider& provider,
                      const CausalLexicon& lexicon);

/// Enhances the query with `modifiers`, embeds it and searches. Compatibility
/// is checked first; provider failures propagate as ProviderError.
std::vector<ScoredDocument> retrieve(const Index& index, std::string_view query,
                                     const RetrievalWeights& weights, EmbeddingProvider& provider,
                                     const CausalLexicon& lexicon,
                                     std::span<const std::string> modifiers);

} // namespace causalrag
