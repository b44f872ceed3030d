#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalrag/http.hpp"

namespace causalrag {

struct EmbeddingVector {
  std::vector<float> values;
  bool normalized = false;

  std::size_t dim() const noexcept { return values.size(); }
};

/// Euclidean norm accumulated in double precision.
double l2_norm(const EmbeddingVector& v) noexcept;

/// Scales `v` to unit norm and sets the flag. Throws ProviderError on a zero
/// or non-finite vector.
void l2_normalize(EmbeddingVector& v);

/// dot(a,b) / (|a| |b|), clamped to [-1, 1].
/// Throws ConfigError on dimension mismatch or a zero-norm input.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Plain dot product, sequential double accumulation. Dimensions must match.
double dot(std::span<const float> a, std::span<const float> b) noexcept;

inline constexpr std::size_t kMinHashEmbedDim = 8;

/// Deterministic signed character-trigram embedding.
///
/// The text is ASCII-lowercased and every byte trigram is hashed with 64-bit
/// FNV-1a. The trigram adds +1 to bucket `h % dim` when bit 63 of `h` is clear
/// and -1 when it is set; the result is L2-normalized. Text shorter than three
/// bytes is hashed as a single gram. Empty or all-whitespace text, and the
/// degenerate case where all buckets cancel, map to e_0.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim);

enum class EmbeddingProviderKind { remote_http, local_hash };

std::string_view to_string(EmbeddingProviderKind kind) noexcept;

struct EmbeddingProviderConfig {
  EmbeddingProviderKind kind = EmbeddingProviderKind::local_hash;
  std::string endpoint_url;    // remote only
  std::string model_name;      // remote only
  std::string api_key_env_var; // remote only; empty means no Authorization header
  std::size_t dim = 256;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_in_flight = 4;
  std::size_t batch_size = 64;
  RetryPolicy retry;

  /// Throws ConfigError if dim is 0 (or below 8 for local_hash), timeout is
  /// not positive, or a remote config lacks an endpoint.
  void validate() const;

  /// Stable identifier written into index headers, e.g. "local_hash:fnv1a64-3gram:dim=256".
  std::string descriptor() const;
};

class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;

  /// One unit-norm vector of dimension `dim()` per input, in input order.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;

  virtual std::size_t dim() const noexcept = 0;
  virtual std::string descriptor() const = 0;
};

/// `http` is only used by remote providers; nullptr selects the default client.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingProviderConfig& config,
                                                           std::shared_ptr<HttpClient> http = nullptr);

/// Validates inputs (non-empty list, non-empty texts) and embeds them with a
/// provider built from `config`.
std::vector<EmbeddingVector> embed_texts(const EmbeddingProviderConfig& config,
                                         std::span<const std::string> texts,
                                         std::shared_ptr<HttpClient> http = nullptr);

} // namespace causalrag
