#include "causalrag/embedding.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "causalrag/error.hpp"
#include "causalrag/hashing.hpp"
#include "causalrag/parallel.hpp"
#include "causalrag/text.hpp"

namespace causalrag {
namespace {

using json = nlohmann::json;

EmbeddingVector unit_e0(std::size_t dim) {
  EmbeddingVector v;
  v.values.assign(dim, 0.0F);
  v.values[0] = 1.0F;
  v.normalized = true;
  return v;
}

class LocalHashProvider final : public EmbeddingProvider {
public:
  explicit LocalHashProvider(EmbeddingProviderConfig config) : config_(std::move(config)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      out.push_back(hash_embed(t, config_.dim));
    }
    return out;
  }

  std::size_t dim() const noexcept override { return config_.dim; }
  std::string descriptor() const override { return config_.descriptor(); }

private:
  EmbeddingProviderConfig config_;
};

class RemoteHttpProvider final : public EmbeddingProvider {
public:
  RemoteHttpProvider(EmbeddingProviderConfig config, std::shared_ptr<HttpClient> http)
      : config_(std::move(config)), http_(std::move(http)),
        api_key_(resolve_api_key(config_.api_key_env_var)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    const std::size_t batch = std::max<std::size_t>(1, config_.batch_size);
    const std::size_t batches = (texts.size() + batch - 1) / batch;
    std::vector<EmbeddingVector> out(texts.size());
    parallel_for_bounded(batches, config_.max_in_flight, [&](std::size_t b) {
      const std::size_t first = b * batch;
      const std::size_t count = std::min(batch, texts.size() - first);
      auto vectors = embed_batch(texts.subspan(first, count));
      std::move(vectors.begin(), vectors.end(), out.begin() + static_cast<std::ptrdiff_t>(first));
    });
    return out;
  }

  std::size_t dim() const noexcept override { return config_.dim; }
  std::string descriptor() const override { return config_.descriptor(); }

private:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) {
    const json body = {{"model", config_.model_name},
                       {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    HttpHeaders headers{{"Content-Type", "application/json"}};
    if (api_key_) {
      headers.emplace_back("Authorization", "Bearer " + *api_key_);
    }
    const HttpResponse response = post_with_retries(*http_, config_.endpoint_url, body.dump(),
                                                    headers, config_.timeout, config_.retry);
    return parse_response(response.body, texts.size());
  }

  std::vector<EmbeddingVector> parse_response(const std::string& body, std::size_t expected) const {
    json parsed;
    try {
      parsed = json::parse(body);
    } catch (const json::parse_error& e) {
      throw ProviderError(std::string("embedding response is not JSON: ") + e.what());
    }
    const auto data = parsed.find("data");
    if (data == parsed.end() || !data->is_array()) {
      throw ProviderError("embedding response has no 'data' array");
    }
    if (data->size() != expected) {
      throw ProviderError("count mismatch: requested " + std::to_string(expected) +
                          " embeddings, received " + std::to_string(data->size()));
    }

    std::vector<EmbeddingVector> out(expected);
    std::vector<bool> filled(expected, false);
    for (std::size_t i = 0; i < data->size(); ++i) {
      const json& item = (*data)[i];
      std::size_t index = i;
      std::vector<double> values;
      try {
        if (item.contains("index")) {
          index = item.at("index").get<std::size_t>();
        }
        values = item.at("embedding").get<std::vector<double>>();
      } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed embedding item: ") + e.what());
      }
      if (index >= expected || filled[index]) {
        throw ProviderError("embedding response has invalid or repeated index " +
                            std::to_string(index));
      }
      if (values.size() != config_.dim) {
        throw ProviderError("dimension mismatch: expected " + std::to_string(config_.dim) +
                            ", received " + std::to_string(values.size()));
      }
      EmbeddingVector v;
      v.values.reserve(values.size());
      for (double x : values) {
        if (!std::isfinite(x)) {
          throw ProviderError("embedding contains a non-finite component");
        }
        v.values.push_back(static_cast<float>(x));
      }
      l2_normalize(v);
      out[index] = std::move(v);
      filled[index] = true;
    }
    return out;
  }

  EmbeddingProviderConfig config_;
  std::shared_ptr<HttpClient> http_;
  std::optional<std::string> api_key_;
};

} // namespace

double l2_norm(const EmbeddingVector& v) noexcept {
  double sum = 0.0;
  for (float x : v.values) {
    sum += static_cast<double>(x) * static_cast<double>(x);
  }
  return std::sqrt(sum);
}

void l2_normalize(EmbeddingVector& v) {
  const double norm = l2_norm(v);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ProviderError("cannot normalize a zero or non-finite vector");
  }
  for (float& x : v.values) {
    x = static_cast<float>(static_cast<double>(x) / norm);
  }
  v.normalized = true;
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double sum = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw ConfigError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()));
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw ConfigError("cosine similarity of a zero-norm vector is undefined");
  }
  return std::clamp(dot(a.values, b.values) / (na * nb), -1.0, 1.0);
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim) {
  if (dim < kMinHashEmbedDim) {
    throw ConfigError("hash_embed needs dim >= " + std::to_string(kMinHashEmbedDim));
  }
  if (std::all_of(text.begin(), text.end(), is_space)) {
    return unit_e0(dim);
  }

  const std::string lowered = to_lower_ascii(text);
  std::vector<double> acc(dim, 0.0);
  auto add_gram = [&](std::string_view gram) {
    const std::uint64_t h = fnv1a64(gram);
    const double sign = (h >> 63) == 0 ? 1.0 : -1.0;
    acc[h % dim] += sign;
  };
  if (lowered.size() < 3) {
    add_gram(lowered);
  } else {
    const std::string_view view(lowered);
    for (std::size_t i = 0; i + 3 <= view.size(); ++i) {
      add_gram(view.substr(i, 3));
    }
  }

  double norm = 0.0;
  for (double x : acc) {
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    return unit_e0(dim);
  }
  EmbeddingVector v;
  v.values.reserve(dim);
  for (double x : acc) {
    v.values.push_back(static_cast<float>(x / norm));
  }
  v.normalized = true;
  return v;
}

std::string_view to_string(EmbeddingProviderKind kind) noexcept {
  return kind == EmbeddingProviderKind::remote_http ? "remote_http" : "local_hash";
}

void EmbeddingProviderConfig::validate() const {
  if (dim == 0) {
    throw ConfigError("embedding dim must be positive");
  }
  if (timeout.count() <= 0) {
    throw ConfigError("embedding timeout must be positive");
  }
  if (kind == EmbeddingProviderKind::local_hash && dim < kMinHashEmbedDim) {
    throw ConfigError("local_hash embedding needs dim >= " + std::to_string(kMinHashEmbedDim));
  }
  if (kind == EmbeddingProviderKind::remote_http && endpoint_url.empty()) {
    throw ConfigError("remote_http embedding provider needs an endpoint URL");
  }
}

std::string EmbeddingProviderConfig::descriptor() const {
  if (kind == EmbeddingProviderKind::local_hash) {
    return "local_hash:fnv1a64-3gram:dim=" + std::to_string(dim);
  }
  return "remote_http:" + model_name + ":dim=" + std::to_string(dim);
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingProviderConfig& config,
                                                           std::shared_ptr<HttpClient> http) {
  config.validate();
  if (config.kind == EmbeddingProviderKind::local_hash) {
    return std::make_unique<LocalHashProvider>(config);
  }
  if (!http) {
    http = make_default_http_client();
  }
  return std::make_unique<RemoteHttpProvider>(config, std::move(http));
}

std::vector<EmbeddingVector> embed_texts(const EmbeddingProviderConfig& config,
                                         std::span<const std::string> texts,
                                         std::shared_ptr<HttpClient> http) {
  if (texts.empty()) {
    throw ConfigError("embed_texts needs at least one text");
  }
  for (const auto& t : texts) {
    if (t.empty()) {
      throw ConfigError("embed_texts does not accept empty texts");
    }
  }
  return make_embedding_provider(config, std::move(http))->embed(texts);
}

} // namespace causalrag
