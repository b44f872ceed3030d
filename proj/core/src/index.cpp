#include "causalrag/index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include "causalrag/error.hpp"

namespace causalrag {
namespace {

class ByteWriter {
public:
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { out_.append(s); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }
  std::string take() { return std::move(out_); }

private:
  template <typename T>
  void put_le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
  }

  std::string out_;
};

class ByteReader {
public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return std::string(raw(u32())); }
  bool done() const noexcept { return pos_ == in_.size(); }

private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw FormatError("index file is truncated");
    }
  }

  template <typename T>
  T get_le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

// Descending composite, then ascending chunk id.
bool ranks_before(const ScoredDocument& a, const ScoredDocument& b) {
  if (a.composite != b.composite) {
    return a.composite > b.composite;
  }
  return a.chunk_id < b.chunk_id;
}

} // namespace

void RetrievalWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw ConfigError("retrieval weights alpha and beta must be finite and non-negative");
  }
  if (!(alpha + beta > 0.0)) {
    throw ConfigError("retrieval weights need alpha + beta > 0");
  }
  if (k < 1) {
    throw ConfigError("retrieval k must be at least 1");
  }
}

const std::vector<std::string>& default_query_modifiers() {
  static const std::vector<std::string> modifiers{"pathophysiology", "mechanism",
                                                  "differential diagnosis"};
  return modifiers;
}

std::string enhance_query(std::string_view query, std::span<const std::string> modifiers) {
  std::string out(query);
  for (const auto& m : modifiers) {
    out += ' ';
    out += m;
  }
  return out;
}

Index::Index(IndexHeader header, std::vector<IndexEntry> entries)
    : header_(std::move(header)), entries_(std::move(entries)) {
  header_.entry_count = entries_.size();
  std::unordered_set<std::string_view> ids;
  for (const auto& e : entries_) {
    if (!ids.insert(e.chunk_id).second) {
      throw FormatError("duplicate chunk id '" + e.chunk_id + "' in index");
    }
    if (e.vector.dim() != header_.dim) {
      throw FormatError("entry '" + e.chunk_id + "' has dimension " +
                        std::to_string(e.vector.dim()) + ", index expects " +
                        std::to_string(header_.dim));
    }
  }
}

std::vector<ScoredDocument> Index::search(const EmbeddingVector& query,
                                          const RetrievalWeights& weights) const {
  weights.validate();
  if (query.dim() != header_.dim) {
    throw ConfigError("query dimension " + std::to_string(query.dim()) +
                      " does not match index dimension " + std::to_string(header_.dim));
  }

  struct Candidate {
    const IndexEntry* entry;
    ScoredDocument doc;
  };
  std::vector<Candidate> scored;
  scored.reserve(entries_.size());
  for (const auto& e : entries_) {
    const double sim = std::clamp(dot(query.values, e.vector.values), -1.0, 1.0);
    scored.push_back({&e, {e.chunk_id, sim, e.psi, composite_score(sim, e.psi, weights), {}}});
  }

  const std::size_t k = std::min(weights.k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    [](const Candidate& a, const Candidate& b) { return ranks_before(a.doc, b.doc); });

  std::vector<ScoredDocument> top;
  top.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    scored[i].doc.text = scored[i].entry->text;
    top.push_back(std::move(scored[i].doc));
  }
  return top;
}

std::string Index::serialize() const {
  ByteWriter w;
  w.raw(kIndexMagic);
  w.u32(kIndexFormatVersion);
  w.u32(header_.dim);
  w.u64(entries_.size());
  w.str(header_.lexicon_version);
  w.str(header_.provider_descriptor);
  for (const auto& e : entries_) {
    w.str(e.chunk_id);
    w.f64(e.psi);
    for (float x : e.vector.values) {
      w.f32(x);
    }
    w.str(e.text);
  }
  return w.take();
}

Index Index::deserialize(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.raw(kIndexMagic.size()) != kIndexMagic) {
    throw FormatError("not an index file (bad magic)");
  }
  IndexHeader header;
  header.format_version = r.u32();
  if (header.format_version != kIndexFormatVersion) {
    throw FormatError("unsupported index format version " + std::to_string(header.format_version) +
                      " (expected " + std::to_string(kIndexFormatVersion) + ")");
  }
  header.dim = r.u32();
  header.entry_count = r.u64();
  header.lexicon_version = r.str();
  header.provider_descriptor = r.str();
  if (header.dim == 0) {
    throw FormatError("index dimension is zero");
  }

  std::vector<IndexEntry> entries;
  for (std::uint64_t i = 0; i < header.entry_count; ++i) {
    IndexEntry e;
    e.chunk_id = r.str();
    e.psi = r.f64();
    e.vector.values.resize(header.dim);
    for (auto& x : e.vector.values) {
      x = r.f32();
    }
    e.vector.normalized = true;
    e.text = r.str();
    entries.push_back(std::move(e));
  }
  if (!r.done()) {
    throw FormatError("trailing bytes after the last index entry");
  }
  return Index(std::move(header), std::move(entries));
}

void Index::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write index file '" + path.string() + "'");
  }
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error("write failed for index file '" + path.string() + "'");
  }
}

Index Index::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open index file '" + path.string() + "'");
  }
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize(bytes);
}

Index build_index(std::span<const Chunk> chunks, EmbeddingProvider& provider,
                  const CausalLexicon& lexicon, double saturation) {
  if (chunks.empty()) {
    throw ConfigError("cannot build an index from zero chunks");
  }
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) {
    texts.push_back(c.text);
  }
  auto vectors = provider.embed(texts);
  if (vectors.size() != chunks.size()) {
    throw ProviderError("embedding provider returned " + std::to_string(vectors.size()) +
                        " vectors for " + std::to_string(chunks.size()) + " chunks");
  }

  IndexHeader header;
  header.format_version = kIndexFormatVersion;
  header.dim = static_cast<std::uint32_t>(provider.dim());
  header.lexicon_version = lexicon.version();
  header.provider_descriptor = provider.descriptor();

  std::vector<IndexEntry> entries;
  entries.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (vectors[i].dim() != header.dim) {
      throw ProviderError("inconsistent embedding dimension for chunk '" + chunks[i].chunk_id + "'");
    }
    entries.push_back({chunks[i].chunk_id, std::move(vectors[i]),
                       causal_score(chunks[i].text, lexicon, saturation), chunks[i].text});
  }
  return Index(std::move(header), std::move(entries));
}

Index build_index(std::span<const Chunk> chunks, const EmbeddingProviderConfig& provider,
                  const CausalLexicon& lexicon, double saturation) {
  auto p = make_embedding_provider(provider);
  return build_index(chunks, *p, lexicon, saturation);
}

void check_compatible(const Index& index, const EmbeddingProvider& provider,
                      const CausalLexicon& lexicon) {
  if (provider.dim() != index.dim() ||
      provider.descriptor() != index.header().provider_descriptor) {
    throw ConfigError("embedding provider '" + provider.descriptor() +
                      "' does not match the index provider '" +
                      index.header().provider_descriptor + "'");
  }
  if (lexicon.version() != index.header().lexicon_version) {
    throw ConfigError("lexicon '" + lexicon.version() + "' does not match the index lexicon '" +
                      index.header().lexicon_version + "'");
  }
}

std::vector<ScoredDocument> retrieve(const Index& index, std::string_view query,
                                     const RetrievalWeights& weights, EmbeddingProvider& provider,
                                     const CausalLexicon& lexicon,
                                     std::span<const std::string> modifiers) {
  weights.validate();
  check_compatible(index, provider, lexicon);
  if (index.size() == 0) {
    throw ConfigError("cannot retrieve from an empty index");
  }
  const std::string enhanced = enhance_query(query, modifiers);
  const std::vector<std::string> input{enhanced};
  auto vectors = provider.embed(input);
  if (vectors.size() != 1) {
    throw ProviderError("embedding provider returned no vector for the query");
  }
  return index.search(vectors.front(), weights);
}

} // namespace causalrag
