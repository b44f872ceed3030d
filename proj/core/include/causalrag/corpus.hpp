#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "causalrag/text.hpp"

namespace causalrag {

enum class SourceKind { pubmed, statpearls, textbook, wikipedia, other };

std::string_view to_string(SourceKind kind) noexcept;
std::optional<SourceKind> parse_source_kind(std::string_view name) noexcept;

struct Document {
  std::string id;
  std::string title;
  std::string text; // normalized
  SourceKind source = SourceKind::other;
};

/// Half-open byte range [begin, end) into the parent's normalized text.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct Chunk {
  std::string chunk_id; // "<doc_id>#<ordinal>"
  std::string doc_id;
  std::string text;
  std::size_t ordinal = 0;
  CharSpan span;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct ChunkingOptions {
  std::size_t max_chunk_chars = 1200;
  std::size_t overlap_chars = 200;
};

std::string make_chunk_id(std::string_view doc_id, std::size_t ordinal);

/// Splits `doc.text` into overlapping windows. Lengths are measured in UTF-8
/// code points. A window's end is pulled back to the nearest whitespace inside
/// its last 20% when one exists; the next window starts exactly
/// `overlap_chars` code points before the previous end.
///
/// Throws ConfigError when max_chunk_chars == 0 or overlap_chars >= max_chunk_chars.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkingOptions& options);

/// Streams Documents out of a JSON Lines corpus file in file order.
///
/// Each non-blank line is an object with required string keys `id` and `text`
/// and optional `title` and `source`. Text is normalized on read; records whose
/// normalized text is empty are rejected, as are ids already seen by this reader.
class CorpusReader {
public:
  explicit CorpusReader(const std::filesystem::path& path);

  /// Next document, or nullopt at end of file. Throws ParseError (with line
  /// number) on malformed records and ValidationError on duplicate ids.
  std::optional<Document> next();

  std::size_t line() const noexcept { return line_; }

private:
  std::string source_name_;
  std::ifstream in_;
  std::size_t line_ = 0;
  std::unordered_set<std::string> seen_ids_;
};

std::vector<Document> load_corpus(const std::filesystem::path& path);

/// Loads several corpus files; ids must be unique across all of them.
std::vector<Document> load_corpora(const std::vector<std::filesystem::path>& paths);

/// Chunk files are JSON Lines with keys chunk_id, doc_id, ordinal, begin, end, text.
void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunks(const std::filesystem::path& path);

} // namespace causalrag
