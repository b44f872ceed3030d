#include "causalrag/corpus.hpp"

#include <nlohmann/json.hpp>

#include <array>

#include "causalrag/error.hpp"

namespace causalrag {
namespace {

using json = nlohmann::json;

constexpr std::array<std::pair<SourceKind, std::string_view>, 5> kSourceNames{{
    {SourceKind::pubmed, "pubmed"},
    {SourceKind::statpearls, "statpearls"},
    {SourceKind::textbook, "textbook"},
    {SourceKind::wikipedia, "wikipedia"},
    {SourceKind::other, "other"},
}};

bool is_blank(std::string_view line) {
  for (char c : line) {
    if (!is_space(c)) {
      return false;
    }
  }
  return true;
}

json parse_object_line(const std::string& source, std::size_t line_no, const std::string& line) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object()) {
    throw ParseError(source, line_no, "record is not a JSON object");
  }
  return record;
}

std::string required_string(const json& record, const char* key, const std::string& source,
                            std::size_t line_no) {
  const auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(source, line_no, std::string("missing required key '") + key + "'");
  }
  if (!it->is_string()) {
    throw ParseError(source, line_no, std::string("key '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

// Byte offsets of every code point start, plus text.size() as a sentinel.
std::vector<std::size_t> code_point_offsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
      offsets.push_back(i);
    }
  }
  offsets.push_back(text.size());
  return offsets;
}

} // namespace

std::string_view to_string(SourceKind kind) noexcept {
  for (const auto& [k, name] : kSourceNames) {
    if (k == kind) {
      return name;
    }
  }
  return "other";
}

std::optional<SourceKind> parse_source_kind(std::string_view name) noexcept {
  for (const auto& [k, n] : kSourceNames) {
    if (n == name) {
      return k;
    }
  }
  return std::nullopt;
}

std::string make_chunk_id(std::string_view doc_id, std::size_t ordinal) {
  std::string id(doc_id);
  id += '#';
  id += std::to_string(ordinal);
  return id;
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingOptions& options) {
  if (options.max_chunk_chars == 0) {
    throw ConfigError("max_chunk_chars must be positive");
  }
  if (options.overlap_chars >= options.max_chunk_chars) {
    throw ConfigError("overlap_chars (" + std::to_string(options.overlap_chars) +
                      ") must be smaller than max_chunk_chars (" +
                      std::to_string(options.max_chunk_chars) + ")");
  }

  std::vector<Chunk> chunks;
  const std::string& text = doc.text;
  if (text.empty()) {
    return chunks;
  }

  const auto offsets = code_point_offsets(text);
  const std::size_t length = offsets.size() - 1; // in code points
  const std::size_t max = options.max_chunk_chars;
  const std::size_t overlap = options.overlap_chars;
  const std::size_t snap_window = max / 5;

  std::size_t start = 0;
  for (;;) {
    std::size_t end = std::min(start + max, length);
    if (end < length && !is_space(text[offsets[end]])) {
      // Pull the boundary back onto whitespace within the last 20% of the window.
      const std::size_t floor = end - snap_window;
      for (std::size_t pos = end; pos > floor; --pos) {
        const std::size_t candidate = pos - 1;
        if (is_space(text[offsets[candidate]])) {
          if (candidate > start + overlap) {
            end = candidate;
          }
          break;
        }
      }
    }

    Chunk chunk;
    chunk.doc_id = doc.id;
    chunk.ordinal = chunks.size();
    chunk.chunk_id = make_chunk_id(doc.id, chunk.ordinal);
    chunk.span = {offsets[start], offsets[end]};
    chunk.text = text.substr(chunk.span.begin, chunk.span.end - chunk.span.begin);
    chunks.push_back(std::move(chunk));

    if (end == length) {
      break;
    }
    start = end - overlap;
  }
  return chunks;
}

CorpusReader::CorpusReader(const std::filesystem::path& path)
    : source_name_(path.string()), in_(path) {
  if (!in_) {
    throw Error("cannot open corpus file '" + source_name_ + "'");
  }
}

std::optional<Document> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (is_blank(line)) {
      continue;
    }
    const json record = parse_object_line(source_name_, line_, line);

    Document doc;
    doc.id = required_string(record, "id", source_name_, line_);
    if (doc.id.empty()) {
      throw ParseError(source_name_, line_, "empty 'id'");
    }
    doc.text = normalize_text(required_string(record, "text", source_name_, line_));
    if (doc.text.empty()) {
      throw ParseError(source_name_, line_, "document '" + doc.id + "' has empty text");
    }
    if (record.contains("title")) {
      doc.title = normalize_text(required_string(record, "title", source_name_, line_));
    }
    if (record.contains("source")) {
      const auto name = required_string(record, "source", source_name_, line_);
      const auto kind = parse_source_kind(name);
      if (!kind) {
        throw ParseError(source_name_, line_, "unknown source '" + name + "'");
      }
      doc.source = *kind;
    }
    if (!seen_ids_.insert(doc.id).second) {
      throw ValidationError(source_name_ + ":" + std::to_string(line_) + ": duplicate document id '" +
                            doc.id + "'");
    }
    return doc;
  }
  if (in_.bad()) {
    throw Error("read error in corpus file '" + source_name_ + "'");
  }
  return std::nullopt;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  return load_corpora({path});
}

std::vector<Document> load_corpora(const std::vector<std::filesystem::path>& paths) {
  std::vector<Document> docs;
  std::unordered_set<std::string> ids;
  for (const auto& path : paths) {
    CorpusReader reader(path);
    while (auto doc = reader.next()) {
      if (!ids.insert(doc->id).second) {
        throw ValidationError(path.string() + ":" + std::to_string(reader.line()) +
                              ": duplicate document id '" + doc->id + "'");
      }
      docs.push_back(std::move(*doc));
    }
  }
  return docs;
}

void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot write chunk file '" + path.string() + "'");
  }
  for (const auto& c : chunks) {
    const json record = {
        {"chunk_id", c.chunk_id}, {"doc_id", c.doc_id},     {"ordinal", c.ordinal},
        {"begin", c.span.begin},  {"end", c.span.end},      {"text", c.text},
    };
    out << record.dump() << '\n';
  }
  if (!out) {
    throw Error("write failed for chunk file '" + path.string() + "'");
  }
}

std::vector<Chunk> read_chunks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open chunk file '" + path.string() + "'");
  }
  const std::string source = path.string();
  std::vector<Chunk> chunks;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) {
      continue;
    }
    const json record = parse_object_line(source, line_no, line);
    Chunk c;
    try {
      c.chunk_id = record.at("chunk_id").get<std::string>();
      c.doc_id = record.at("doc_id").get<std::string>();
      c.ordinal = record.at("ordinal").get<std::size_t>();
      c.span.begin = record.at("begin").get<std::size_t>();
      c.span.end = record.at("end").get<std::size_t>();
      c.text = record.at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, std::string("bad chunk record: ") + e.what());
    }
    if (c.chunk_id.empty() || c.text.empty()) {
      throw ParseError(source, line_no, "chunk record needs a non-empty chunk_id and text");
    }
    if (!ids.insert(c.chunk_id).second) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate chunk id '" +
                            c.chunk_id + "'");
    }
    chunks.push_back(std::move(c));
  }
  return chunks;
}

} // namespace causalrag
