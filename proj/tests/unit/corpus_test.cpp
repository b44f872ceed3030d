#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "causalrag/corpus.hpp"
#include "causalrag/error.hpp"
#include "causalrag/text.hpp"
#include "generators.hpp"

namespace causalrag {
namespace {

namespace fs = std::filesystem;

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / ("causalrag_corpus_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

Document doc_with(std::string text) {
  return Document{"d", "", std::move(text), SourceKind::other};
}

TEST(ChunkDocument, HandTracedWindowsWithoutWhitespace) {
  const auto chunks = chunk_document(doc_with(std::string(250, 'x')), {100, 20});
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].span, (CharSpan{0, 100}));
  EXPECT_EQ(chunks[1].span, (CharSpan{80, 180}));
  EXPECT_EQ(chunks[2].span, (CharSpan{160, 250}));
  EXPECT_EQ(chunks[1].chunk_id, "d#1");
  EXPECT_EQ(chunks[2].ordinal, 2u);
}

TEST(ChunkDocument, SnapsEndBackToWhitespace) {
  const auto chunks = chunk_document(doc_with("aaaaaaaa bbbbbbbbbb"), {10, 2});
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].text, "aaaaaaaa");
  EXPECT_EQ(chunks[1].span, (CharSpan{6, 16}));
  EXPECT_EQ(chunks[1].text, "aa bbbbbbb");
  EXPECT_EQ(chunks[2].span, (CharSpan{14, 19}));
}

TEST(ChunkDocument, ShortDocumentIsOneChunk) {
  const auto chunks = chunk_document(doc_with("short text"), {});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].text, "short text");
  EXPECT_EQ(chunks[0].chunk_id, "d#0");
  EXPECT_TRUE(chunk_document(doc_with(""), {}).empty());
}

TEST(ChunkDocument, CountsCodePointsNotBytes) {
  std::string text;
  for (int i = 0; i < 30; ++i) {
    text += "é";
  }
  const auto chunks = chunk_document(doc_with(text), {20, 5});
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(utf8_length(chunks[0].text), 20u);
  EXPECT_EQ(chunks[0].span, (CharSpan{0, 40}));
  EXPECT_EQ(chunks[1].span, (CharSpan{30, 60}));
}

TEST(ChunkDocument, RejectsBadOptions) {
  EXPECT_THROW(chunk_document(doc_with("x"), {0, 0}), ConfigError);
  EXPECT_THROW(chunk_document(doc_with("x"), {10, 10}), ConfigError);
}

TEST(ChunkDocument, WindowPropertiesOnRandomText) {
  testing::Rng rng(7);
  const auto& lexicon = CausalLexicon::builtin();
  for (int trial = 0; trial < 200; ++trial) {
    const std::string text = normalize_text(testing::random_text(rng, lexicon, 1, 40));
    const std::size_t max = testing::uniform(rng, 10, 200);
    const std::size_t overlap = testing::uniform(rng, 0, max - 1);
    const auto chunks = chunk_document(doc_with(text), {max, overlap});
    ASSERT_FALSE(chunks.empty());
    EXPECT_EQ(chunks.front().span.begin, 0u);
    EXPECT_EQ(chunks.back().span.end, text.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto& c = chunks[i];
      EXPECT_EQ(c.text, text.substr(c.span.begin, c.span.end - c.span.begin));
      EXPECT_LE(utf8_length(c.text), max);
      EXPECT_GT(c.span.end, c.span.begin);
      if (i > 0) {
        const auto& prev = chunks[i - 1];
        EXPECT_GT(c.span.begin, prev.span.begin);
        EXPECT_EQ(prev.span.end - c.span.begin, overlap); // ASCII text: bytes == code points
      }
    }
  }
}

TEST(CorpusReader, ReadsAndNormalizes) {
  const auto path = write_temp(
      "ok.jsonl",
      "{\"id\":\"a\",\"text\":\"  Fever\\n causes  chills \",\"title\":\"T\",\"source\":\"pubmed\"}\n"
      "\n"
      "{\"id\":\"b\",\"text\":\"Second\"}\n");
  const auto docs = load_corpus(path);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].text, "Fever causes chills");
  EXPECT_EQ(docs[0].source, SourceKind::pubmed);
  EXPECT_EQ(docs[1].source, SourceKind::other);
}

TEST(CorpusReader, ReportsLineOfMalformedRecord) {
  const auto path = write_temp("bad.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n\n{\"id\":\"b\"}\n");
  try {
    load_corpus(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  const auto json_error = write_temp("bad2.jsonl", "{not json\n");
  EXPECT_THROW(load_corpus(json_error), ParseError);
}

TEST(CorpusReader, RejectsEmptyTextAndDuplicateIds) {
  EXPECT_THROW(load_corpus(write_temp("empty.jsonl", "{\"id\":\"a\",\"text\":\"   \"}\n")),
               ParseError);
  EXPECT_THROW(load_corpus(write_temp("dup.jsonl",
                                      "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n")),
               ValidationError);
  const auto p1 = write_temp("p1.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n");
  const auto p2 = write_temp("p2.jsonl", "{\"id\":\"a\",\"text\":\"y\"}\n");
  EXPECT_THROW(load_corpora({p1, p2}), ValidationError);
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), Error);
}

TEST(ChunkFile, RoundTrips) {
  const auto chunks =
      chunk_document(Document{"doc", "", "alpha beta gamma delta epsilon zeta", SourceKind::other},
                     {12, 3});
  const fs::path path = fs::temp_directory_path() / "causalrag_chunks.jsonl";
  write_chunks(path, chunks);
  EXPECT_EQ(read_chunks(path), chunks);
}

} // namespace
} // namespace causalrag
