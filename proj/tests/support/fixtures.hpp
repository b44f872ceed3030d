#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "causalrag/corpus.hpp"
#include "causalrag/evaluation.hpp"
#include "causalrag/index.hpp"

namespace causalrag::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(CAUSALRAG_FIXTURE_DIR) / name;
}

// The shipped fixture corpus, chunked with default options and indexed with
// the default local embedder and built-in lexicon.
struct FixturePipeline {
  std::unique_ptr<EmbeddingProvider> embedder;
  Index index;
  std::unique_ptr<Generator> generator;
  std::vector<QAItem> items;

  EvalResources resources() {
    return {&index, embedder.get(), &CausalLexicon::builtin(), generator.get()};
  }
};

inline Index fixture_index(EmbeddingProvider& embedder) {
  std::vector<Chunk> chunks;
  for (const auto& doc : load_corpus(fixture("corpus.jsonl"))) {
    auto cs = chunk_document(doc, {});
    chunks.insert(chunks.end(), cs.begin(), cs.end());
  }
  return build_index(chunks, embedder, CausalLexicon::builtin());
}

inline FixturePipeline mcq_fixture_pipeline() {
  auto embedder = make_embedding_provider(EmbeddingProviderConfig{});
  Index index = fixture_index(*embedder);
  return {std::move(embedder), std::move(index),
          std::make_unique<ScriptedMockGenerator>(fixture("mcq_script.jsonl")),
          load_dataset(fixture("mcq_dataset.jsonl"), DatasetKind::mcq)};
}

} // namespace causalrag::testing
