#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bisonet/tokenizer.hpp"
#include "bisonet/vocabulary.hpp"

namespace bisonet {

enum class CorpusFormat { jsonl, csv };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view to_string(CorpusFormat format);

// One record as it appears in the input file, before any processing.
struct RawDocument {
  std::string doc_id;
  std::string domain;
  std::string title;
  std::string body;
};

// Bag-of-words document: (token id, count) pairs sorted by id.
struct Document {
  std::string doc_id;
  std::string title;
  std::int32_t domain = -1;
  std::vector<std::pair<std::int32_t, std::int32_t>> bag;
  std::int64_t token_total = 0;
};

// Immutable after construction; safe to share across readers.
struct Corpus {
  std::vector<Document> documents;
  std::vector<std::string> domains;  // first-appearance order
  Vocabulary vocab;

  std::size_t size() const { return documents.size(); }
  std::size_t num_domains() const { return domains.size(); }

  std::vector<int> labels() const;
  std::vector<std::size_t> domain_docs(std::int32_t domain) const;
  // -1 when the name is unknown.
  std::int32_t domain_id(std::string_view name) const;
  // -1 when the id is unknown.
  std::int64_t document_index(std::string_view doc_id) const;

  std::uint64_t content_hash() const;
};

struct LoadReport {
  std::size_t records = 0;
  std::size_t dropped_empty = 0;         // empty after tokenization
  std::size_t dropped_out_of_vocab = 0;  // emptied by the vocabulary bounds
  std::vector<std::string> dropped_doc_ids;
};

struct CorpusLoadResult {
  Corpus corpus;
  LoadReport report;
};

// Reads raw records; errors name the offending line. Duplicate doc_ids and
// records missing doc_id/domain/body are rejected.
std::vector<RawDocument> read_raw_documents(const std::string& path, CorpusFormat format);

// Tokenizes (title concatenated to body), drops documents that end up empty,
// builds the vocabulary, and assembles the corpus. Throws when fewer than
// two domains survive.
CorpusLoadResult build_corpus(const std::vector<RawDocument>& raw, const Tokenizer& tokenizer,
                              const VocabularyOptions& vocab_options);

CorpusLoadResult load_corpus(const std::string& path, CorpusFormat format,
                             const TokenizerOptions& tokenizer_options = {},
                             const VocabularyOptions& vocab_options = {});

// Versioned corpus artifact (corpus + vocabulary + load report).
void save_corpus_json(const CorpusLoadResult& result, const std::string& path);
CorpusLoadResult load_corpus_json(const std::string& path);

}  // namespace bisonet
