#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bisonet {

struct VocabularyOptions {
  // A token must appear in at least min_df documents...
  std::int32_t min_df = 5;
  // ...and in no more than max_df_frac * N documents.
  double max_df_frac = 0.5;

  bool operator==(const VocabularyOptions&) const = default;
};

// Dense token universe shared by every downstream stage. Ids run 0..V-1,
// assigned by descending total corpus frequency with lexicographic
// tie-breaks, so a rebuilt vocabulary over the same surviving counts gets
// the same ids.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, std::vector<std::int32_t> document_frequency);

  std::int32_t size() const { return static_cast<std::int32_t>(tokens_.size()); }
  bool empty() const { return tokens_.empty(); }

  // -1 when the token is not in the vocabulary.
  std::int32_t id_of(std::string_view token) const;
  const std::string& token_of(std::int32_t id) const { return tokens_[static_cast<std::size_t>(id)]; }
  std::int32_t document_frequency(std::int32_t id) const {
    return document_frequency_[static_cast<std::size_t>(id)];
  }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::int32_t>& document_frequencies() const { return document_frequency_; }

  // Fingerprint over tokens in id order; models remember it so they can
  // refuse a corpus with a different vocabulary.
  std::uint64_t content_hash() const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::int32_t> document_frequency_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

// Builds the vocabulary over tokenized documents, applying the document
// frequency bounds. Throws std::invalid_argument on bad options and
// std::runtime_error when no token survives.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents,
                            const VocabularyOptions& options);

}  // namespace bisonet
