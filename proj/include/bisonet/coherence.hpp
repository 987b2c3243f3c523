#pragma once

#include <cstdint>
#include <vector>

#include "bisonet/corpus.hpp"
#include "bisonet/topic_model.hpp"

namespace bisonet {

// Document-level co-occurrence counts over a reference corpus (by default
// the input corpus itself). Stores a sorted posting list per token; pair
// counts are sorted-list intersections computed on demand.
class CooccurrenceTable {
 public:
  static CooccurrenceTable build(const Corpus& corpus);

  std::size_t num_docs() const { return num_docs_; }
  std::int32_t document_frequency(std::int32_t token) const;
  std::int32_t pair_document_frequency(std::int32_t a, std::int32_t b) const;

 private:
  std::size_t num_docs_ = 0;
  std::vector<std::vector<std::int32_t>> postings_;
};

// Normalized PMI of a word pair: log(p(a,b) / (p(a) p(b))) / -log p(a,b).
// Probabilities are document frequencies over the reference corpus; a pair
// (or word) that never occurs is floored at epsilon, which drives the score
// toward -1. A pair present in every document scores exactly 1.
double npmi_pair(const CooccurrenceTable& table, std::int32_t a, std::int32_t b,
                 double epsilon = 1e-12);

// Mean NPMI over all unordered pairs among topic t's top-m words.
// Throws std::invalid_argument when m < 2.
double npmi_coherence(const TopicModel& model, const Vocabulary& vocab, std::int32_t topic,
                      std::int32_t m, const CooccurrenceTable& table, double epsilon = 1e-12);

}  // namespace bisonet
