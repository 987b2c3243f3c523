#include "bisonet/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bisonet {

CooccurrenceTable CooccurrenceTable::build(const Corpus& corpus) {
  CooccurrenceTable table;
  table.num_docs_ = corpus.size();
  table.postings_.resize(static_cast<std::size_t>(corpus.vocab.size()));
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    for (const auto& [id, count] : corpus.documents[d].bag) {
      table.postings_[static_cast<std::size_t>(id)].push_back(static_cast<std::int32_t>(d));
    }
  }
  return table;
}

std::int32_t CooccurrenceTable::document_frequency(std::int32_t token) const {
  if (token < 0 || static_cast<std::size_t>(token) >= postings_.size()) return 0;
  return static_cast<std::int32_t>(postings_[static_cast<std::size_t>(token)].size());
}

std::int32_t CooccurrenceTable::pair_document_frequency(std::int32_t a, std::int32_t b) const {
  if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= postings_.size() ||
      static_cast<std::size_t>(b) >= postings_.size()) {
    return 0;
  }
  const auto& pa = postings_[static_cast<std::size_t>(a)];
  const auto& pb = postings_[static_cast<std::size_t>(b)];
  std::int32_t both = 0;
  auto ia = pa.begin();
  auto ib = pb.begin();
  while (ia != pa.end() && ib != pb.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++both;
      ++ia;
      ++ib;
    }
  }
  return both;
}

double npmi_pair(const CooccurrenceTable& table, std::int32_t a, std::int32_t b, double epsilon) {
  const double n = static_cast<double>(table.num_docs());
  if (n <= 0.0) throw std::invalid_argument("npmi: empty reference corpus");
  const auto floored = [&](std::int32_t df) {
    return df > 0 ? static_cast<double>(df) / n : epsilon;
  };
  const double p_a = floored(table.document_frequency(a));
  const double p_b = floored(table.document_frequency(b));
  const double p_ab = floored(table.pair_document_frequency(a, b));
  if (p_ab >= 1.0) return 1.0;  // pair in every document: p_a = p_b = 1 as well
  const double score = std::log(p_ab / (p_a * p_b)) / -std::log(p_ab);
  return std::clamp(score, -1.0, 1.0);
}

double npmi_coherence(const TopicModel& model, const Vocabulary& vocab, std::int32_t topic,
                      std::int32_t m, const CooccurrenceTable& table, double epsilon) {
  if (m < 2) throw std::invalid_argument("npmi_coherence: m must be >= 2");
  const TopicSummary summary = top_words(model, vocab, topic, m);
  std::vector<std::int32_t> ids;
  ids.reserve(summary.words.size());
  for (const auto& w : summary.words) ids.push_back(vocab.id_of(w));
  if (ids.size() < 2) return 0.0;  // degenerate one-word vocabulary

  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      total += npmi_pair(table, ids[i], ids[j], epsilon);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

}  // namespace bisonet
