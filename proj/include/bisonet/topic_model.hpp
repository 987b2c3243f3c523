#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bisonet/corpus.hpp"
#include "bisonet/matrix.hpp"

namespace bisonet {

struct LdaConfig {
  std::int32_t topics = 100;
  // <= 0 means "auto": the usual 50/T symmetric prior.
  double alpha = 0.0;
  double beta = 0.1;
  std::int32_t iterations = 1000;
  std::int32_t burn_in = 500;
  std::int32_t thinning = 50;
  std::uint64_t seed = 1;

  double resolved_alpha() const { return alpha > 0.0 ? alpha : 50.0 / topics; }

  bool operator==(const LdaConfig&) const = default;
};

// Fitted LDA model. phi rows and X rows are probability distributions
// (posterior means averaged over post-burn-in thinned Gibbs samples).
struct TopicModel {
  std::int32_t num_topics = 0;
  std::int32_t vocab_size = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::int32_t iterations = 0;
  std::int32_t burn_in = 0;
  std::int32_t thinning = 0;

  Matrix phi;  // T x V topic-word distributions
  Matrix X;    // N x T document-topic proportions

  std::uint64_t vocab_hash = 0;
  std::uint64_t corpus_hash = 0;

  std::uint64_t content_hash() const;
};

struct TopicSummary {
  std::int32_t topic = -1;
  std::vector<std::string> words;  // descending probability
  std::vector<double> probabilities;
  double coherence = 0.0;  // NPMI; filled by the caller, see coherence.hpp
};

// Collapsed Gibbs sampling over token-topic assignments. Single-threaded and
// bit-deterministic for a fixed seed. Throws std::invalid_argument on bad
// configuration and std::runtime_error on zero-token documents (those should
// have been dropped at load).
TopicModel fit_lda(const Corpus& corpus, const LdaConfig& config);

// m highest-probability words for topic t, ties broken by token id; m is
// clamped to the vocabulary size.
TopicSummary top_words(const TopicModel& model, const Vocabulary& vocab, std::int32_t topic,
                       std::int32_t m);

// Total topic mass ranked ascending: usage_rank[t] == 1 means t is the least
// used topic corpus-wide (ties by topic id).
std::vector<std::int32_t> topic_usage_ranks(const Matrix& X);

// Versioned model artifact. Loading checks format and version;
// require_compatible refuses corpora with a different vocabulary hash.
void save_topic_model(const TopicModel& model, const std::string& path);
TopicModel load_topic_model(const std::string& path);
void require_compatible(const TopicModel& model, const Corpus& corpus);

}  // namespace bisonet
