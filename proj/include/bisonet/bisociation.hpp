#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bisonet/classify.hpp"
#include "bisonet/corpus.hpp"
#include "bisonet/topic_model.hpp"

namespace bisonet {

// Ratio of a topic's mass inside a domain's outlier documents to its mass
// over the whole corpus. High scores mark topics common among outliers but
// rare overall.
struct TopicBisociationScore {
  std::int32_t domain = -1;
  std::int32_t topic = -1;
  double score = 0.0;
  // Set when the topic's total mass fell below 1e-12 (an unused topic); the
  // score is reported as 0 instead of a division blow-up.
  bool zero_denominator = false;
};

TopicBisociationScore bisociation_score(const Matrix& X,
                                        std::span<const std::size_t> outlier_docs,
                                        std::int32_t domain, std::int32_t topic);

// All topics for one domain, ordered by descending score with ascending
// topic id as the tie-break.
struct RankedTopicList {
  std::int32_t domain = -1;
  std::vector<TopicBisociationScore> topics;
};

RankedTopicList rank_bisociative_topics(const Corpus& corpus, const TopicModel& model,
                                        const OutlierSet& outliers, std::int32_t query_domain);

// Scores indexed by topic id (unranked) for one domain; used by the baseline
// selection below and by graph generation.
std::vector<TopicBisociationScore> score_all_topics(const Matrix& X,
                                                    std::span<const std::size_t> outlier_docs,
                                                    std::int32_t domain);

// Coherence-matched control topic: draws n_candidates random topics whose
// NPMI lies within npmi_tolerance of the given topic's (doubling the
// tolerance until enough candidates exist or every topic qualifies) and
// returns the drawn topic with the lowest bisociation score. Deterministic
// for a fixed seed.
std::int32_t select_baseline_topic(std::int32_t b_topic,
                                   std::span<const TopicBisociationScore> scores_by_topic,
                                   std::span<const double> coherence_by_topic, int n_candidates,
                                   double npmi_tolerance, std::uint64_t seed);

}  // namespace bisonet
