#include "bisonet/bisociation.hpp"

#include <algorithm>
#include <stdexcept>

#include "bisonet/rng.hpp"

namespace bisonet {

namespace {
constexpr double kDenominatorFloor = 1e-12;
}

TopicBisociationScore bisociation_score(const Matrix& X,
                                        std::span<const std::size_t> outlier_docs,
                                        std::int32_t domain, std::int32_t topic) {
  if (topic < 0 || static_cast<std::size_t>(topic) >= X.cols()) {
    throw std::invalid_argument("bisociation_score: topic " + std::to_string(topic) +
                                " out of range");
  }
  const auto t = static_cast<std::size_t>(topic);
  double numerator = 0.0;
  for (std::size_t j : outlier_docs) {
    if (j >= X.rows()) {
      throw std::invalid_argument("bisociation_score: outlier document index out of range");
    }
    numerator += X(j, t);
  }
  double denominator = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) denominator += X(i, t);

  TopicBisociationScore result;
  result.domain = domain;
  result.topic = topic;
  if (denominator < kDenominatorFloor) {
    result.zero_denominator = true;
    result.score = 0.0;
  } else {
    result.score = std::clamp(numerator / denominator, 0.0, 1.0);
  }
  return result;
}

std::vector<TopicBisociationScore> score_all_topics(const Matrix& X,
                                                    std::span<const std::size_t> outlier_docs,
                                                    std::int32_t domain) {
  std::vector<TopicBisociationScore> scores;
  scores.reserve(X.cols());
  for (std::size_t t = 0; t < X.cols(); ++t) {
    scores.push_back(bisociation_score(X, outlier_docs, domain, static_cast<std::int32_t>(t)));
  }
  return scores;
}

RankedTopicList rank_bisociative_topics(const Corpus& corpus, const TopicModel& model,
                                        const OutlierSet& outliers, std::int32_t query_domain) {
  if (query_domain < 0 || static_cast<std::size_t>(query_domain) >= corpus.num_domains()) {
    throw std::invalid_argument("rank_bisociative_topics: unknown domain " +
                                std::to_string(query_domain));
  }
  if (static_cast<std::size_t>(query_domain) >= outliers.by_domain.size()) {
    throw std::invalid_argument("rank_bisociative_topics: outlier set does not cover domain " +
                                std::to_string(query_domain));
  }
  require_compatible(model, corpus);

  RankedTopicList list;
  list.domain = query_domain;
  list.topics = score_all_topics(
      model.X, outliers.by_domain[static_cast<std::size_t>(query_domain)], query_domain);
  std::sort(list.topics.begin(), list.topics.end(),
            [](const TopicBisociationScore& a, const TopicBisociationScore& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.topic < b.topic;
            });
  return list;
}

std::int32_t select_baseline_topic(std::int32_t b_topic,
                                   std::span<const TopicBisociationScore> scores_by_topic,
                                   std::span<const double> coherence_by_topic, int n_candidates,
                                   double npmi_tolerance, std::uint64_t seed) {
  const std::size_t T = scores_by_topic.size();
  if (T < 2) throw std::invalid_argument("select_baseline_topic: need at least 2 topics");
  if (coherence_by_topic.size() != T) {
    throw std::invalid_argument("select_baseline_topic: coherence table size mismatch");
  }
  if (b_topic < 0 || static_cast<std::size_t>(b_topic) >= T) {
    throw std::invalid_argument("select_baseline_topic: b_topic out of range");
  }
  if (n_candidates < 1) throw std::invalid_argument("select_baseline_topic: n_candidates >= 1");

  const double reference = coherence_by_topic[static_cast<std::size_t>(b_topic)];
  double tolerance = npmi_tolerance;
  std::vector<std::int32_t> pool;
  for (;;) {
    pool.clear();
    for (std::size_t t = 0; t < T; ++t) {
      if (static_cast<std::int32_t>(t) == b_topic) continue;
      if (std::abs(coherence_by_topic[t] - reference) <= tolerance) {
        pool.push_back(static_cast<std::int32_t>(t));
      }
    }
    if (pool.size() >= static_cast<std::size_t>(n_candidates) || pool.size() == T - 1) break;
    // NPMI lives in [-1, 1], so a tolerance of 2 already admits every topic.
    if (tolerance > 2.0) break;
    tolerance = tolerance > 0.0 ? tolerance * 2.0 : 1e-3;
  }
  if (pool.empty()) {
    // Tolerance never widened enough (possible only with NaN coherences).
    throw std::runtime_error("select_baseline_topic: no candidate topic found");
  }

  // Partial Fisher-Yates over the pool (sorted by topic id) picks the
  // candidate sample without replacement.
  const std::size_t draws = std::min(pool.size(), static_cast<std::size_t>(n_candidates));
  Rng rng(seed);
  for (std::size_t i = 0; i < draws; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }

  std::int32_t best = pool[0];
  for (std::size_t i = 1; i < draws; ++i) {
    const std::int32_t t = pool[i];
    const double s = scores_by_topic[static_cast<std::size_t>(t)].score;
    const double best_s = scores_by_topic[static_cast<std::size_t>(best)].score;
    if (s < best_s || (s == best_s && t < best)) best = t;
  }
  return best;
}

}  // namespace bisonet
