#include "bisonet/topic_model.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "bisonet/hash.hpp"
#include "bisonet/rng.hpp"

namespace bisonet {

using nlohmann::json;

std::uint64_t TopicModel::content_hash() const {
  Fnv1a64 h;
  h.update_i64(num_topics).update_i64(vocab_size);
  h.update_double(alpha).update_double(beta);
  h.update_u64(seed);
  h.update_i64(iterations).update_i64(burn_in).update_i64(thinning);
  for (double v : phi.data()) h.update_double(v);
  for (double v : X.data()) h.update_double(v);
  h.update_u64(vocab_hash).update_u64(corpus_hash);
  return h.digest();
}

namespace {

void validate(const Corpus& corpus, const LdaConfig& config) {
  if (config.topics < 2) throw std::invalid_argument("lda: topics must be >= 2");
  if (config.burn_in < 0) throw std::invalid_argument("lda: burn_in must be >= 0");
  if (config.iterations <= config.burn_in) {
    throw std::invalid_argument("lda: iterations must be > burn_in");
  }
  if (config.thinning < 1) throw std::invalid_argument("lda: thinning must be >= 1");
  if (corpus.vocab.empty()) throw std::invalid_argument("lda: empty vocabulary");
  for (const auto& doc : corpus.documents) {
    if (doc.token_total <= 0) {
      throw std::runtime_error("lda: document \"" + doc.doc_id +
                               "\" has zero tokens; drop it at load time");
    }
  }
}

}  // namespace

TopicModel fit_lda(const Corpus& corpus, const LdaConfig& config) {
  validate(corpus, config);

  const std::size_t num_docs = corpus.size();
  const std::int32_t T = config.topics;
  const std::int32_t V = corpus.vocab.size();
  const double alpha = config.resolved_alpha();
  const double beta = config.beta;
  const double v_beta = static_cast<double>(V) * beta;

  // Flatten bags into per-occurrence arrays; each occurrence carries its own
  // topic assignment.
  std::vector<std::int32_t> word_of;
  std::vector<std::size_t> doc_begin(num_docs + 1, 0);
  for (std::size_t d = 0; d < num_docs; ++d) {
    doc_begin[d] = word_of.size();
    for (const auto& [id, count] : corpus.documents[d].bag) {
      for (std::int32_t c = 0; c < count; ++c) word_of.push_back(id);
    }
  }
  doc_begin[num_docs] = word_of.size();
  const std::size_t total_tokens = word_of.size();

  std::vector<std::int32_t> assignment(total_tokens);
  std::vector<std::int32_t> doc_topic(num_docs * static_cast<std::size_t>(T), 0);
  std::vector<std::int32_t> topic_word(static_cast<std::size_t>(T) * V, 0);
  std::vector<std::int32_t> topic_total(T, 0);

  Rng rng(config.seed);
  for (std::size_t d = 0; d < num_docs; ++d) {
    for (std::size_t i = doc_begin[d]; i < doc_begin[d + 1]; ++i) {
      const auto k = static_cast<std::int32_t>(rng.uniform_index(static_cast<std::size_t>(T)));
      assignment[i] = k;
      ++doc_topic[d * T + k];
      ++topic_word[static_cast<std::size_t>(k) * V + word_of[i]];
      ++topic_total[k];
    }
  }

  Matrix phi_acc(static_cast<std::size_t>(T), static_cast<std::size_t>(V), 0.0);
  Matrix x_acc(num_docs, static_cast<std::size_t>(T), 0.0);
  std::int32_t samples = 0;
  std::vector<double> cumulative(T);

  for (std::int32_t sweep = 1; sweep <= config.iterations; ++sweep) {
    for (std::size_t d = 0; d < num_docs; ++d) {
      std::int32_t* nd = &doc_topic[d * T];
      for (std::size_t i = doc_begin[d]; i < doc_begin[d + 1]; ++i) {
        const std::int32_t v = word_of[i];
        const std::int32_t old_k = assignment[i];
        --nd[old_k];
        --topic_word[static_cast<std::size_t>(old_k) * V + v];
        --topic_total[old_k];

        double sum = 0.0;
        for (std::int32_t k = 0; k < T; ++k) {
          sum += (nd[k] + alpha) *
                 (topic_word[static_cast<std::size_t>(k) * V + v] + beta) /
                 (topic_total[k] + v_beta);
          cumulative[static_cast<std::size_t>(k)] = sum;
        }
        const double u = rng.uniform01() * sum;
        std::int32_t new_k = 0;
        while (new_k < T - 1 && cumulative[static_cast<std::size_t>(new_k)] < u) ++new_k;

        assignment[i] = new_k;
        ++nd[new_k];
        ++topic_word[static_cast<std::size_t>(new_k) * V + v];
        ++topic_total[new_k];
      }
    }

    const bool past_burn_in = sweep > config.burn_in;
    const bool on_schedule = past_burn_in && (sweep - config.burn_in) % config.thinning == 0;
    // Guarantee at least one posterior sample even when thinning overshoots.
    const bool last_chance = sweep == config.iterations && samples == 0;
    if (!on_schedule && !last_chance) continue;

    ++samples;
    for (std::int32_t k = 0; k < T; ++k) {
      const double denom = topic_total[k] + v_beta;
      for (std::int32_t v = 0; v < V; ++v) {
        phi_acc(static_cast<std::size_t>(k), static_cast<std::size_t>(v)) +=
            (topic_word[static_cast<std::size_t>(k) * V + v] + beta) / denom;
      }
    }
    for (std::size_t d = 0; d < num_docs; ++d) {
      const double denom =
          static_cast<double>(doc_begin[d + 1] - doc_begin[d]) + static_cast<double>(T) * alpha;
      for (std::int32_t k = 0; k < T; ++k) {
        x_acc(d, static_cast<std::size_t>(k)) += (doc_topic[d * T + k] + alpha) / denom;
      }
    }
  }

  for (double& v : phi_acc.data()) v /= samples;
  for (double& v : x_acc.data()) v /= samples;

  TopicModel model;
  model.num_topics = T;
  model.vocab_size = V;
  model.alpha = alpha;
  model.beta = beta;
  model.seed = config.seed;
  model.iterations = config.iterations;
  model.burn_in = config.burn_in;
  model.thinning = config.thinning;
  model.phi = std::move(phi_acc);
  model.X = std::move(x_acc);
  model.vocab_hash = corpus.vocab.content_hash();
  model.corpus_hash = corpus.content_hash();
  return model;
}

TopicSummary top_words(const TopicModel& model, const Vocabulary& vocab, std::int32_t topic,
                       std::int32_t m) {
  if (topic < 0 || topic >= model.num_topics) {
    throw std::invalid_argument("top_words: topic " + std::to_string(topic) + " out of range");
  }
  if (m < 1) throw std::invalid_argument("top_words: m must be >= 1");
  if (vocab.size() != model.vocab_size) {
    throw std::invalid_argument("top_words: vocabulary size does not match the model");
  }
  const std::int32_t count = std::min(m, model.vocab_size);
  std::vector<std::int32_t> order(static_cast<std::size_t>(model.vocab_size));
  std::iota(order.begin(), order.end(), 0);
  const auto row = model.phi.row(static_cast<std::size_t>(topic));
  std::partial_sort(order.begin(), order.begin() + count, order.end(),
                    [&](std::int32_t a, std::int32_t b) {
                      if (row[static_cast<std::size_t>(a)] != row[static_cast<std::size_t>(b)]) {
                        return row[static_cast<std::size_t>(a)] > row[static_cast<std::size_t>(b)];
                      }
                      return a < b;
                    });
  TopicSummary summary;
  summary.topic = topic;
  for (std::int32_t i = 0; i < count; ++i) {
    const std::int32_t id = order[static_cast<std::size_t>(i)];
    summary.words.push_back(vocab.token_of(id));
    summary.probabilities.push_back(row[static_cast<std::size_t>(id)]);
  }
  return summary;
}

std::vector<std::int32_t> topic_usage_ranks(const Matrix& X) {
  const std::size_t T = X.cols();
  std::vector<double> usage(T, 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (std::size_t t = 0; t < T; ++t) usage[t] += X(i, t);
  }
  std::vector<std::int32_t> order(T);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    if (usage[static_cast<std::size_t>(a)] != usage[static_cast<std::size_t>(b)]) {
      return usage[static_cast<std::size_t>(a)] < usage[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  std::vector<std::int32_t> rank(T, 0);
  for (std::size_t i = 0; i < T; ++i) {
    rank[static_cast<std::size_t>(order[i])] = static_cast<std::int32_t>(i) + 1;
  }
  return rank;
}

namespace {
constexpr const char* kModelFormatTag = "bisonet-topic-model";
constexpr int kModelVersion = 1;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  Matrix m;
  if (rows.empty()) return m;
  const std::size_t cols = rows.front().size();
  m = Matrix(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = rows[r].get<std::vector<double>>();
    if (row.size() != cols) throw std::runtime_error("model artifact: ragged matrix");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}
}  // namespace

void save_topic_model(const TopicModel& model, const std::string& path) {
  json j;
  j["format"] = kModelFormatTag;
  j["version"] = kModelVersion;
  j["topics"] = model.num_topics;
  j["vocab_size"] = model.vocab_size;
  j["alpha"] = model.alpha;
  j["beta"] = model.beta;
  j["seed"] = model.seed;
  j["iterations"] = model.iterations;
  j["burn_in"] = model.burn_in;
  j["thinning"] = model.thinning;
  j["vocab_hash"] = hex64(model.vocab_hash);
  j["corpus_hash"] = hex64(model.corpus_hash);
  j["phi"] = matrix_to_json(model.phi);
  j["X"] = matrix_to_json(model.X);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model artifact: " + path);
  out << j.dump() << "\n";
}

TopicModel load_topic_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model artifact: " + path);
  json j;
  in >> j;
  if (j.value("format", "") != kModelFormatTag || j.value("version", 0) != kModelVersion) {
    throw std::runtime_error("not a topic-model artifact (or unsupported version): " + path);
  }
  TopicModel model;
  model.num_topics = j.at("topics").get<std::int32_t>();
  model.vocab_size = j.at("vocab_size").get<std::int32_t>();
  model.alpha = j.at("alpha").get<double>();
  model.beta = j.at("beta").get<double>();
  model.seed = j.at("seed").get<std::uint64_t>();
  model.iterations = j.at("iterations").get<std::int32_t>();
  model.burn_in = j.at("burn_in").get<std::int32_t>();
  model.thinning = j.at("thinning").get<std::int32_t>();
  model.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16);
  model.corpus_hash = std::stoull(j.at("corpus_hash").get<std::string>(), nullptr, 16);
  model.phi = matrix_from_json(j.at("phi"));
  model.X = matrix_from_json(j.at("X"));
  return model;
}

void require_compatible(const TopicModel& model, const Corpus& corpus) {
  if (model.vocab_hash != corpus.vocab.content_hash()) {
    throw std::runtime_error(
        "model/corpus mismatch: the corpus vocabulary hash differs from the one the model "
        "was fitted on");
  }
  if (model.X.rows() != corpus.size()) {
    throw std::runtime_error("model/corpus mismatch: document counts differ");
  }
}

}  // namespace bisonet
