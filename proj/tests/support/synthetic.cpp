#include "support/synthetic.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace bisonet::testsupport {

std::string synthetic_word(int index) {
  std::string suffix;
  int v = index;
  do {
    suffix.push_back(static_cast<char>('a' + v % 26));
    v /= 26;
  } while (v > 0);
  std::reverse(suffix.begin(), suffix.end());
  return "zq" + std::string(3 - std::min<std::size_t>(3, suffix.size()), 'a') + suffix;
}

std::vector<double> dirichlet(Rng& rng, std::size_t dim, double concentration) {
  std::vector<double> out(dim);
  double total = 0.0;
  for (double& v : out) {
    v = rng.gamma(concentration);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

std::size_t sample_discrete(Rng& rng, std::span<const double> probabilities) {
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  return probabilities.size() - 1;
}

namespace {

std::string sample_document_text(Rng& rng, std::span<const double> theta, const Matrix& phi,
                                 const std::vector<std::string>& words, int doc_length) {
  std::string body;
  for (int i = 0; i < doc_length; ++i) {
    const std::size_t topic = sample_discrete(rng, theta);
    const std::size_t word = sample_discrete(rng, phi.row(topic));
    if (!body.empty()) body.push_back(' ');
    body += words[word];
  }
  return body;
}

}  // namespace

DirichletCorpus make_dirichlet_corpus(int vocab, int topics, int docs, int doc_length,
                                      int domains, double phi_conc, double theta_conc,
                                      std::uint64_t seed) {
  DirichletCorpus corpus;
  corpus.vocab_words.reserve(static_cast<std::size_t>(vocab));
  for (int v = 0; v < vocab; ++v) corpus.vocab_words.push_back(synthetic_word(v));

  Rng rng(seed);
  corpus.true_phi = Matrix(static_cast<std::size_t>(topics), static_cast<std::size_t>(vocab));
  for (int t = 0; t < topics; ++t) {
    const auto row = dirichlet(rng, static_cast<std::size_t>(vocab), phi_conc);
    std::copy(row.begin(), row.end(), corpus.true_phi.row(static_cast<std::size_t>(t)).begin());
  }

  corpus.true_theta = Matrix(static_cast<std::size_t>(docs), static_cast<std::size_t>(topics));
  for (int d = 0; d < docs; ++d) {
    const auto theta = dirichlet(rng, static_cast<std::size_t>(topics), theta_conc);
    std::copy(theta.begin(), theta.end(),
              corpus.true_theta.row(static_cast<std::size_t>(d)).begin());
    RawDocument doc;
    doc.doc_id = "doc" + std::to_string(d);
    doc.domain = "dom" + std::to_string(d % domains);
    doc.body = sample_document_text(rng, corpus.true_theta.row(static_cast<std::size_t>(d)),
                                    corpus.true_phi, corpus.vocab_words, doc_length);
    corpus.raw.push_back(std::move(doc));
  }
  return corpus;
}

PlantedBridgeCorpus make_planted_bridge_corpus(std::uint64_t seed) {
  constexpr int kDomains = 3;
  constexpr int kTopics = 8;
  constexpr int kWordsPerTopic = 30;
  constexpr int kVocab = kTopics * kWordsPerTopic;
  constexpr int kDocsPerDomain = 60;
  constexpr int kPlantedPerDomain = 6;  // ~10%
  constexpr int kDocLength = 100;

  PlantedBridgeCorpus corpus;
  corpus.docs_per_domain = kDocsPerDomain;
  corpus.vocab_words.reserve(kVocab);
  for (int v = 0; v < kVocab; ++v) corpus.vocab_words.push_back(synthetic_word(v));

  Rng rng(seed);
  // Every topic owns a disjoint 30-word block.
  corpus.true_phi = Matrix(kTopics, kVocab, 0.0);
  for (int t = 0; t < kTopics; ++t) {
    const auto block = dirichlet(rng, kWordsPerTopic, 0.5);
    for (int w = 0; w < kWordsPerTopic; ++w) {
      corpus.true_phi(static_cast<std::size_t>(t),
                      static_cast<std::size_t>(t * kWordsPerTopic + w)) = block[w];
    }
  }

  corpus.planted_ids.resize(kDomains);
  std::vector<double> theta(kTopics);
  for (int d = 0; d < kDomains; ++d) {
    for (int j = 0; j < kDocsPerDomain; ++j) {
      const bool planted = j < kPlantedPerDomain;
      std::fill(theta.begin(), theta.end(), 0.0);
      const double split = rng.uniform(0.35, 0.65);
      if (planted) {
        // Mostly the next domain's mixture, plus the bridge topic.
        const int source = (d + 1) % kDomains;
        theta[static_cast<std::size_t>(2 * source)] = 0.55 * split;
        theta[static_cast<std::size_t>(2 * source + 1)] = 0.55 * (1.0 - split);
        theta[static_cast<std::size_t>(corpus.bridge_topic)] = 0.35;
      } else {
        theta[static_cast<std::size_t>(2 * d)] = 0.9 * split;
        theta[static_cast<std::size_t>(2 * d + 1)] = 0.9 * (1.0 - split);
      }
      theta[static_cast<std::size_t>(corpus.background_topic)] = 0.10;

      RawDocument doc;
      doc.doc_id = "d" + std::to_string(d) + "_i" + std::to_string(j);
      doc.domain = "dom" + std::to_string(d);
      doc.body =
          sample_document_text(rng, theta, corpus.true_phi, corpus.vocab_words, kDocLength);
      if (planted) corpus.planted_ids[static_cast<std::size_t>(d)].push_back(doc.doc_id);
      corpus.raw.push_back(std::move(doc));
    }
  }
  return corpus;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

Matrix project_phi(const Matrix& true_phi, const std::vector<std::string>& vocab_words,
                   const Vocabulary& vocab) {
  Matrix projected(true_phi.rows(), static_cast<std::size_t>(vocab.size()), 0.0);
  for (std::size_t w = 0; w < vocab_words.size(); ++w) {
    const std::int32_t id = vocab.id_of(vocab_words[w]);
    if (id < 0) continue;
    for (std::size_t t = 0; t < true_phi.rows(); ++t) {
      projected(t, static_cast<std::size_t>(id)) = true_phi(t, w);
    }
  }
  return projected;
}

std::vector<int> greedy_align(const Matrix& true_phi, const Matrix& recovered_phi) {
  if (true_phi.cols() != recovered_phi.cols()) {
    throw std::invalid_argument("greedy_align: column mismatch (project first)");
  }
  const std::size_t T = true_phi.rows();
  const std::size_t R = recovered_phi.rows();
  Matrix sim(T, R);
  for (std::size_t i = 0; i < T; ++i) {
    for (std::size_t j = 0; j < R; ++j) {
      sim(i, j) = cosine(true_phi.row(i), recovered_phi.row(j));
    }
  }
  std::vector<int> assignment(T, -1);
  std::vector<bool> row_used(T, false), col_used(R, false);
  for (std::size_t step = 0; step < std::min(T, R); ++step) {
    double best = -2.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < T; ++i) {
      if (row_used[i]) continue;
      for (std::size_t j = 0; j < R; ++j) {
        if (col_used[j]) continue;
        if (sim(i, j) > best) {
          best = sim(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    assignment[bi] = static_cast<int>(bj);
    row_used[bi] = true;
    col_used[bj] = true;
  }
  return assignment;
}

double mean_aligned_cosine(const Matrix& true_phi, const Matrix& recovered_phi) {
  const auto assignment = greedy_align(true_phi, recovered_phi);
  double total = 0.0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] < 0) continue;
    total += cosine(true_phi.row(i), recovered_phi.row(static_cast<std::size_t>(assignment[i])));
    ++matched;
  }
  return matched > 0 ? total / static_cast<double>(matched) : 0.0;
}

void write_toy_corpus_jsonl(const std::string& path) {
  // Three domains with distinctive word sets plus a shared filler word.
  const char* lines[] = {
      R"({"doc_id":"f1","domain":"food","title":"soup night","body":"soup broth carrot onion pepper soup kitchen recipe flavor simmer stock garlic"})",
      R"({"doc_id":"f2","domain":"food","body":"bread flour yeast oven bake crust loaf wheat knead rise bread butter"})",
      R"({"doc_id":"f3","domain":"food","body":"salad lettuce tomato cucumber olive dressing vinegar salad bowl fresh greens pepper"})",
      R"({"doc_id":"f4","domain":"food","body":"cheese milk curd dairy cream cheese churn ferment taste butter yogurt kitchen"})",
      R"({"doc_id":"f5","domain":"food","body":"recipe meal dinner cook kitchen stove pan flavor spice garlic onion simmer"})",
      R"({"doc_id":"m1","domain":"music","title":"garage band","body":"guitar amplifier chord riff melody drum rhythm bass guitar stage concert song"})",
      R"({"doc_id":"m2","domain":"music","body":"piano keys scale melody harmony tempo piano pedal sheet notes practice song"})",
      R"({"doc_id":"m3","domain":"music","body":"violin bow string orchestra concert conductor symphony violin tune rehearsal stage notes"})",
      R"({"doc_id":"m4","domain":"music","body":"drum beat rhythm percussion snare cymbal tempo groove drum sticks bass practice"})",
      R"({"doc_id":"m5","domain":"music","body":"song lyrics verse chorus melody singer voice harmony record studio song tune"})",
      R"({"doc_id":"s1","domain":"sport","title":"match day","body":"ball goal field referee team striker pass dribble ball stadium crowd match"})",
      R"({"doc_id":"s2","domain":"sport","body":"race track sprint runner stride pace finish lane race marathon training stopwatch"})",
      R"({"doc_id":"s3","domain":"sport","body":"swim pool lane stroke freestyle breathing goggles swim laps water training coach"})",
      R"({"doc_id":"s4","domain":"sport","body":"team coach training drill fitness match tactics season player bench stadium goal"})",
      R"({"doc_id":"s5","domain":"sport","body":"tennis racket serve volley court net rally tennis baseline umpire match player"})",
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write fixture: " + path);
  for (const char* line : lines) out << line << "\n";
}

Corpus make_corpus_from_tokens(const std::vector<std::vector<std::string>>& docs,
                               const std::vector<int>& labels,
                               const std::vector<std::string>& domains) {
  Corpus corpus;
  corpus.domains = domains;
  corpus.vocab = build_vocabulary(docs, {1, 1.0});
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Document doc;
    doc.doc_id = "doc" + std::to_string(i);
    doc.domain = labels[i];
    std::map<std::int32_t, std::int32_t> bag;
    for (const auto& t : docs[i]) ++bag[corpus.vocab.id_of(t)];
    doc.bag.assign(bag.begin(), bag.end());
    for (const auto& [id, count] : doc.bag) doc.token_total += count;
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<int> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  const int id = counter.fetch_add(1);
  path_ = (base / (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(id)))
              .string();
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& name) const {
  return (std::filesystem::path(path_) / name).string();
}

}  // namespace bisonet::testsupport
