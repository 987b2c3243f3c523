// Synthetic corpus generators used as test oracles: corpora are sampled from
// known topic-word distributions, so the generating structure is the ground
// truth the pipeline output is checked against.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bisonet/corpus.hpp"
#include "bisonet/matrix.hpp"
#include "bisonet/rng.hpp"

namespace bisonet::testsupport {

// Alphabetic, length >= 4, "zq" prefix so no stopword can collide.
std::string synthetic_word(int index);

std::vector<double> dirichlet(Rng& rng, std::size_t dim, double concentration);

// Draws an index from a discrete distribution (values sum to ~1).
std::size_t sample_discrete(Rng& rng, std::span<const double> probabilities);

struct DirichletCorpus {
  std::vector<RawDocument> raw;
  Matrix true_phi;    // topics x vocab
  Matrix true_theta;  // docs x topics
  std::vector<std::string> vocab_words;
};

// Plain LDA generative process: phi_t ~ Dir(phi_conc), theta_d ~ Dir(theta_conc),
// labels assigned round-robin over `domains` (no label signal).
DirichletCorpus make_dirichlet_corpus(int vocab, int topics, int docs, int doc_length,
                                      int domains, double phi_conc, double theta_conc,
                                      std::uint64_t seed);

struct PlantedBridgeCorpus {
  std::vector<RawDocument> raw;
  Matrix true_phi;  // 8 x 240
  std::vector<std::string> vocab_words;
  int bridge_topic = 6;
  int background_topic = 7;
  int target_domain = 0;
  int docs_per_domain = 60;
  std::vector<std::vector<std::string>> planted_ids;  // per domain
};

// Three domains x 60 docs over 8 topics. Each domain owns two topics; one
// shared background topic runs through every document; a bridge topic
// appears only in the ~10% of each domain's documents that are drawn mostly
// from the next domain's mixture.
PlantedBridgeCorpus make_planted_bridge_corpus(std::uint64_t seed);

double cosine(std::span<const double> a, std::span<const double> b);

// Restricts a generating phi to the columns present in a built vocabulary so
// it can be compared against a fitted model's phi.
Matrix project_phi(const Matrix& true_phi, const std::vector<std::string>& vocab_words,
                   const Vocabulary& vocab);

// Greedy max-cosine matching; returns the recovered row index assigned to
// each true row.
std::vector<int> greedy_align(const Matrix& true_phi, const Matrix& recovered_phi);

double mean_aligned_cosine(const Matrix& true_phi, const Matrix& recovered_phi);

// Small 3-domain fixture with disjoint word sets, for pipeline smoke tests.
void write_toy_corpus_jsonl(const std::string& path);

// Assembles a Corpus directly from token lists (no file I/O, no frequency
// filtering).
Corpus make_corpus_from_tokens(const std::vector<std::vector<std::string>>& docs,
                               const std::vector<int>& labels,
                               const std::vector<std::string>& domains);

// Fresh directory under the system temp root; removed recursively by the
// returned guard's destructor.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const;

 private:
  std::string path_;
};

}  // namespace bisonet::testsupport
