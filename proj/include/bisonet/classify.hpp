#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bisonet/matrix.hpp"

namespace bisonet {

// Per-domain scores from the ensemble: the sum of each member's probability
// vector (each summing to 1 before the sum).
struct DomainScores {
  std::vector<double> values;
  // Ties go to the lowest domain index.
  int argmax() const;
};

// Normalizes each member's score vector to a probability simplex, then sums.
// Scaling any member's raw scores by a positive constant cannot change the
// result.
DomainScores combine_scores(const std::vector<std::vector<double>>& member_scores);

// A multi-class classifier over topic-proportion vectors.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::string_view name() const = 0;
  virtual void fit(const Matrix& features, std::span<const int> labels, int num_classes,
                   std::uint64_t seed) = 0;
  // Probability vector over classes; sums to 1.
  virtual std::vector<double> predict_proba(std::span<const double> x) const = 0;
  // Fresh unfitted copy with the same hyperparameters.
  virtual std::unique_ptr<Classifier> make_blank() const = 0;
};

// Softmax regression trained by full-batch gradient descent. Deterministic;
// ignores the seed.
class LogisticRegressionClassifier final : public Classifier {
 public:
  explicit LogisticRegressionClassifier(int epochs = 400, double learning_rate = 2.0,
                                        double l2 = 1e-3);
  std::string_view name() const override { return "logistic_regression"; }
  void fit(const Matrix& features, std::span<const int> labels, int num_classes,
           std::uint64_t seed) override;
  std::vector<double> predict_proba(std::span<const double> x) const override;
  std::unique_ptr<Classifier> make_blank() const override;

 private:
  int epochs_;
  double learning_rate_;
  double l2_;
  int num_classes_ = 0;
  std::size_t num_features_ = 0;
  std::vector<double> weights_;  // num_classes x (num_features + 1), bias last
};

// Naive Bayes over topic proportions discretized into fixed bins, with
// Laplace smoothing. Deterministic; ignores the seed.
class NaiveBayesClassifier final : public Classifier {
 public:
  std::string_view name() const override { return "naive_bayes"; }
  void fit(const Matrix& features, std::span<const int> labels, int num_classes,
           std::uint64_t seed) override;
  std::vector<double> predict_proba(std::span<const double> x) const override;
  std::unique_ptr<Classifier> make_blank() const override;

  static int bin_of(double value);
  static constexpr int kBins = 8;

 private:
  int num_classes_ = 0;
  std::size_t num_features_ = 0;
  std::vector<double> log_prior_;
  std::vector<double> log_likelihood_;  // class x feature x bin
};

// Bootstrap-aggregated CART trees with a depth limit; prediction averages
// the leaf class distributions.
class BaggedTreesClassifier final : public Classifier {
 public:
  explicit BaggedTreesClassifier(int num_trees = 25, int max_depth = 6, int min_leaf = 3);
  std::string_view name() const override { return "bagged_trees"; }
  void fit(const Matrix& features, std::span<const int> labels, int num_classes,
           std::uint64_t seed) override;
  std::vector<double> predict_proba(std::span<const double> x) const override;
  std::unique_ptr<Classifier> make_blank() const override;

 private:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::vector<double> distribution;  // leaves only
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  std::int32_t grow(Tree& tree, const Matrix& features, std::span<const int> labels,
                    std::vector<std::size_t>& samples, int depth);

  int num_trees_;
  int max_depth_;
  int min_leaf_;
  int num_classes_ = 0;
  std::vector<Tree> trees_;
};

// The three stock families, in the order they are reported.
std::vector<std::unique_ptr<Classifier>> default_candidates();

struct CvReport {
  struct Candidate {
    std::string name;
    double cv_accuracy = 0.0;
    bool selected = false;
  };
  std::vector<Candidate> candidates;
  int k_folds = 0;
  double ensemble_in_sample_accuracy = 0.0;
  double ensemble_macro_f1 = 0.0;
  // Raised when in-sample accuracy < 0.8: outlier sets from a weak ensemble
  // inflate bisociation scores.
  bool low_accuracy_warning = false;
};

void save_cv_report_json(const CvReport& report, const std::string& path);
CvReport load_cv_report_json(const std::string& path);

struct Ensemble {
  std::vector<std::unique_ptr<Classifier>> members;
  int num_classes = 0;

  DomainScores predict(std::span<const double> x) const;
};

struct TrainResult {
  Ensemble ensemble;
  CvReport report;
};

// Evaluates every candidate by stratified k-fold cross-validation, retrains
// the top 3 by CV accuracy on all data, and reports in-sample ensemble
// accuracy and macro-F1. All randomness derives from the seed.
TrainResult train_ensemble(const Matrix& features, std::span<const int> labels, int num_classes,
                           int k_folds, std::vector<std::unique_ptr<Classifier>> candidates,
                           std::uint64_t seed);

inline TrainResult train_ensemble(const Matrix& features, std::span<const int> labels,
                                  int num_classes, int k_folds, std::uint64_t seed) {
  return train_ensemble(features, labels, num_classes, k_folds, default_candidates(), seed);
}

// Fold id per sample; every class's members are spread evenly across folds.
std::vector<int> stratified_folds(std::span<const int> labels, int num_classes, int k_folds,
                                  std::uint64_t seed);

// In-sample false negatives per true domain (Algorithm: predict every row,
// collect rows whose argmax differs from the label).
struct OutlierSet {
  std::vector<std::vector<std::size_t>> by_domain;
  std::vector<int> predicted;  // per row

  std::size_t total() const;
  std::vector<std::size_t> counts() const;
};

OutlierSet find_outliers(const Ensemble& ensemble, const Matrix& features,
                         std::span<const int> labels);

}  // namespace bisonet
