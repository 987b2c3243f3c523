#include "bisonet/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "bisonet/rng.hpp"

namespace bisonet {

using nlohmann::json;

int DomainScores::argmax() const {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

DomainScores combine_scores(const std::vector<std::vector<double>>& member_scores) {
  if (member_scores.empty()) throw std::invalid_argument("combine_scores: no members");
  DomainScores out;
  out.values.assign(member_scores.front().size(), 0.0);
  for (const auto& scores : member_scores) {
    if (scores.size() != out.values.size()) {
      throw std::invalid_argument("combine_scores: member score length mismatch");
    }
    double sum = 0.0;
    for (double s : scores) {
      if (s < 0.0) throw std::invalid_argument("combine_scores: negative score");
      sum += s;
    }
    if (sum <= 0.0) throw std::invalid_argument("combine_scores: all-zero score vector");
    for (std::size_t i = 0; i < scores.size(); ++i) out.values[i] += scores[i] / sum;
  }
  return out;
}

namespace {

void softmax_inplace(std::vector<double>& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - peak);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

void check_dimensions(std::size_t expected, std::span<const double> x, std::string_view who) {
  if (x.size() != expected) {
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(expected) +
                                " features, got " + std::to_string(x.size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Logistic regression

LogisticRegressionClassifier::LogisticRegressionClassifier(int epochs, double learning_rate,
                                                           double l2)
    : epochs_(epochs), learning_rate_(learning_rate), l2_(l2) {}

void LogisticRegressionClassifier::fit(const Matrix& features, std::span<const int> labels,
                                       int num_classes, std::uint64_t /*seed*/) {
  const std::size_t n = features.rows();
  const std::size_t f = features.cols();
  num_classes_ = num_classes;
  num_features_ = f;
  const std::size_t stride = f + 1;
  weights_.assign(static_cast<std::size_t>(num_classes) * stride, 0.0);

  std::vector<double> logits(static_cast<std::size_t>(num_classes));
  std::vector<double> gradient(weights_.size());
  for (int epoch = 0; epoch < epochs_; ++epoch) {
    std::fill(gradient.begin(), gradient.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = features.row(i);
      for (int c = 0; c < num_classes; ++c) {
        const double* w = &weights_[static_cast<std::size_t>(c) * stride];
        double z = w[f];
        for (std::size_t j = 0; j < f; ++j) z += w[j] * x[j];
        logits[static_cast<std::size_t>(c)] = z;
      }
      softmax_inplace(logits);
      for (int c = 0; c < num_classes; ++c) {
        const double err =
            logits[static_cast<std::size_t>(c)] - (labels[i] == c ? 1.0 : 0.0);
        double* g = &gradient[static_cast<std::size_t>(c) * stride];
        for (std::size_t j = 0; j < f; ++j) g[j] += err * x[j];
        g[f] += err;
      }
    }
    const double scale = learning_rate_ / static_cast<double>(n);
    for (int c = 0; c < num_classes; ++c) {
      double* w = &weights_[static_cast<std::size_t>(c) * stride];
      const double* g = &gradient[static_cast<std::size_t>(c) * stride];
      for (std::size_t j = 0; j < f; ++j) w[j] -= scale * (g[j] + l2_ * w[j] * n);
      w[f] -= scale * g[f];  // bias is not regularized
    }
  }
}

std::vector<double> LogisticRegressionClassifier::predict_proba(std::span<const double> x) const {
  check_dimensions(num_features_, x, "logistic_regression");
  const std::size_t stride = num_features_ + 1;
  std::vector<double> logits(static_cast<std::size_t>(num_classes_));
  for (int c = 0; c < num_classes_; ++c) {
    const double* w = &weights_[static_cast<std::size_t>(c) * stride];
    double z = w[num_features_];
    for (std::size_t j = 0; j < num_features_; ++j) z += w[j] * x[j];
    logits[static_cast<std::size_t>(c)] = z;
  }
  softmax_inplace(logits);
  return logits;
}

std::unique_ptr<Classifier> LogisticRegressionClassifier::make_blank() const {
  return std::make_unique<LogisticRegressionClassifier>(epochs_, learning_rate_, l2_);
}

// ---------------------------------------------------------------------------
// Naive Bayes over discretized proportions

int NaiveBayesClassifier::bin_of(double value) {
  // Edges chosen for simplex-valued features, denser near zero where topic
  // proportions concentrate.
  static constexpr double edges[] = {0.02, 0.05, 0.1, 0.2, 0.35, 0.55, 0.8};
  int bin = 0;
  for (double edge : edges) {
    if (value < edge) return bin;
    ++bin;
  }
  return bin;
}

void NaiveBayesClassifier::fit(const Matrix& features, std::span<const int> labels,
                               int num_classes, std::uint64_t /*seed*/) {
  const std::size_t n = features.rows();
  const std::size_t f = features.cols();
  num_classes_ = num_classes;
  num_features_ = f;

  std::vector<double> class_count(static_cast<std::size_t>(num_classes), 0.0);
  std::vector<double> counts(static_cast<std::size_t>(num_classes) * f * kBins, 1.0);  // Laplace
  for (std::size_t i = 0; i < n; ++i) {
    const int c = labels[i];
    class_count[static_cast<std::size_t>(c)] += 1.0;
    const auto x = features.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      counts[(static_cast<std::size_t>(c) * f + j) * kBins +
             static_cast<std::size_t>(bin_of(x[j]))] += 1.0;
    }
  }

  log_prior_.resize(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    log_prior_[static_cast<std::size_t>(c)] =
        std::log((class_count[static_cast<std::size_t>(c)] + 1.0) /
                 (static_cast<double>(n) + num_classes));
  }
  log_likelihood_.resize(counts.size());
  for (int c = 0; c < num_classes; ++c) {
    for (std::size_t j = 0; j < f; ++j) {
      const std::size_t base = (static_cast<std::size_t>(c) * f + j) * kBins;
      const double denom = class_count[static_cast<std::size_t>(c)] + kBins;
      for (int b = 0; b < kBins; ++b) {
        log_likelihood_[base + static_cast<std::size_t>(b)] =
            std::log(counts[base + static_cast<std::size_t>(b)] / denom);
      }
    }
  }
}

std::vector<double> NaiveBayesClassifier::predict_proba(std::span<const double> x) const {
  check_dimensions(num_features_, x, "naive_bayes");
  std::vector<double> log_joint(static_cast<std::size_t>(num_classes_));
  for (int c = 0; c < num_classes_; ++c) {
    double lp = log_prior_[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < num_features_; ++j) {
      lp += log_likelihood_[(static_cast<std::size_t>(c) * num_features_ + j) * kBins +
                            static_cast<std::size_t>(bin_of(x[j]))];
    }
    log_joint[static_cast<std::size_t>(c)] = lp;
  }
  softmax_inplace(log_joint);
  return log_joint;
}

std::unique_ptr<Classifier> NaiveBayesClassifier::make_blank() const {
  return std::make_unique<NaiveBayesClassifier>();
}

// ---------------------------------------------------------------------------
// Bagged trees

BaggedTreesClassifier::BaggedTreesClassifier(int num_trees, int max_depth, int min_leaf)
    : num_trees_(num_trees), max_depth_(max_depth), min_leaf_(min_leaf) {}

namespace {

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double g = 1.0;
  for (double c : counts) {
    const double p = c / total;
    g -= p * p;
  }
  return g;
}

}  // namespace

std::int32_t BaggedTreesClassifier::grow(Tree& tree, const Matrix& features,
                                         std::span<const int> labels,
                                         std::vector<std::size_t>& samples, int depth) {
  std::vector<double> counts(static_cast<std::size_t>(num_classes_), 0.0);
  for (std::size_t s : samples) counts[static_cast<std::size_t>(labels[s])] += 1.0;
  const double total = static_cast<double>(samples.size());

  const auto make_leaf = [&]() -> std::int32_t {
    Node leaf;
    leaf.distribution.resize(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) leaf.distribution[c] = counts[c] / total;
    tree.nodes.push_back(std::move(leaf));
    return static_cast<std::int32_t>(tree.nodes.size() - 1);
  };

  const double node_gini = gini(counts, total);
  if (depth >= max_depth_ || samples.size() < 2 * static_cast<std::size_t>(min_leaf_) ||
      node_gini == 0.0) {
    return make_leaf();
  }

  // Exhaustive split search: sort by feature value and sweep the midpoints.
  std::int32_t best_feature = -1;
  double best_threshold = 0.0;
  double best_impurity = node_gini;
  std::vector<std::size_t> order(samples);
  std::vector<double> left_counts(counts.size());
  for (std::size_t j = 0; j < features.cols(); ++j) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = features(a, j);
      const double vb = features(b, j);
      if (va != vb) return va < vb;
      return a < b;
    });
    std::fill(left_counts.begin(), left_counts.end(), 0.0);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      left_counts[static_cast<std::size_t>(labels[order[i]])] += 1.0;
      const double v = features(order[i], j);
      const double next = features(order[i + 1], j);
      if (v == next) continue;
      const std::size_t n_left = i + 1;
      const std::size_t n_right = order.size() - n_left;
      if (n_left < static_cast<std::size_t>(min_leaf_) ||
          n_right < static_cast<std::size_t>(min_leaf_)) {
        continue;
      }
      std::vector<double> right_counts(counts.size());
      for (std::size_t c = 0; c < counts.size(); ++c) right_counts[c] = counts[c] - left_counts[c];
      const double impurity =
          (static_cast<double>(n_left) * gini(left_counts, static_cast<double>(n_left)) +
           static_cast<double>(n_right) * gini(right_counts, static_cast<double>(n_right))) /
          total;
      if (impurity < best_impurity - 1e-12) {
        best_impurity = impurity;
        best_feature = static_cast<std::int32_t>(j);
        best_threshold = 0.5 * (v + next);
      }
    }
  }

  if (best_feature < 0) return make_leaf();

  std::vector<std::size_t> left, right;
  for (std::size_t s : samples) {
    (features(s, static_cast<std::size_t>(best_feature)) < best_threshold ? left : right)
        .push_back(s);
  }
  samples.clear();
  samples.shrink_to_fit();

  const std::int32_t self = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  tree.nodes[static_cast<std::size_t>(self)].feature = best_feature;
  tree.nodes[static_cast<std::size_t>(self)].threshold = best_threshold;
  const std::int32_t left_id = grow(tree, features, labels, left, depth + 1);
  const std::int32_t right_id = grow(tree, features, labels, right, depth + 1);
  tree.nodes[static_cast<std::size_t>(self)].left = left_id;
  tree.nodes[static_cast<std::size_t>(self)].right = right_id;
  return self;
}

void BaggedTreesClassifier::fit(const Matrix& features, std::span<const int> labels,
                                int num_classes, std::uint64_t seed) {
  num_classes_ = num_classes;
  trees_.clear();
  trees_.reserve(static_cast<std::size_t>(num_trees_));
  const std::size_t n = features.rows();
  for (int t = 0; t < num_trees_; ++t) {
    Rng rng(derive_seed(seed, "tree/" + std::to_string(t)));
    std::vector<std::size_t> bootstrap(n);
    for (std::size_t i = 0; i < n; ++i) bootstrap[i] = rng.uniform_index(n);
    std::sort(bootstrap.begin(), bootstrap.end());
    Tree tree;
    grow(tree, features, labels, bootstrap, 0);
    trees_.push_back(std::move(tree));
  }
}

std::vector<double> BaggedTreesClassifier::predict_proba(std::span<const double> x) const {
  std::vector<double> out(static_cast<std::size_t>(num_classes_), 0.0);
  for (const Tree& tree : trees_) {
    std::int32_t node = 0;  // grow() always places the root first
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
      const Node& cur = tree.nodes[static_cast<std::size_t>(node)];
      if (static_cast<std::size_t>(cur.feature) >= x.size()) {
        throw std::invalid_argument("bagged_trees: feature dimension mismatch");
      }
      node = x[static_cast<std::size_t>(cur.feature)] < cur.threshold ? cur.left : cur.right;
    }
    const auto& dist = tree.nodes[static_cast<std::size_t>(node)].distribution;
    for (std::size_t c = 0; c < dist.size(); ++c) out[c] += dist[c];
  }
  for (double& v : out) v /= static_cast<double>(trees_.size());
  return out;
}

std::unique_ptr<Classifier> BaggedTreesClassifier::make_blank() const {
  return std::make_unique<BaggedTreesClassifier>(num_trees_, max_depth_, min_leaf_);
}

std::vector<std::unique_ptr<Classifier>> default_candidates() {
  std::vector<std::unique_ptr<Classifier>> out;
  out.push_back(std::make_unique<LogisticRegressionClassifier>());
  out.push_back(std::make_unique<NaiveBayesClassifier>());
  out.push_back(std::make_unique<BaggedTreesClassifier>());
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation and the ensemble

std::vector<int> stratified_folds(std::span<const int> labels, int num_classes, int k_folds,
                                  std::uint64_t seed) {
  if (k_folds < 2) throw std::invalid_argument("k_folds must be >= 2");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::vector<int> fold(labels.size(), 0);
  Rng rng(derive_seed(seed, "folds"));
  for (int c = 0; c < num_classes; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    if (members.size() < static_cast<std::size_t>(k_folds)) {
      throw std::invalid_argument("domain " + std::to_string(c) + " has only " +
                                  std::to_string(members.size()) + " documents, fewer than " +
                                  std::to_string(k_folds) +
                                  " folds; use a smaller k_folds");
    }
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k_folds));
    }
  }
  return fold;
}

DomainScores Ensemble::predict(std::span<const double> x) const {
  std::vector<std::vector<double>> member_scores;
  member_scores.reserve(members.size());
  for (const auto& m : members) member_scores.push_back(m->predict_proba(x));
  return combine_scores(member_scores);
}

namespace {

double macro_f1(std::span<const int> truth, std::span<const int> predicted, int num_classes) {
  std::vector<double> tp(static_cast<std::size_t>(num_classes), 0.0);
  std::vector<double> fp(static_cast<std::size_t>(num_classes), 0.0);
  std::vector<double> fn(static_cast<std::size_t>(num_classes), 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == predicted[i]) {
      tp[static_cast<std::size_t>(truth[i])] += 1.0;
    } else {
      fp[static_cast<std::size_t>(predicted[i])] += 1.0;
      fn[static_cast<std::size_t>(truth[i])] += 1.0;
    }
  }
  double total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const double denom = 2.0 * tp[static_cast<std::size_t>(c)] + fp[static_cast<std::size_t>(c)] +
                         fn[static_cast<std::size_t>(c)];
    total += denom > 0.0 ? 2.0 * tp[static_cast<std::size_t>(c)] / denom : 0.0;
  }
  return total / num_classes;
}

}  // namespace

TrainResult train_ensemble(const Matrix& features, std::span<const int> labels, int num_classes,
                           int k_folds, std::vector<std::unique_ptr<Classifier>> candidates,
                           std::uint64_t seed) {
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("train_ensemble: feature/label count mismatch");
  }
  if (candidates.size() < 3) {
    throw std::invalid_argument("train_ensemble: need at least 3 candidate families");
  }
  const std::vector<int> fold = stratified_folds(labels, num_classes, k_folds, seed);

  CvReport report;
  report.k_folds = k_folds;
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    std::size_t correct = 0;
    for (int f = 0; f < k_folds; ++f) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        (fold[i] == f ? test_rows : train_rows).push_back(i);
      }
      Matrix train_x(train_rows.size(), features.cols());
      std::vector<int> train_y(train_rows.size());
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        std::copy(features.row(train_rows[i]).begin(), features.row(train_rows[i]).end(),
                  train_x.row(i).begin());
        train_y[i] = labels[train_rows[i]];
      }
      auto model = candidates[ci]->make_blank();
      model->fit(train_x, train_y, num_classes,
                 derive_seed(seed, "cv/" + std::string(model->name()) + "/" + std::to_string(f)));
      for (std::size_t row : test_rows) {
        const auto proba = model->predict_proba(features.row(row));
        const int pred = static_cast<int>(
            std::max_element(proba.begin(), proba.end()) - proba.begin());
        if (pred == labels[row]) ++correct;
      }
    }
    report.candidates.push_back(
        {std::string(candidates[ci]->name()),
         static_cast<double>(correct) / static_cast<double>(labels.size()), false});
  }

  // Top 3 by CV accuracy, ties by declaration order.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.candidates[a].cv_accuracy > report.candidates[b].cv_accuracy;
  });

  TrainResult result;
  result.ensemble.num_classes = num_classes;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t ci = order[i];
    report.candidates[ci].selected = true;
    auto model = candidates[ci]->make_blank();
    model->fit(features, labels, num_classes,
               derive_seed(seed, "final/" + std::string(model->name())));
    result.ensemble.members.push_back(std::move(model));
  }

  std::vector<int> predicted(labels.size());
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    predicted[i] = result.ensemble.predict(features.row(i)).argmax();
    if (predicted[i] == labels[i]) ++correct;
  }
  report.ensemble_in_sample_accuracy =
      static_cast<double>(correct) / static_cast<double>(labels.size());
  report.ensemble_macro_f1 = macro_f1(labels, predicted, num_classes);
  report.low_accuracy_warning = report.ensemble_in_sample_accuracy < 0.8;
  result.report = std::move(report);
  return result;
}

OutlierSet find_outliers(const Ensemble& ensemble, const Matrix& features,
                         std::span<const int> labels) {
  if (features.rows() != labels.size()) {
    throw std::invalid_argument("find_outliers: feature/label count mismatch");
  }
  OutlierSet out;
  out.by_domain.resize(static_cast<std::size_t>(ensemble.num_classes));
  out.predicted.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int pred = ensemble.predict(features.row(i)).argmax();
    out.predicted[i] = pred;
    if (pred != labels[i]) out.by_domain[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return out;
}

std::size_t OutlierSet::total() const {
  std::size_t n = 0;
  for (const auto& d : by_domain) n += d.size();
  return n;
}

std::vector<std::size_t> OutlierSet::counts() const {
  std::vector<std::size_t> out;
  out.reserve(by_domain.size());
  for (const auto& d : by_domain) out.push_back(d.size());
  return out;
}

void save_cv_report_json(const CvReport& report, const std::string& path) {
  json j;
  j["k_folds"] = report.k_folds;
  json cands = json::array();
  for (const auto& c : report.candidates) {
    cands.push_back({{"name", c.name}, {"cv_accuracy", c.cv_accuracy}, {"selected", c.selected}});
  }
  j["candidates"] = std::move(cands);
  j["ensemble_in_sample_accuracy"] = report.ensemble_in_sample_accuracy;
  j["ensemble_macro_f1"] = report.ensemble_macro_f1;
  j["low_accuracy_warning"] = report.low_accuracy_warning;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write CV report: " + path);
  out << j.dump(2) << "\n";
}

CvReport load_cv_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open CV report: " + path);
  json j;
  in >> j;
  CvReport report;
  report.k_folds = j.at("k_folds").get<int>();
  for (const auto& c : j.at("candidates")) {
    report.candidates.push_back({c.at("name").get<std::string>(),
                                 c.at("cv_accuracy").get<double>(),
                                 c.at("selected").get<bool>()});
  }
  report.ensemble_in_sample_accuracy = j.at("ensemble_in_sample_accuracy").get<double>();
  report.ensemble_macro_f1 = j.at("ensemble_macro_f1").get<double>();
  report.low_accuracy_warning = j.at("low_accuracy_warning").get<bool>();
  return report;
}

}  // namespace bisonet
