#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nnlogit/neighbors.hpp"
#include "nnlogit/subspace.hpp"
#include "nnlogit/types.hpp"

namespace nnlogit {

struct Prediction {
  int label = 0;
  /// Classifier confidence in class 1; used for ROC analysis.
  double score = 0.0;
};

/// Trainable binary predictor used by dimension selection and evaluation.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual void train(const RowMatrix& covariates, std::span<const int> labels) = 0;
  /// `query_id` keys any randomness, so a prediction does not depend on
  /// batch order.
  virtual Prediction predict(std::span<const double> query, std::uint64_t query_id) const = 0;
  virtual std::vector<Prediction> predict_batch(const RowMatrix& queries) const;
  /// A fresh, untrained classifier with the same settings.
  virtual std::unique_ptr<Classifier> clone_untrained() const = 0;
};

/// Majority vote among the k_vote nearest training points; exact ties are
/// broken by a coin keyed on (seed, query_id).
class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(std::size_t k_vote = 10, std::uint64_t seed = 0);

  void train(const RowMatrix& covariates, std::span<const int> labels) override;
  Prediction predict(std::span<const double> query, std::uint64_t query_id) const override;
  /// Parallel over queries.
  std::vector<Prediction> predict_batch(const RowMatrix& queries) const override;
  std::vector<Prediction> predict_batch_serial(const RowMatrix& queries) const;
  std::unique_ptr<Classifier> clone_untrained() const override;

  std::size_t k_vote() const { return k_vote_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t k_vote_;
  std::uint64_t seed_;
  std::optional<NeighborIndex> index_;
  Labels labels_;
};

/// Fraction of positions where predicted and truth disagree.
double misclassification_risk(std::span<const int> predicted, std::span<const int> truth);

/// Area under the ROC curve in Mann-Whitney form; tied scores count 1/2.
double roc_auc(std::span<const double> scores, std::span<const int> truth);

/// Coordinates of each row in the top-d eigenvectors. With d == p the raw
/// covariates are returned (the projector is the identity).
RowMatrix project(const RowMatrix& covariates, const SubspaceModel& model, std::size_t d);

/// Coordinates in an arbitrary orthonormal basis.
RowMatrix project_onto(const RowMatrix& covariates, const Matrix& basis);

std::vector<int> labels_of(std::span<const Prediction> predictions);
std::vector<double> scores_of(std::span<const Prediction> predictions);

}  // namespace nnlogit
