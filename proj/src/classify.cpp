#include "nnlogit/classify.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "nnlogit/rng.hpp"

namespace nnlogit {

std::vector<Prediction> Classifier::predict_batch(const RowMatrix& queries) const {
  std::vector<Prediction> out(static_cast<std::size_t>(queries.rows()));
  const auto p = static_cast<std::size_t>(queries.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = predict({queries.data() + i * p, p}, i);
  }
  return out;
}

KnnClassifier::KnnClassifier(std::size_t k_vote, std::uint64_t seed)
    : k_vote_(k_vote), seed_(seed) {
  if (k_vote_ == 0) throw std::invalid_argument("KnnClassifier: k_vote must be at least 1");
}

void KnnClassifier::train(const RowMatrix& covariates, std::span<const int> labels) {
  if (covariates.rows() == 0) throw std::invalid_argument("KnnClassifier: empty training set");
  if (static_cast<std::size_t>(covariates.rows()) != labels.size()) {
    throw std::invalid_argument("KnnClassifier: label count mismatch");
  }
  index_.emplace(covariates);
  labels_.assign(labels.begin(), labels.end());
}

Prediction KnnClassifier::predict(std::span<const double> query, std::uint64_t query_id) const {
  if (!index_) throw std::logic_error("KnnClassifier: predict before train");
  const std::size_t k = std::min(k_vote_, index_->size());
  const NeighborSet nb = index_->k_nearest(query, k);
  std::size_t votes = 0;
  for (std::size_t i : nb.indices) votes += static_cast<std::size_t>(labels_[i]);

  Prediction out;
  out.score = static_cast<double>(votes) / static_cast<double>(k);
  if (2 * votes > k) {
    out.label = 1;
  } else if (2 * votes < k) {
    out.label = 0;
  } else {
    RandomStream coin(seed_, {stream_tag::vote_ties, query_id});
    out.label = static_cast<int>(coin.next_u64() >> 63);
  }
  return out;
}

std::vector<Prediction> KnnClassifier::predict_batch(const RowMatrix& queries) const {
  if (!index_) throw std::logic_error("KnnClassifier: predict before train");
  if (static_cast<std::size_t>(queries.cols()) != index_->dim()) {
    throw std::invalid_argument("KnnClassifier: query dimension mismatch");
  }
  if (!queries.allFinite()) throw std::invalid_argument("KnnClassifier: non-finite query");
  const auto n = static_cast<std::ptrdiff_t>(queries.rows());
  const auto p = static_cast<std::size_t>(queries.cols());
  std::vector<Prediction> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = predict({queries.data() + u * p, p}, u);
  }
  return out;
}

std::vector<Prediction> KnnClassifier::predict_batch_serial(const RowMatrix& queries) const {
  return Classifier::predict_batch(queries);
}

std::unique_ptr<Classifier> KnnClassifier::clone_untrained() const {
  return std::make_unique<KnnClassifier>(k_vote_, seed_);
}

double misclassification_risk(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("misclassification_risk: length mismatch");
  }
  if (truth.empty()) throw std::invalid_argument("misclassification_risk: empty input");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw std::invalid_argument("roc_auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks of the positives.
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t stop = start;
    while (stop < n && scores[order[stop]] == scores[order[start]]) ++stop;
    const double midrank = 0.5 * static_cast<double>(start + stop + 1);
    for (std::size_t t = start; t < stop; ++t) {
      if (truth[order[t]] == 1) {
        rank_sum += midrank;
        ++positives;
      }
    }
    start = stop;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) throw std::invalid_argument("roc_auc: single-class truth");
  const double np = static_cast<double>(positives);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(negatives));
}

RowMatrix project_onto(const RowMatrix& covariates, const Matrix& basis) {
  if (covariates.cols() != basis.rows()) {
    throw std::invalid_argument("project: dimension mismatch");
  }
  return covariates * basis;
}

RowMatrix project(const RowMatrix& covariates, const SubspaceModel& model, std::size_t d) {
  if (d == 0 || d > model.p()) throw std::out_of_range("project: dimension out of range");
  if (static_cast<std::size_t>(covariates.cols()) != model.p()) {
    throw std::invalid_argument("project: dimension mismatch");
  }
  if (d == model.p()) return covariates;
  return project_onto(covariates, model.leading(d));
}

std::vector<int> labels_of(std::span<const Prediction> predictions) {
  std::vector<int> out(predictions.size());
  std::transform(predictions.begin(), predictions.end(), out.begin(),
                 [](const Prediction& p) { return p.label; });
  return out;
}

std::vector<double> scores_of(std::span<const Prediction> predictions) {
  std::vector<double> out(predictions.size());
  std::transform(predictions.begin(), predictions.end(), out.begin(),
                 [](const Prediction& p) { return p.score; });
  return out;
}

}  // namespace nnlogit
