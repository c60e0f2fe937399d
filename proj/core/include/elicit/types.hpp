#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "elicit/errors.hpp"

namespace elicit {

/// Training data: n samples of p features with one response each.
struct Dataset {
  Eigen::MatrixXd features;   // n x p, row i = feature vector of sample i
  Eigen::VectorXd responses;  // length n
  std::optional<std::vector<std::string>> feature_names;

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index p() const { return features.cols(); }

  void validate() const {
    if (features.rows() < 1 || features.cols() < 1)
      throw ValidationError("Dataset: need at least one row and one column");
    if (features.rows() != responses.size())
      throw ValidationError("Dataset: row count does not match response count");
    if (!features.allFinite() || !responses.allFinite())
      throw ValidationError("Dataset: non-finite entry");
    if (feature_names && static_cast<Eigen::Index>(feature_names->size()) != features.cols())
      throw ValidationError("Dataset: feature name count does not match column count");
  }
};

/// Length-p weight vector. The support is derived, never stored, so it is
/// always exactly the set of nonzero coordinates.
struct WeightVector {
  Eigen::VectorXd weights;

  WeightVector() = default;
  explicit WeightVector(Eigen::VectorXd w) : weights(std::move(w)) {}
  static WeightVector zeros(Eigen::Index p) { return WeightVector(Eigen::VectorXd::Zero(p)); }

  Eigen::Index size() const { return weights.size(); }
  double operator()(Eigen::Index i) const { return weights(i); }

  std::vector<Eigen::Index> support() const {
    std::vector<Eigen::Index> s;
    for (Eigen::Index i = 0; i < weights.size(); ++i)
      if (weights(i) != 0.0) s.push_back(i);
    return s;
  }
  Eigen::Index nnz() const { return static_cast<Eigen::Index>(support().size()); }

  void validate() const {
    if (!weights.allFinite()) throw ValidationError("WeightVector: non-finite entry");
  }
};

/// Noiseless mean prediction x . w.
inline double predict(const WeightVector& w, const Eigen::VectorXd& x) {
  if (w.size() != x.size()) throw ValidationError("predict: dimension mismatch");
  return w.weights.dot(x);
}

} // namespace elicit
