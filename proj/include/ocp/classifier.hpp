#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ocp/dataset.hpp"

namespace ocp {

struct FitConfig {
  int max_iters = 500;
  double tolerance = 1e-6;  // stop when the gradient sup-norm falls below this
  double ridge = 1e-6;      // L2 strength on non-intercept weights
};

struct TrainingMeta {
  int iterations = 0;
  double final_loss = 0.0;
  double grad_norm = 0.0;
  std::vector<double> loss_history;  // loss after each accepted step, first entry is the initial loss
};

// Mean ridge-regularized multinomial cross-entropy and its gradient.
// `coeffs` is row-major K x (d+1), each row [intercept, w_1..w_d]; intercepts
// are not penalized. If `grad` is nonempty it must have the same length as
// `coeffs` and receives the gradient.
double multinomial_nll(const Dataset& data, std::span<const double> coeffs, double ridge,
                       std::span<double> grad = {});

// Multinomial logistic regression over a full softmax parameterization,
// fit by gradient descent with Armijo backtracking. Features are
// standardized with training-split statistics; the constants are stored in
// the model and applied to every query, so callers always pass raw inputs.
class LogisticClassifier {
 public:
  static LogisticClassifier fit(const Dataset& train, const FitConfig& config = {});

  // Same as fit but starting from the given coefficient matrix
  // (row-major K x (d+1), in standardized feature space).
  static LogisticClassifier fit_from(const Dataset& train, const FitConfig& config,
                                     std::vector<double> initial_coeffs);

  // Posterior class probabilities; strictly positive, sums to 1.
  std::vector<double> posterior(std::span<const double> x) const;

  // Conformity score of (x, label): the estimated posterior probability of
  // `label`. Larger means more conforming.
  double score(std::span<const double> x, int label) const;

  int dimension() const { return d_; }
  int num_classes() const { return k_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const TrainingMeta& training_meta() const { return meta_; }

  nlohmann::json to_json() const;
  static LogisticClassifier from_json(const nlohmann::json& j);

 private:
  LogisticClassifier() = default;

  int d_ = 0;
  int k_ = 0;
  std::vector<double> coeffs_;        // K x (d+1), row-major
  std::vector<double> feature_mean_;  // length d
  std::vector<double> feature_scale_;
  TrainingMeta meta_;
};

}  // namespace ocp
