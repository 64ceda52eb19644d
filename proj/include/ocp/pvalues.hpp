#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "ocp/classifier.hpp"
#include "ocp/dataset.hpp"

namespace ocp {

enum class PValueMode { marginal, conditional };

const char* to_string(PValueMode mode);
PValueMode pvalue_mode_from_string(std::string_view s);

// Calibration conformity scores, indexed for O(log n) rank queries pooled
// across classes and restricted to one class. The score convention is
// "larger = more conforming": a p-value counts calibration scores <= the
// test score, so ties count in favor of the candidate label and a high
// posterior yields a high p-value.
class CalibrationScores {
 public:
  // entries are (score, label) pairs with labels in 1..num_classes.
  CalibrationScores(std::vector<std::pair<double, int>> entries, int num_classes);

  std::size_t total_count() const { return sorted_all_.size(); }         // n
  std::size_t class_count(int label) const;                              // n_y
  int num_classes() const { return num_classes_; }

  std::size_t count_leq(double score) const;
  std::size_t count_leq_in_class(int label, double score) const;

 private:
  int num_classes_ = 0;
  std::vector<double> sorted_all_;
  std::vector<std::vector<double>> sorted_by_class_;
};

// Scores the calibration split with the fitted classifier: entry i is
// (posterior probability of the true label, true label).
CalibrationScores compute_calibration_scores(const LogisticClassifier& model, const Dataset& cal);

// Marginal conformal p-value: (1 + #{i : s_i <= test_score}) / (n + 1),
// pooling all n calibration scores. Ranges over {1/(n+1), ..., 1}.
double marginal_pvalue(const CalibrationScores& cal, double test_score);

// Class-conditional conformal p-value for `label`:
// (1 + #{i in I_label : s_i <= test_score}) / (n_label + 1). A class with
// no calibration observations gets p = 1, so it can never be rejected.
double conditional_pvalue(const CalibrationScores& cal, int label, double test_score);

struct PValueVector {
  PValueMode mode = PValueMode::marginal;
  std::vector<double> values;  // values[y-1] is the p-value for class y

  int num_classes() const { return static_cast<int>(values.size()); }
};

// One p-value per class from precomputed test scores (test_scores[y-1] is
// the conformity score of the test input paired with class y).
PValueVector pvalue_vector_from_scores(const CalibrationScores& cal,
                                       std::span<const double> test_scores, PValueMode mode);

// Scores the test input against every class with the classifier, then
// applies marginal_pvalue or conditional_pvalue per `mode`.
PValueVector pvalue_vector(const CalibrationScores& cal, const LogisticClassifier& model,
                           std::span<const double> x, PValueMode mode);

}  // namespace ocp
