#include "ocp/pvalues.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ocp {

const char* to_string(PValueMode mode) {
  return mode == PValueMode::marginal ? "marginal" : "conditional";
}

PValueMode pvalue_mode_from_string(std::string_view s) {
  if (s == "marginal") return PValueMode::marginal;
  if (s == "conditional") return PValueMode::conditional;
  throw std::invalid_argument("unknown p-value mode: " + std::string(s));
}

CalibrationScores::CalibrationScores(std::vector<std::pair<double, int>> entries, int num_classes)
    : num_classes_(num_classes) {
  if (num_classes < 1) throw std::invalid_argument("num_classes must be at least 1");
  sorted_by_class_.resize(static_cast<std::size_t>(num_classes));
  sorted_all_.reserve(entries.size());
  for (const auto& [score, label] : entries) {
    if (!std::isfinite(score)) throw std::invalid_argument("non-finite conformity score");
    if (label < 1 || label > num_classes)
      throw std::invalid_argument("calibration label out of range 1..K");
    sorted_all_.push_back(score);
    sorted_by_class_[static_cast<std::size_t>(label - 1)].push_back(score);
  }
  std::sort(sorted_all_.begin(), sorted_all_.end());
  for (auto& v : sorted_by_class_) std::sort(v.begin(), v.end());
}

std::size_t CalibrationScores::class_count(int label) const {
  if (label < 1 || label > num_classes_)
    throw std::invalid_argument("label out of range 1..K");
  return sorted_by_class_[static_cast<std::size_t>(label - 1)].size();
}

std::size_t CalibrationScores::count_leq(double score) const {
  return static_cast<std::size_t>(
      std::upper_bound(sorted_all_.begin(), sorted_all_.end(), score) - sorted_all_.begin());
}

std::size_t CalibrationScores::count_leq_in_class(int label, double score) const {
  if (label < 1 || label > num_classes_)
    throw std::invalid_argument("label out of range 1..K");
  const auto& v = sorted_by_class_[static_cast<std::size_t>(label - 1)];
  return static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), score) - v.begin());
}

CalibrationScores compute_calibration_scores(const LogisticClassifier& model, const Dataset& cal) {
  std::vector<std::pair<double, int>> entries;
  entries.reserve(cal.size());
  for (std::size_t i = 0; i < cal.size(); ++i) {
    const int y = cal.labels[i];
    if (y < 1 || y > model.num_classes())
      throw std::invalid_argument("calibration label outside the model's label space");
    entries.emplace_back(model.posterior(cal.row(i))[static_cast<std::size_t>(y - 1)], y);
  }
  return CalibrationScores(std::move(entries), model.num_classes());
}

double marginal_pvalue(const CalibrationScores& cal, double test_score) {
  if (cal.total_count() == 0) throw std::invalid_argument("no calibration data");
  if (!std::isfinite(test_score)) throw std::invalid_argument("non-finite conformity score");
  const auto n = cal.total_count();
  return static_cast<double>(1 + cal.count_leq(test_score)) / static_cast<double>(n + 1);
}

double conditional_pvalue(const CalibrationScores& cal, int label, double test_score) {
  if (label < 1 || label > cal.num_classes())
    throw std::invalid_argument("label out of range 1..K");
  if (!std::isfinite(test_score)) throw std::invalid_argument("non-finite conformity score");
  const auto n_y = cal.class_count(label);
  if (n_y == 0) return 1.0;
  return static_cast<double>(1 + cal.count_leq_in_class(label, test_score)) /
         static_cast<double>(n_y + 1);
}

PValueVector pvalue_vector_from_scores(const CalibrationScores& cal,
                                       std::span<const double> test_scores, PValueMode mode) {
  if (test_scores.size() != static_cast<std::size_t>(cal.num_classes()))
    throw std::invalid_argument("test score count does not match the number of classes");
  PValueVector p;
  p.mode = mode;
  p.values.reserve(test_scores.size());
  for (int y = 1; y <= cal.num_classes(); ++y) {
    const double s = test_scores[static_cast<std::size_t>(y - 1)];
    p.values.push_back(mode == PValueMode::marginal ? marginal_pvalue(cal, s)
                                                    : conditional_pvalue(cal, y, s));
  }
  return p;
}

PValueVector pvalue_vector(const CalibrationScores& cal, const LogisticClassifier& model,
                           std::span<const double> x, PValueMode mode) {
  if (model.num_classes() != cal.num_classes())
    throw std::invalid_argument("classifier and calibration scores disagree on the number of classes");
  if (cal.total_count() == 0) throw std::invalid_argument("no calibration data");
  const std::vector<double> post = model.posterior(x);
  return pvalue_vector_from_scores(cal, post, mode);
}

}  // namespace ocp
