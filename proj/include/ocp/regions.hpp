#pragma once

#include <string_view>
#include <vector>

#include "json.hpp"

#include "ocp/pvalues.hpp"

namespace ocp {

enum class RegionKind { interval, set };

const char* to_string(RegionKind kind);
RegionKind region_kind_from_string(std::string_view s);

// A subset of the label space 1..K. kind=interval regions are contiguous
// (or empty) by construction; kind=set regions may have gaps. An empty
// region is a valid outcome and counts as miscoverage in evaluation.
struct PredictionRegion {
  RegionKind kind = RegionKind::set;
  PValueMode mode = PValueMode::marginal;
  double alpha = 0.0;
  std::vector<int> labels;  // ascending

  bool contains(int label) const;
  bool empty() const { return labels.empty(); }
  std::size_t size() const { return labels.size(); }
};

// Ordinal Prediction Interval: the intersection of the forward and
// backward sequential acceptance sets, i.e. {y_min, ..., y_max} over the
// classes with p_y > alpha.
PredictionRegion ordinal_prediction_interval(const PValueVector& p, double alpha);

// Ordinal Prediction Set: the single-step acceptance set {y : p_y > alpha}.
PredictionRegion ordinal_prediction_set(const PValueVector& p, double alpha);

// {"labels":[...],"kind":"interval|set","mode":"marginal|conditional","alpha":...}
nlohmann::json region_to_json(const PredictionRegion& region);
PredictionRegion region_from_json(const nlohmann::json& j);

}  // namespace ocp
