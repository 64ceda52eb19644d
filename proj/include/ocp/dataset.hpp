#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ocp {

// Feature matrix plus ordinal labels. Labels are 1-based and live in
// 1..num_classes; num_classes is the size of the full label space, which
// may exceed the set of labels actually present in a given split.
struct Dataset {
  std::size_t d = 0;
  int num_classes = 0;
  std::vector<double> features;  // row-major, size() * d
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * d, d);
  }

  void append_row(std::span<const double> x, int label) {
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
  }
};

}  // namespace ocp
