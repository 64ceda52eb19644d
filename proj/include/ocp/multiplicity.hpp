#pragma once

#include <vector>

#include "ocp/pvalues.hpp"

namespace ocp {

enum class TestingProcedure { forward_sequential, backward_sequential, single_step };

// Accepted class labels of one FWER-controlling procedure over the K
// per-class hypotheses H_y : "the test label is y". Rejection uses p <= alpha;
// acceptance is strict p > alpha.
struct AcceptanceSet {
  TestingProcedure procedure;
  std::vector<int> accepted;  // ascending labels

  bool contains(int label) const;
};

// Tests H_1, H_2, ... in class order and stops at the first acceptance;
// the result is the suffix {y_min, ..., K} with
// y_min = min{y : p_y > alpha}, or empty if every hypothesis is rejected.
AcceptanceSet procedure1_accept(const PValueVector& p, double alpha);

// Tests H_K, H_{K-1}, ... in reverse order; the result is the prefix
// {1, ..., y_max} with y_max = max{y : p_y > alpha}, or empty.
AcceptanceSet procedure2_accept(const PValueVector& p, double alpha);

// Single-step procedure with common critical value alpha:
// accepts exactly {y : p_y > alpha}.
AcceptanceSet procedure3_accept(const PValueVector& p, double alpha);

}  // namespace ocp
