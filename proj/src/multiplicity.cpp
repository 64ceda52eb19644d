#include "ocp/multiplicity.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ocp {

namespace {

void check_inputs(const PValueVector& p, double alpha) {
  if (p.values.empty()) throw std::invalid_argument("empty p-value vector");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

}  // namespace

bool AcceptanceSet::contains(int label) const {
  return std::binary_search(accepted.begin(), accepted.end(), label);
}

AcceptanceSet procedure1_accept(const PValueVector& p, double alpha) {
  check_inputs(p, alpha);
  const int k = p.num_classes();
  AcceptanceSet out{TestingProcedure::forward_sequential, {}};
  for (int y = 1; y <= k; ++y) {
    if (p.values[static_cast<std::size_t>(y - 1)] > alpha) {
      // H_y accepted; testing stops and every later hypothesis is accepted untested.
      out.accepted.resize(static_cast<std::size_t>(k - y + 1));
      std::iota(out.accepted.begin(), out.accepted.end(), y);
      break;
    }
  }
  return out;
}

AcceptanceSet procedure2_accept(const PValueVector& p, double alpha) {
  check_inputs(p, alpha);
  const int k = p.num_classes();
  AcceptanceSet out{TestingProcedure::backward_sequential, {}};
  for (int y = k; y >= 1; --y) {
    if (p.values[static_cast<std::size_t>(y - 1)] > alpha) {
      out.accepted.resize(static_cast<std::size_t>(y));
      std::iota(out.accepted.begin(), out.accepted.end(), 1);
      break;
    }
  }
  return out;
}

AcceptanceSet procedure3_accept(const PValueVector& p, double alpha) {
  check_inputs(p, alpha);
  AcceptanceSet out{TestingProcedure::single_step, {}};
  for (int y = 1; y <= p.num_classes(); ++y) {
    if (p.values[static_cast<std::size_t>(y - 1)] > alpha) out.accepted.push_back(y);
  }
  return out;
}

}  // namespace ocp
