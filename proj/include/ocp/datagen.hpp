#pragma once

#include <array>
#include <cstdint>

#include "ocp/dataset.hpp"

namespace ocp {

namespace gaussian_mixture {
inline constexpr int kNumClasses = 4;
inline constexpr std::size_t kDim = 2;
inline constexpr double kWeightOwn = 0.2;   // weight of the class's own component
inline constexpr double kWeightNext = 0.8;  // weight of the cyclic successor's component
inline constexpr double kCorrelation = 0.1;
inline constexpr std::array<std::array<double, 2>, 4> kMeans{
    {{-1.0, 0.0}, {-1.0, -1.0}, {0.0, -1.0}, {1.0, -1.0}}};
}  // namespace gaussian_mixture

namespace sparse_model {
inline constexpr int kNumClasses = 4;
inline constexpr std::size_t kMinDim = 5;
inline constexpr double kPairwiseCov = 0.5;
// First five coefficients of the sigmoid direction; the rest are zero.
inline constexpr std::array<double, 5> kBetaHead{1.0, 1.0, 1.0, -1.4142135623730951, 1.0};
}  // namespace sparse_model

// Gaussian mixture setting: labels uniform on {1..4}; X | Y=k is a
// two-component normal mixture with means mu_k (weight 0.2) and mu_{k+1
// cyclically} (weight 0.8), unit variances and equal correlation 0.1.
// Per row the generator draws, in order: the label, the component
// selector, then two normals mapped through the Cholesky factor.
Dataset gen_gaussian_mixture(std::size_t n, std::uint64_t seed);

// Sparse setting: standard normal features with pairwise covariance 0.5
// via a shared factor (x_j = sqrt(0.5) z0 + sqrt(0.5) z_j); the label is
// the quartile bin of sigmoid(beta'x). Deterministic in the features.
Dataset gen_sparse_model(std::size_t n, std::size_t d, std::uint64_t seed);

struct SplitSpec {
  std::size_t n_train = 0;
  std::size_t n_cal = 0;
  std::size_t n_valid = 0;
  std::uint64_t seed = 0;
};

struct DataSplit {
  Dataset train;
  Dataset cal;
  Dataset valid;
};

// Disjoint seeded-random partition of the rows into exactly the requested
// sizes (a Fisher-Yates shuffle of the row indices, then three slices).
DataSplit split(const Dataset& data, const SplitSpec& spec);

}  // namespace ocp
