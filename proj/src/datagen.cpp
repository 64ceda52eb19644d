#include "ocp/datagen.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ocp/rng.hpp"

namespace ocp {

Dataset gen_gaussian_mixture(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  using namespace gaussian_mixture;

  // Cholesky factor of the equal-correlation matrix at d=2.
  const double l21 = kCorrelation;
  const double l22 = std::sqrt(1.0 - kCorrelation * kCorrelation);

  Dataset data;
  data.d = kDim;
  data.num_classes = kNumClasses;
  data.features.reserve(n * kDim);
  data.labels.reserve(n);

  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(rng.uniform_int(1, kNumClasses));
    const bool own = rng.uniform01() < kWeightOwn;
    const int comp = own ? y : (y % kNumClasses) + 1;  // cyclic successor, 4 -> 1
    const auto& mu = kMeans[static_cast<std::size_t>(comp - 1)];
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double x[kDim] = {mu[0] + z1, mu[1] + l21 * z1 + l22 * z2};
    data.append_row(x, y);
  }
  return data;
}

Dataset gen_sparse_model(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  using namespace sparse_model;
  if (d < kMinDim) throw std::invalid_argument("sparse model requires d >= 5");

  const double shared = std::sqrt(kPairwiseCov);
  const double own = std::sqrt(1.0 - kPairwiseCov);

  Dataset data;
  data.d = d;
  data.num_classes = kNumClasses;
  data.features.reserve(n * d);
  data.labels.reserve(n);

  Rng rng(seed);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    const double z0 = rng.normal();
    double dot = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = shared * z0 + own * rng.normal();
      if (j < kBetaHead.size()) dot += kBetaHead[j] * x[j];
    }
    const double f = 1.0 / (1.0 + std::exp(-dot));
    const int y = std::min(kNumClasses, static_cast<int>(f * kNumClasses) + 1);
    data.append_row(x, y);
  }
  return data;
}

DataSplit split(const Dataset& data, const SplitSpec& spec) {
  const std::size_t total = spec.n_train + spec.n_cal + spec.n_valid;
  if (total > data.size())
    throw std::invalid_argument("split sizes exceed the number of rows");

  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(spec.seed);
  rng.shuffle(idx);

  const auto take = [&](std::size_t offset, std::size_t count) {
    Dataset part;
    part.d = data.d;
    part.num_classes = data.num_classes;
    part.features.reserve(count * data.d);
    part.labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t r = idx[offset + i];
      part.append_row(data.row(r), data.labels[r]);
    }
    return part;
  };

  DataSplit out;
  out.train = take(0, spec.n_train);
  out.cal = take(spec.n_train, spec.n_cal);
  out.valid = take(spec.n_train + spec.n_cal, spec.n_valid);
  return out;
}

}  // namespace ocp
