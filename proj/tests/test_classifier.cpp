#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ocp/classifier.hpp"
#include "ocp/rng.hpp"

using ocp::Dataset;
using ocp::FitConfig;
using ocp::LogisticClassifier;
using ocp::multinomial_nll;
using ocp::Rng;

namespace {

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d, int k) {
  Dataset data;
  data.d = d;
  data.num_classes = k;
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.normal();
    data.append_row(x, static_cast<int>(rng.uniform_int(1, k)));
  }
  return data;
}

}  // namespace

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(301);
  for (int fixture = 0; fixture < 5; ++fixture) {
    const std::size_t d = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const int k = static_cast<int>(rng.uniform_int(2, 4));
    const Dataset data = random_dataset(rng, 25, d, k);

    std::vector<double> w(static_cast<std::size_t>(k) * (d + 1));
    for (auto& v : w) v = rng.normal();
    std::vector<double> grad(w.size());
    multinomial_nll(data, w, 0.05, grad);

    const double h = 1e-5;
    for (std::size_t j = 0; j < w.size(); ++j) {
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      const double fd = (multinomial_nll(data, wp, 0.05) - multinomial_nll(data, wm, 0.05)) /
                        (2.0 * h);
      const double denom = std::max({std::abs(grad[j]), std::abs(fd), 1e-6});
      REQUIRE(std::abs(fd - grad[j]) / denom <= 1e-5);
    }
  }
}

TEST_CASE("separable two-class toy reaches training accuracy 1") {
  Dataset data;
  data.d = 2;
  data.num_classes = 2;
  const double xs[4][2] = {{-1.0, -1.0}, {-2.0, 0.5}, {1.0, 1.0}, {2.0, -0.5}};
  const int ys[4] = {1, 1, 2, 2};
  for (int i = 0; i < 4; ++i) data.append_row(xs[i], ys[i]);

  const auto model = LogisticClassifier::fit(data);
  for (int i = 0; i < 4; ++i) {
    const auto post = model.posterior(data.row(static_cast<std::size_t>(i)));
    const int argmax =
        static_cast<int>(std::max_element(post.begin(), post.end()) - post.begin()) + 1;
    REQUIRE(argmax == ys[i]);
  }
}

TEST_CASE("fit rejects degenerate input") {
  Dataset empty;
  empty.d = 1;
  CHECK_THROWS_AS(LogisticClassifier::fit(empty), std::invalid_argument);

  Dataset single;
  single.d = 1;
  single.num_classes = 2;
  const double x0[1] = {0.5}, x1[1] = {1.5};
  single.append_row(x0, 1);
  single.append_row(x1, 1);
  CHECK_THROWS_AS(LogisticClassifier::fit(single), std::invalid_argument);

  Dataset bad;
  bad.d = 1;
  bad.num_classes = 2;
  const double nan_x[1] = {std::nan("")};
  bad.append_row(x0, 1);
  bad.append_row(nan_x, 2);
  CHECK_THROWS_AS(LogisticClassifier::fit(bad), std::invalid_argument);
}

TEST_CASE("posterior is a strict probability vector") {
  Rng rng(302);
  const Dataset data = random_dataset(rng, 80, 3, 4);
  const auto model = LogisticClassifier::fit(data);
  std::vector<double> x(3);
  for (int iter = 0; iter < 200; ++iter) {
    for (auto& v : x) v = 3.0 * rng.normal();
    const auto post = model.posterior(x);
    REQUIRE(post.size() == 4);
    double sum = 0.0;
    for (double p : post) {
      REQUIRE(p > 0.0);
      REQUIRE(p < 1.0);
      sum += p;
    }
    REQUIRE(std::abs(sum - 1.0) <= 1e-12);
    // score is the posterior entry of the label, and the scores sum to 1
    double score_sum = 0.0;
    for (int y = 1; y <= 4; ++y) {
      REQUIRE(model.score(x, y) == post[static_cast<std::size_t>(y - 1)]);
      score_sum += model.score(x, y);
    }
    REQUIRE(std::abs(score_sum - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(model.posterior(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(model.score(x, 0), std::invalid_argument);
  CHECK_THROWS_AS(model.score(x, 5), std::invalid_argument);
}

TEST_CASE("zero coefficients give the uniform posterior") {
  nlohmann::json j{{"d", 2},
                   {"k", 4},
                   {"coefficients", std::vector<double>(12, 0.0)},
                   {"feature_mean", {0.0, 0.0}},
                   {"feature_scale", {1.0, 1.0}}};
  const auto model = LogisticClassifier::from_json(j);
  const auto post = model.posterior(std::vector<double>{3.0, -7.0});
  for (double p : post) CHECK(p == 0.25);
}

TEST_CASE("two classes reduce to a sigmoid of the score difference") {
  nlohmann::json j{{"d", 1},
                   {"k", 2},
                   {"coefficients", {0.2, 1.5, -0.4, 0.7}},
                   {"feature_mean", {0.0}},
                   {"feature_scale", {1.0}}};
  const auto model = LogisticClassifier::from_json(j);
  for (double x : {-2.0, -0.3, 0.0, 1.1, 4.0}) {
    const double z1 = 0.2 + 1.5 * x;
    const double z2 = -0.4 + 0.7 * x;
    const auto post = model.posterior(std::vector<double>{x});
    CHECK(post[0] == doctest::Approx(1.0 / (1.0 + std::exp(z2 - z1))).epsilon(1e-12));
  }
}

TEST_CASE("posterior matches an independent softmax computation") {
  nlohmann::json j{{"d", 2},
                   {"k", 3},
                   {"coefficients", {0.3, 1.0, -0.5, -0.2, -1.0, 0.25, 0.0, 0.5, 0.75}},
                   {"feature_mean", {0.1, -0.2}},
                   {"feature_scale", {2.0, 0.5}}};
  const auto model = LogisticClassifier::from_json(j);
  const double x1 = 0.9, x2 = -1.3;
  const double s1 = (x1 - 0.1) / 2.0, s2 = (x2 + 0.2) / 0.5;
  const double z[3] = {0.3 + 1.0 * s1 - 0.5 * s2, -0.2 - 1.0 * s1 + 0.25 * s2,
                       0.0 + 0.5 * s1 + 0.75 * s2};
  const double denom = std::exp(z[0]) + std::exp(z[1]) + std::exp(z[2]);
  const auto post = model.posterior(std::vector<double>{x1, x2});
  for (int c = 0; c < 3; ++c)
    CHECK(post[static_cast<std::size_t>(c)] ==
          doctest::Approx(std::exp(z[c]) / denom).epsilon(1e-12));
}

TEST_CASE("loss never increases along the optimization path") {
  Rng rng(303);
  const Dataset data = random_dataset(rng, 120, 4, 3);
  const auto model = LogisticClassifier::fit(data);
  const auto& history = model.training_meta().loss_history;
  REQUIRE(history.size() > 2);
  for (std::size_t i = 1; i < history.size(); ++i) REQUIRE(history[i] <= history[i - 1]);
}

TEST_CASE("ridge makes the optimum unique across starting points") {
  Rng rng(304);
  const Dataset data = random_dataset(rng, 60, 2, 3);
  FitConfig cfg;
  cfg.ridge = 0.05;
  cfg.tolerance = 1e-10;
  cfg.max_iters = 5000;
  const auto from_zero = LogisticClassifier::fit(data, cfg);
  std::vector<double> init(9);
  for (auto& v : init) v = rng.normal();
  const auto from_random = LogisticClassifier::fit_from(data, cfg, init);

  std::vector<double> x(2);
  for (int iter = 0; iter < 50; ++iter) {
    for (auto& v : x) v = 2.0 * rng.normal();
    const auto p0 = from_zero.posterior(x);
    const auto p1 = from_random.posterior(x);
    for (std::size_t c = 0; c < p0.size(); ++c) REQUIRE(std::abs(p0[c] - p1[c]) < 1e-3);
  }
}

TEST_CASE("fit is deterministic and persists exactly through JSON") {
  Rng rng(305);
  const Dataset data = random_dataset(rng, 100, 3, 4);
  const auto a = LogisticClassifier::fit(data);
  const auto b = LogisticClassifier::fit(data);
  CHECK(a.coefficients() == b.coefficients());

  const auto restored = LogisticClassifier::from_json(a.to_json());
  std::vector<double> x(3);
  for (int iter = 0; iter < 50; ++iter) {
    for (auto& v : x) v = rng.normal();
    REQUIRE(restored.posterior(x) == a.posterior(x));
  }
}
