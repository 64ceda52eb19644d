#include "ocp/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace ocp {

namespace {

void check_finite_features(const Dataset& data) {
  for (double v : data.features) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  }
}

int infer_num_classes(const Dataset& data) {
  int k = data.num_classes;
  for (int y : data.labels) {
    if (y < 1) throw std::invalid_argument("labels must be 1-based");
    k = std::max(k, y);
  }
  return k;
}

// Softmax with max subtraction, in place over `z`.
void softmax_inplace(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

}  // namespace

double multinomial_nll(const Dataset& data, std::span<const double> coeffs, double ridge,
                       std::span<double> grad) {
  const std::size_t n = data.size();
  const std::size_t d = data.d;
  const int k = data.num_classes;
  const std::size_t width = d + 1;
  if (coeffs.size() != static_cast<std::size_t>(k) * width)
    throw std::invalid_argument("coefficient size does not match K x (d+1)");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    if (grad.size() != coeffs.size())
      throw std::invalid_argument("gradient size does not match coefficients");
    std::fill(grad.begin(), grad.end(), 0.0);
  }

  std::vector<double> z(static_cast<std::size_t>(k));
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.row(i);
    for (int c = 0; c < k; ++c) {
      const double* w = coeffs.data() + static_cast<std::size_t>(c) * width;
      double acc = w[0];
      for (std::size_t j = 0; j < d; ++j) acc += w[j + 1] * x[j];
      z[static_cast<std::size_t>(c)] = acc;
    }
    softmax_inplace(z);
    const int y = data.labels[i] - 1;
    loss -= std::log(std::max(z[static_cast<std::size_t>(y)], 1e-300));
    if (want_grad) {
      for (int c = 0; c < k; ++c) {
        const double resid = z[static_cast<std::size_t>(c)] - (c == y ? 1.0 : 0.0);
        double* g = grad.data() + static_cast<std::size_t>(c) * width;
        g[0] += resid;
        for (std::size_t j = 0; j < d; ++j) g[j + 1] += resid * x[j];
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  if (want_grad) {
    for (double& g : grad) g *= inv_n;
  }
  // Ridge on non-intercept weights.
  for (int c = 0; c < k; ++c) {
    const double* w = coeffs.data() + static_cast<std::size_t>(c) * width;
    for (std::size_t j = 1; j < width; ++j) {
      loss += 0.5 * ridge * w[j] * w[j];
      if (want_grad) grad[static_cast<std::size_t>(c) * width + j] += ridge * w[j];
    }
  }
  return loss;
}

LogisticClassifier LogisticClassifier::fit(const Dataset& train, const FitConfig& config) {
  const int k = infer_num_classes(train);
  const std::size_t width = train.d + 1;
  return fit_from(train, config,
                  std::vector<double>(static_cast<std::size_t>(k) * width, 0.0));
}

LogisticClassifier LogisticClassifier::fit_from(const Dataset& train, const FitConfig& config,
                                                std::vector<double> initial_coeffs) {
  if (train.size() == 0) throw std::invalid_argument("empty training data");
  check_finite_features(train);
  const int k = infer_num_classes(train);
  if (std::set<int>(train.labels.begin(), train.labels.end()).size() < 2)
    throw std::invalid_argument("training data must contain at least two distinct classes");
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be positive");

  const std::size_t n = train.size();
  const std::size_t d = train.d;
  const std::size_t width = d + 1;
  if (initial_coeffs.size() != static_cast<std::size_t>(k) * width)
    throw std::invalid_argument("initial coefficients do not match K x (d+1)");

  LogisticClassifier model;
  model.d_ = static_cast<int>(d);
  model.k_ = k;
  model.feature_mean_.assign(d, 0.0);
  model.feature_scale_.assign(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += train.features[i * d + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = train.features[i * d + j] - mean;
      var += c * c;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.feature_mean_[j] = mean;
    model.feature_scale_[j] = sd > 1e-12 ? sd : 1.0;
  }

  Dataset std_train;
  std_train.d = d;
  std_train.num_classes = k;
  std_train.labels = train.labels;
  std_train.features.resize(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      std_train.features[i * d + j] =
          (train.features[i * d + j] - model.feature_mean_[j]) / model.feature_scale_[j];

  std::vector<double> w = std::move(initial_coeffs);
  std::vector<double> grad(w.size(), 0.0);
  std::vector<double> w_try(w.size(), 0.0);

  double loss = multinomial_nll(std_train, w, config.ridge, grad);
  TrainingMeta meta;
  meta.loss_history.push_back(loss);
  double step = 1.0;
  int iter = 0;
  for (; iter < config.max_iters; ++iter) {
    double grad_inf = 0.0;
    double grad_sq = 0.0;
    for (double g : grad) {
      grad_inf = std::max(grad_inf, std::abs(g));
      grad_sq += g * g;
    }
    if (grad_inf <= config.tolerance) break;

    step = std::min(1.0, step * 4.0);
    bool accepted = false;
    while (step > 1e-18) {
      for (std::size_t t = 0; t < w.size(); ++t) w_try[t] = w[t] - step * grad[t];
      const double loss_try = multinomial_nll(std_train, w_try, config.ridge);
      if (loss_try <= loss - 1e-4 * step * grad_sq) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow, nothing further to gain

    w.swap(w_try);
    loss = multinomial_nll(std_train, w, config.ridge, grad);
    meta.loss_history.push_back(loss);
  }

  meta.iterations = iter;
  meta.final_loss = loss;
  double grad_inf = 0.0;
  for (double g : grad) grad_inf = std::max(grad_inf, std::abs(g));
  meta.grad_norm = grad_inf;

  model.coeffs_ = std::move(w);
  model.meta_ = std::move(meta);
  return model;
}

std::vector<double> LogisticClassifier::posterior(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(d_))
    throw std::invalid_argument("feature dimension mismatch");
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  }
  const std::size_t width = static_cast<std::size_t>(d_) + 1;
  std::vector<double> z(static_cast<std::size_t>(k_));
  for (int c = 0; c < k_; ++c) {
    const double* w = coeffs_.data() + static_cast<std::size_t>(c) * width;
    double acc = w[0];
    for (int j = 0; j < d_; ++j)
      acc += w[j + 1] * (x[static_cast<std::size_t>(j)] - feature_mean_[static_cast<std::size_t>(j)]) /
             feature_scale_[static_cast<std::size_t>(j)];
    z[static_cast<std::size_t>(c)] = acc;
  }
  softmax_inplace(z);
  return z;
}

double LogisticClassifier::score(std::span<const double> x, int label) const {
  if (label < 1 || label > k_) throw std::invalid_argument("label out of range");
  return posterior(x)[static_cast<std::size_t>(label - 1)];
}

nlohmann::json LogisticClassifier::to_json() const {
  return nlohmann::json{
      {"d", d_},
      {"k", k_},
      {"coefficients", coeffs_},
      {"feature_mean", feature_mean_},
      {"feature_scale", feature_scale_},
      {"training", {{"iterations", meta_.iterations}, {"final_loss", meta_.final_loss}}}};
}

LogisticClassifier LogisticClassifier::from_json(const nlohmann::json& j) {
  LogisticClassifier model;
  model.d_ = j.at("d").get<int>();
  model.k_ = j.at("k").get<int>();
  model.coeffs_ = j.at("coefficients").get<std::vector<double>>();
  model.feature_mean_ = j.at("feature_mean").get<std::vector<double>>();
  model.feature_scale_ = j.at("feature_scale").get<std::vector<double>>();
  if (model.d_ < 0 || model.k_ < 1) throw std::invalid_argument("invalid model dimensions");
  const auto width = static_cast<std::size_t>(model.d_) + 1;
  if (model.coeffs_.size() != static_cast<std::size_t>(model.k_) * width)
    throw std::invalid_argument("coefficient size does not match K x (d+1)");
  if (model.feature_mean_.size() != static_cast<std::size_t>(model.d_) ||
      model.feature_scale_.size() != static_cast<std::size_t>(model.d_))
    throw std::invalid_argument("standardization constants do not match dimension");
  for (double v : model.coeffs_) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite coefficient");
  }
  if (j.contains("training")) {
    model.meta_.iterations = j["training"].value("iterations", 0);
    model.meta_.final_loss = j["training"].value("final_loss", 0.0);
  }
  return model;
}

}  // namespace ocp
