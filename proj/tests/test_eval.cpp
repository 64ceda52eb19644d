#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ocp/csv.hpp"
#include "ocp/eval.hpp"
#include "ocp/rng.hpp"

using ocp::EvalReport;
using ocp::evaluate;
using ocp::ExperimentConfig;
using ocp::Method;
using ocp::PredictionRegion;
using ocp::PValueMode;
using ocp::RegionKind;
using ocp::Rng;

namespace {

PredictionRegion region(std::vector<int> labels, double alpha = 0.1,
                        RegionKind kind = RegionKind::set) {
  return PredictionRegion{kind, PValueMode::marginal, alpha, std::move(labels)};
}

}  // namespace

TEST_CASE("coverage and size arithmetic") {
  const std::vector<PredictionRegion> regions{region({1, 2}), region({2}), region({3})};
  const std::vector<int> truths{1, 2, 2};
  const EvalReport r = evaluate(regions, truths, 3, 0.1, "marginal_ops");
  CHECK(r.marginal_coverage == doctest::Approx(2.0 / 3.0));
  CHECK(r.avg_size == doctest::Approx(4.0 / 3.0));
  CHECK(r.empty_region_rate == 0.0);
  CHECK(r.n_eval == 3);
  CHECK(r.method == "marginal_ops");
}

TEST_CASE("CCV matches the shortfall formula") {
  // per-class coverages 0.95, 0.85, 0.92 at alpha = 0.1 -> CCV = 0.05
  std::vector<PredictionRegion> regions;
  std::vector<int> truths;
  const auto add = [&](int y, int covered, int total) {
    for (int i = 0; i < total; ++i) {
      regions.push_back(region(i < covered ? std::vector<int>{y} : std::vector<int>{}));
      truths.push_back(y);
    }
  };
  add(1, 19, 20);  // 0.95
  add(2, 17, 20);  // 0.85
  add(3, 23, 25);  // 0.92
  const EvalReport r = evaluate(regions, truths, 3, 0.1);
  CHECK(r.per_class_coverage[0] == doctest::Approx(0.95));
  CHECK(r.per_class_coverage[1] == doctest::Approx(0.85));
  CHECK(r.per_class_coverage[2] == doctest::Approx(0.92));
  CHECK(r.ccv == doctest::Approx(0.05));
  CHECK(r.empty_region_rate == doctest::Approx(6.0 / 65.0));
}

TEST_CASE("full regions give coverage 1, size K, CCV 0") {
  std::vector<PredictionRegion> regions(10, region({1, 2, 3, 4}));
  std::vector<int> truths{1, 2, 3, 4, 1, 2, 3, 4, 1, 2};
  const EvalReport r = evaluate(regions, truths, 4, 0.1);
  CHECK(r.marginal_coverage == 1.0);
  CHECK(r.avg_size == 4.0);
  CHECK(r.ccv == 0.0);
}

TEST_CASE("classes absent from the truths are excluded from CCV") {
  const std::vector<PredictionRegion> regions{region({1}), region({2})};
  const std::vector<int> truths{1, 2};
  const EvalReport r = evaluate(regions, truths, 4, 0.1);
  CHECK(std::isnan(r.per_class_coverage[2]));
  CHECK(std::isnan(r.per_class_coverage[3]));
  CHECK(r.excluded_classes == std::vector<int>{3, 4});
  CHECK(r.ccv == 0.0);
}

TEST_CASE("evaluate validates its inputs") {
  CHECK_THROWS_AS(evaluate({region({1})}, {1, 2}, 2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({region({1})}, {5}, 2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({region({1}, 0.2)}, {1}, 2, 0.1), std::invalid_argument);
}

TEST_CASE("evaluation agrees with direct membership recomputation") {
  Rng rng(401);
  for (int iter = 0; iter < 200; ++iter) {
    const int k = static_cast<int>(rng.uniform_int(2, 6));
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 60));
    std::vector<PredictionRegion> regions;
    std::vector<int> truths;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<int> labels;
      for (int y = 1; y <= k; ++y) {
        if (rng.uniform01() < 0.5) labels.push_back(y);
      }
      regions.push_back(region(labels));
      truths.push_back(static_cast<int>(rng.uniform_int(1, k)));
    }
    const EvalReport r = evaluate(regions, truths, k, 0.1);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      bool contains = false;
      for (int y : regions[i].labels) contains = contains || y == truths[i];
      if (contains) ++hits;
    }
    REQUIRE(r.marginal_coverage ==
            static_cast<double>(hits) / static_cast<double>(n));
  }
}

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.setting.kind = ocp::SettingSpec::Kind::gaussian_mixture;
  cfg.repetitions = 2;
  cfg.n_train = 80;
  cfg.n_cal = 60;
  cfg.n_valid = 50;
  cfg.alphas = {0.1, 0.2};
  cfg.seed = 7;
  cfg.fit.max_iters = 150;
  return cfg;
}

}  // namespace

TEST_CASE("run_experiment: shapes, aggregation, subset invariant") {
  const auto result = ocp::run_experiment(small_config());
  REQUIRE(result.repetitions.size() == 2);
  REQUIRE(result.num_classes == 4);
  for (const auto& rep : result.repetitions) {
    REQUIRE(rep.reports.size() == 8);  // 4 methods x 2 alphas
    std::size_t cal_total = 0;
    for (auto c : rep.cal_class_counts) cal_total += c;
    REQUIRE(cal_total == 60);

    // avg_size(OPS) <= avg_size(OPI) for the same mode and alpha
    const auto find = [&](const char* method, double alpha) -> const ocp::EvalReport& {
      for (const auto& r : rep.reports) {
        if (r.method == method && r.alpha == alpha) return r;
      }
      FAIL("report not found");
      return rep.reports.front();
    };
    for (double alpha : {0.1, 0.2}) {
      CHECK(find("marginal_ops", alpha).avg_size <= find("marginal_opi", alpha).avg_size);
      CHECK(find("conditional_ops", alpha).avg_size <=
            find("conditional_opi", alpha).avg_size);
    }
  }

  // aggregate mean equals the arithmetic mean of the per-rep values
  for (const auto& row : result.aggregates) {
    if (row.metric != "marginal_coverage") continue;
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& rep : result.repetitions) {
      for (const auto& r : rep.reports) {
        if (r.method == row.method && r.alpha == row.alpha) {
          sum += r.marginal_coverage;
          ++count;
        }
      }
    }
    REQUIRE(count == row.count);
    REQUIRE(row.mean == doctest::Approx(sum / static_cast<double>(count)).epsilon(1e-15));
  }
}

TEST_CASE("run_experiment is deterministic, also across thread counts") {
  auto cfg = small_config();
  const auto a = ocp::run_experiment(cfg);
  const auto b = ocp::run_experiment(cfg);
  cfg.threads = 2;
  const auto c = ocp::run_experiment(cfg);

  const auto dump = [](const ocp::ExperimentResult& r) {
    std::stringstream ss;
    ocp::write_reports_jsonl(r, ss);
    ocp::write_tidy_csv(r, ss);
    ocp::write_aggregates_csv(r, ss);
    return ss.str();
  };
  const std::string sa = dump(a);
  CHECK(sa == dump(b));
  CHECK(sa == dump(c));
  CHECK(sa.find("marginal_ops") != std::string::npos);
}

TEST_CASE("run_experiment validates the configuration") {
  auto cfg = small_config();
  cfg.alphas = {1.5};
  CHECK_THROWS_AS(ocp::run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.repetitions = 0;
  CHECK_THROWS_AS(ocp::run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.methods.clear();
  CHECK_THROWS_AS(ocp::run_experiment(cfg), std::invalid_argument);
}

TEST_CASE("csv setting loads once and splits per repetition") {
  const auto path = std::string("eval_test_data.csv");
  {
    std::ofstream out(path);
    ocp::write_csv_dataset(ocp::gen_gaussian_mixture(300, 13), out);
  }
  ExperimentConfig cfg;
  cfg.setting.kind = ocp::SettingSpec::Kind::csv;
  cfg.setting.csv_path = path;
  cfg.repetitions = 2;
  cfg.n_train = 150;
  cfg.n_cal = 80;
  cfg.n_valid = 70;
  cfg.alphas = {0.1};
  cfg.fit.max_iters = 120;
  const auto result = ocp::run_experiment(cfg);
  REQUIRE(result.repetitions.size() == 2);
  // different repetitions use different splits
  CHECK(result.repetitions[0].reports.front().marginal_coverage !=
        doctest::Approx(result.repetitions[1].reports.front().marginal_coverage).epsilon(1e-12));
  std::remove(path.c_str());
}

TEST_CASE("jsonl and tidy csv formats parse back") {
  const auto result = ocp::run_experiment(small_config());
  std::stringstream jsonl;
  ocp::write_reports_jsonl(result, jsonl);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(jsonl, line)) {
    const auto j = nlohmann::json::parse(line);
    REQUIRE(j.contains("method"));
    REQUIRE(j.contains("alpha"));
    REQUIRE(j.contains("marginal_coverage"));
    REQUIRE(j.contains("ccv"));
    REQUIRE(j.contains("cal_class_counts"));
    REQUIRE(j["per_class_coverage"].size() == 4);
    ++lines;
  }
  CHECK(lines == 16);

  std::stringstream tidy;
  ocp::write_tidy_csv(result, tidy);
  std::getline(tidy, line);
  CHECK(line == "method,alpha,rep,metric,value");
  std::size_t rows = 0;
  while (std::getline(tidy, line)) ++rows;
  CHECK(rows == 16 * 8);  // 4 scalar metrics + 4 class coverages per report
}
