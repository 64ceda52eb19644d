#include "ocp/eval.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ocp/csv.hpp"
#include "ocp/pvalues.hpp"
#include "ocp/rng.hpp"

namespace ocp {

const char* to_string(Method m) {
  switch (m) {
    case Method::marginal_opi: return "marginal_opi";
    case Method::conditional_opi: return "conditional_opi";
    case Method::marginal_ops: return "marginal_ops";
    case Method::conditional_ops: return "conditional_ops";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (Method m : kAllMethods) {
    if (s == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + std::string(s));
}

PValueMode method_mode(Method m) {
  return (m == Method::marginal_opi || m == Method::marginal_ops) ? PValueMode::marginal
                                                                  : PValueMode::conditional;
}

RegionKind method_kind(Method m) {
  return (m == Method::marginal_opi || m == Method::conditional_opi) ? RegionKind::interval
                                                                     : RegionKind::set;
}

EvalReport evaluate(const std::vector<PredictionRegion>& regions, const std::vector<int>& truths,
                    int num_classes, double alpha, std::string method) {
  if (regions.size() != truths.size())
    throw std::invalid_argument("regions and truths differ in length");
  if (num_classes < 1) throw std::invalid_argument("num_classes must be at least 1");

  EvalReport report;
  report.method = std::move(method);
  report.alpha = alpha;
  report.n_eval = truths.size();
  report.per_class_coverage.assign(static_cast<std::size_t>(num_classes),
                                   std::numeric_limits<double>::quiet_NaN());
  report.class_counts.assign(static_cast<std::size_t>(num_classes), 0);

  std::vector<std::size_t> covered(static_cast<std::size_t>(num_classes), 0);
  std::size_t hits = 0;
  std::size_t empties = 0;
  double total_size = 0.0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& region = regions[i];
    if (region.alpha != alpha)
      throw std::invalid_argument("region alpha does not match the evaluation alpha");
    const int y = truths[i];
    if (y < 1 || y > num_classes) throw std::invalid_argument("truth label out of range 1..K");
    total_size += static_cast<double>(region.size());
    if (region.empty()) ++empties;
    ++report.class_counts[static_cast<std::size_t>(y - 1)];
    if (region.contains(y)) {
      ++hits;
      ++covered[static_cast<std::size_t>(y - 1)];
    }
  }

  const auto n = static_cast<double>(truths.size());
  report.marginal_coverage = n > 0 ? static_cast<double>(hits) / n : 0.0;
  report.avg_size = n > 0 ? total_size / n : 0.0;
  report.empty_region_rate = n > 0 ? static_cast<double>(empties) / n : 0.0;

  double ccv = 0.0;
  for (int y = 1; y <= num_classes; ++y) {
    const auto count = report.class_counts[static_cast<std::size_t>(y - 1)];
    if (count == 0) {
      report.excluded_classes.push_back(y);
      continue;
    }
    const double p_y = static_cast<double>(covered[static_cast<std::size_t>(y - 1)]) /
                       static_cast<double>(count);
    report.per_class_coverage[static_cast<std::size_t>(y - 1)] = p_y;
    ccv = std::max(ccv, (1.0 - alpha) - p_y);
  }
  report.ccv = std::max(ccv, 0.0);
  return report;
}

namespace {

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (cfg.methods.empty()) throw std::invalid_argument("no methods selected");
  if (cfg.alphas.empty()) throw std::invalid_argument("no alpha levels given");
  for (double a : cfg.alphas) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  if (cfg.n_train == 0 || cfg.n_cal == 0 || cfg.n_valid == 0)
    throw std::invalid_argument("split sizes must be positive");
}

Dataset make_dataset(const ExperimentConfig& cfg, const Dataset* csv_data, std::uint64_t seed) {
  const std::size_t n = cfg.n_train + cfg.n_cal + cfg.n_valid;
  switch (cfg.setting.kind) {
    case SettingSpec::Kind::gaussian_mixture: return gen_gaussian_mixture(n, seed);
    case SettingSpec::Kind::sparse: return gen_sparse_model(n, cfg.setting.dim, seed);
    case SettingSpec::Kind::csv: return *csv_data;
  }
  throw std::logic_error("unreachable setting kind");
}

RepetitionResult run_repetition(const ExperimentConfig& cfg, const Dataset* csv_data, int rep) {
  const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
  const Dataset data = make_dataset(cfg, csv_data, derive_seed(rep_seed, 0));
  const DataSplit parts =
      split(data, SplitSpec{cfg.n_train, cfg.n_cal, cfg.n_valid, derive_seed(rep_seed, 1)});

  const LogisticClassifier model = LogisticClassifier::fit(parts.train, cfg.fit);
  const CalibrationScores cal = compute_calibration_scores(model, parts.cal);
  const int k = model.num_classes();

  RepetitionResult result;
  result.rep = rep;
  result.cal_class_counts.resize(static_cast<std::size_t>(k));
  for (int y = 1; y <= k; ++y)
    result.cal_class_counts[static_cast<std::size_t>(y - 1)] = cal.class_count(y);

  bool need_marginal = false;
  bool need_conditional = false;
  for (Method m : cfg.methods) {
    (method_mode(m) == PValueMode::marginal ? need_marginal : need_conditional) = true;
  }

  const std::size_t n_methods = cfg.methods.size();
  const std::size_t n_alphas = cfg.alphas.size();
  std::vector<std::vector<PredictionRegion>> regions(n_methods * n_alphas);
  for (auto& v : regions) v.reserve(parts.valid.size());

  for (std::size_t i = 0; i < parts.valid.size(); ++i) {
    const std::vector<double> post = model.posterior(parts.valid.row(i));
    PValueVector p_marginal, p_conditional;
    if (need_marginal) p_marginal = pvalue_vector_from_scores(cal, post, PValueMode::marginal);
    if (need_conditional)
      p_conditional = pvalue_vector_from_scores(cal, post, PValueMode::conditional);
    for (std::size_t m = 0; m < n_methods; ++m) {
      const Method method = cfg.methods[m];
      const PValueVector& p =
          method_mode(method) == PValueMode::marginal ? p_marginal : p_conditional;
      for (std::size_t a = 0; a < n_alphas; ++a) {
        auto& bucket = regions[m * n_alphas + a];
        bucket.push_back(method_kind(method) == RegionKind::interval
                             ? ordinal_prediction_interval(p, cfg.alphas[a])
                             : ordinal_prediction_set(p, cfg.alphas[a]));
      }
    }
  }

  for (std::size_t m = 0; m < n_methods; ++m)
    for (std::size_t a = 0; a < n_alphas; ++a)
      result.reports.push_back(evaluate(regions[m * n_alphas + a], parts.valid.labels, k,
                                        cfg.alphas[a], to_string(cfg.methods[m])));
  return result;
}

struct MeanSe {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  std::size_t count = 0;
};

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe out;
  out.count = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    out.se = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return out;
}

void aggregate(ExperimentResult& result, const ExperimentConfig& cfg) {
  for (Method method : cfg.methods) {
    for (double alpha : cfg.alphas) {
      std::vector<double> coverage, size, ccv, empty_rate;
      std::vector<std::vector<double>> class_cov(static_cast<std::size_t>(result.num_classes));
      for (const auto& rep : result.repetitions) {
        for (const auto& report : rep.reports) {
          if (report.method != to_string(method) || report.alpha != alpha) continue;
          coverage.push_back(report.marginal_coverage);
          size.push_back(report.avg_size);
          ccv.push_back(report.ccv);
          empty_rate.push_back(report.empty_region_rate);
          for (int y = 1; y <= result.num_classes; ++y) {
            const double p = report.per_class_coverage[static_cast<std::size_t>(y - 1)];
            if (!std::isnan(p)) class_cov[static_cast<std::size_t>(y - 1)].push_back(p);
          }
        }
      }
      const auto push = [&](const std::string& metric, const std::vector<double>& values) {
        const MeanSe ms = mean_se(values);
        result.aggregates.push_back(
            AggregateRow{to_string(method), alpha, metric, ms.mean, ms.se, ms.count});
      };
      push("marginal_coverage", coverage);
      push("avg_size", size);
      push("ccv", ccv);
      push("empty_region_rate", empty_rate);
      for (int y = 1; y <= result.num_classes; ++y)
        push("class_coverage_" + std::to_string(y), class_cov[static_cast<std::size_t>(y - 1)]);
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  Dataset csv_data;
  const Dataset* csv_ptr = nullptr;
  if (cfg.setting.kind == SettingSpec::Kind::csv) {
    csv_data = read_csv_dataset(cfg.setting.csv_path);
    csv_ptr = &csv_data;
  }

  ExperimentResult result;
  result.repetitions.resize(static_cast<std::size_t>(cfg.repetitions));

  const int threads = std::max(1, std::min(cfg.threads, cfg.repetitions));
  std::atomic<int> next_rep{0};
  std::mutex error_mutex;
  std::string first_error;

  const auto worker = [&]() {
    for (;;) {
      const int rep = next_rep.fetch_add(1);
      if (rep >= cfg.repetitions) return;
      try {
        result.repetitions[static_cast<std::size_t>(rep)] = run_repetition(cfg, csv_ptr, rep);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty())
          first_error = "repetition " + std::to_string(rep) + ": " + e.what();
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!first_error.empty()) throw std::runtime_error(first_error);

  result.num_classes = static_cast<int>(result.repetitions.front().cal_class_counts.size());
  aggregate(result, cfg);
  return result;
}

namespace {

nlohmann::json report_to_json(const EvalReport& report, int rep,
                              const std::vector<std::size_t>& cal_class_counts) {
  nlohmann::json j{{"rep", rep},
                   {"method", report.method},
                   {"alpha", report.alpha},
                   {"n_eval", report.n_eval},
                   {"marginal_coverage", report.marginal_coverage},
                   {"avg_size", report.avg_size},
                   {"per_class_coverage", report.per_class_coverage},  // NaN dumps as null
                   {"class_counts", report.class_counts},
                   {"ccv", report.ccv},
                   {"empty_region_rate", report.empty_region_rate},
                   {"cal_class_counts", cal_class_counts}};
  if (!report.excluded_classes.empty()) j["excluded_classes"] = report.excluded_classes;
  return j;
}

}  // namespace

void write_reports_jsonl(const ExperimentResult& result, std::ostream& out) {
  for (const auto& rep : result.repetitions)
    for (const auto& report : rep.reports)
      out << report_to_json(report, rep.rep, rep.cal_class_counts).dump() << '\n';
}

void write_tidy_csv(const ExperimentResult& result, std::ostream& out) {
  out << "method,alpha,rep,metric,value\n";
  const auto row = [&](const EvalReport& r, int rep, const std::string& metric, double value) {
    out << r.method << ',' << format_double(r.alpha) << ',' << rep << ',' << metric << ','
        << format_double(value) << '\n';
  };
  for (const auto& rep : result.repetitions) {
    for (const auto& report : rep.reports) {
      row(report, rep.rep, "marginal_coverage", report.marginal_coverage);
      row(report, rep.rep, "avg_size", report.avg_size);
      row(report, rep.rep, "ccv", report.ccv);
      row(report, rep.rep, "empty_region_rate", report.empty_region_rate);
      for (int y = 1; y <= result.num_classes; ++y) {
        const double p = report.per_class_coverage[static_cast<std::size_t>(y - 1)];
        if (!std::isnan(p)) row(report, rep.rep, "class_coverage_" + std::to_string(y), p);
      }
    }
  }
}

void write_aggregates_csv(const ExperimentResult& result, std::ostream& out) {
  out << "method,alpha,metric,mean,se,reps\n";
  for (const auto& row : result.aggregates) {
    out << row.method << ',' << format_double(row.alpha) << ',' << row.metric << ','
        << (std::isnan(row.mean) ? "" : format_double(row.mean)) << ','
        << (std::isnan(row.se) ? "" : format_double(row.se)) << ',' << row.count << '\n';
  }
}

void print_aggregate_table(const ExperimentResult& result, std::ostream& out) {
  const auto find = [&](const std::string& method, double alpha,
                        const std::string& metric) -> const AggregateRow* {
    for (const auto& row : result.aggregates)
      if (row.method == method && row.alpha == alpha && row.metric == metric) return &row;
    return nullptr;
  };

  char line[160];
  std::snprintf(line, sizeof(line), "%-18s %-7s %-18s %-18s %-18s %s", "method", "alpha",
                "coverage (se)", "avg_size (se)", "ccv (se)", "empty_rate");
  out << line << '\n';

  // preserve aggregate order but one line per (method, alpha)
  std::vector<std::pair<std::string, double>> seen;
  for (const auto& row : result.aggregates) {
    const auto key = std::make_pair(row.method, row.alpha);
    bool dup = false;
    for (const auto& s : seen) dup = dup || s == key;
    if (dup) continue;
    seen.push_back(key);
    const auto* cov = find(row.method, row.alpha, "marginal_coverage");
    const auto* size = find(row.method, row.alpha, "avg_size");
    const auto* ccv = find(row.method, row.alpha, "ccv");
    const auto* empty = find(row.method, row.alpha, "empty_region_rate");
    char cov_s[32], size_s[32], ccv_s[32];
    std::snprintf(cov_s, sizeof(cov_s), "%.4f (%.4f)", cov->mean, std::isnan(cov->se) ? 0.0 : cov->se);
    std::snprintf(size_s, sizeof(size_s), "%.3f (%.4f)", size->mean,
                  std::isnan(size->se) ? 0.0 : size->se);
    std::snprintf(ccv_s, sizeof(ccv_s), "%.4f (%.4f)", ccv->mean, std::isnan(ccv->se) ? 0.0 : ccv->se);
    std::snprintf(line, sizeof(line), "%-18s %-7.3g %-18s %-18s %-18s %.4f", row.method.c_str(),
                  row.alpha, cov_s, size_s, ccv_s, empty->mean);
    out << line << '\n';
  }
}

}  // namespace ocp
