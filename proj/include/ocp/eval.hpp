#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ocp/classifier.hpp"
#include "ocp/datagen.hpp"
#include "ocp/regions.hpp"

namespace ocp {

// The four region constructions under study.
enum class Method { marginal_opi, conditional_opi, marginal_ops, conditional_ops };

inline constexpr Method kAllMethods[] = {Method::marginal_opi, Method::conditional_opi,
                                         Method::marginal_ops, Method::conditional_ops};

const char* to_string(Method m);
Method method_from_string(std::string_view s);
PValueMode method_mode(Method m);
RegionKind method_kind(Method m);

// Metrics of one method at one alpha over an evaluation set.
// per_class_coverage[y-1] is NaN when class y is absent from the truths;
// such classes are listed in excluded_classes and skipped by the CCV max.
struct EvalReport {
  std::string method;
  double alpha = 0.0;
  std::size_t n_eval = 0;
  double marginal_coverage = 0.0;
  double avg_size = 0.0;
  std::vector<double> per_class_coverage;
  std::vector<std::size_t> class_counts;  // truth counts per class
  double ccv = 0.0;                       // max_y max{(1-alpha) - P_y, 0}
  double empty_region_rate = 0.0;
  std::vector<int> excluded_classes;
};

// Scores regions against the true labels. Every region must carry the given
// alpha; truths must lie in 1..num_classes and match regions in length.
EvalReport evaluate(const std::vector<PredictionRegion>& regions, const std::vector<int>& truths,
                    int num_classes, double alpha, std::string method = {});

struct SettingSpec {
  enum class Kind { gaussian_mixture, sparse, csv };
  Kind kind = Kind::gaussian_mixture;
  std::size_t dim = 5;   // sparse setting only
  std::string csv_path;  // csv setting only
};

struct ExperimentConfig {
  SettingSpec setting;
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<double> alphas{0.1};
  int repetitions = 1;
  std::size_t n_train = 500;
  std::size_t n_cal = 525;
  std::size_t n_valid = 975;
  std::uint64_t seed = 0;
  FitConfig fit;
  int threads = 1;
};

struct RepetitionResult {
  int rep = 0;
  std::vector<std::size_t> cal_class_counts;  // n_y over the calibration split
  std::vector<EvalReport> reports;            // one per (method, alpha)
};

struct AggregateRow {
  std::string method;
  double alpha = 0.0;
  std::string metric;
  double mean = 0.0;
  double se = 0.0;  // NaN when fewer than 2 contributing repetitions
  std::size_t count = 0;
};

struct ExperimentResult {
  int num_classes = 0;
  std::vector<RepetitionResult> repetitions;
  std::vector<AggregateRow> aggregates;
};

// Runs the full protocol: per repetition, generate or load the data, split,
// fit the classifier on the training split, score the calibration split and
// build regions for every validation point, method, and alpha. Repetition r
// draws its data seed from derive_seed(derive_seed(seed, r), 0) and its
// split seed from derive_seed(derive_seed(seed, r), 1), so runs are
// reproducible and repetitions can execute on parallel threads.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// One EvalReport per line, tagged with its repetition index.
void write_reports_jsonl(const ExperimentResult& result, std::ostream& out);

// Tidy long format: method,alpha,rep,metric,value.
void write_tidy_csv(const ExperimentResult& result, std::ostream& out);

// Across-repetition means and standard errors: method,alpha,metric,mean,se,reps.
void write_aggregates_csv(const ExperimentResult& result, std::ostream& out);

void print_aggregate_table(const ExperimentResult& result, std::ostream& out);

}  // namespace ocp
