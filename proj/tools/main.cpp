#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ocp/csv.hpp"
#include "ocp/eval.hpp"
#include "ocp/pvalues.hpp"
#include "ocp/regions.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ExperimentFlags {
  std::vector<double> alphas;
  std::vector<std::string> methods;
  int reps = 10;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  std::string config_path;
  ocp::FitConfig fit;
};

// Flat key=value config support. When the subcommand arguments contain
// "--config FILE", each "key=value" line of FILE is expanded into "--key
// value" ahead of the explicit flags, skipping keys the command line
// already sets, so flags always override the file. Repeat a key to fill a
// repeatable flag. '#' starts a comment.
std::vector<std::string> expand_config_args(std::vector<std::string> args) {
  if (args.empty() || args.front().rfind("-", 0) == 0) return args;

  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw std::runtime_error("cannot read config file: " + config_path);

  std::set<std::string> given;
  for (const auto& arg : args) {
    if (arg.rfind("--", 0) != 0) continue;
    const auto eq = arg.find('=');
    given.insert(eq == std::string::npos ? arg : arg.substr(0, eq));
  }

  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };

  std::vector<std::string> expanded{args.front()};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(config_path + ":" + std::to_string(line_no) +
                               ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config")
      throw std::runtime_error(config_path + ":" + std::to_string(line_no) + ": invalid key");
    if (given.count("--" + key)) continue;
    expanded.push_back("--" + key);
    expanded.push_back(value);
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

CLI::Validator alpha_validator() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          const double v = std::stod(s);
          if (v > 0.0 && v < 1.0) return {};
        } catch (...) {
        }
        return "alpha must lie in (0, 1), got '" + s + "'";
      },
      "ALPHA in (0,1)");
}

void add_experiment_flags(CLI::App* sub, ExperimentFlags& f) {
  sub->add_option("--alpha", f.alphas, "mis-coverage level, repeatable (default 0.1)")
      ->check(alpha_validator());
  sub->add_option("--method", f.methods,
                  "region method, repeatable (default: all four)")
      ->check(CLI::IsMember({"marginal_opi", "conditional_opi", "marginal_ops",
                             "conditional_ops"}));
  sub->add_option("--reps", f.reps, "number of repetitions")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "base seed; all randomness derives from it");
  sub->add_option("--threads", f.threads, "parallel repetition workers")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out_dir, "output directory")->required();
  sub->add_option("--max-iters", f.fit.max_iters, "classifier optimizer iteration cap")
      ->check(CLI::PositiveNumber);
  sub->add_option("--tol", f.fit.tolerance, "classifier gradient tolerance");
  sub->add_option("--ridge", f.fit.ridge, "classifier ridge strength");
  sub->add_option("--config", f.config_path,
                  "flat key=value file mirroring the flags; flags override it");
}

std::vector<ocp::Method> resolve_methods(const std::vector<std::string>& names) {
  if (names.empty())
    return {std::begin(ocp::kAllMethods), std::end(ocp::kAllMethods)};
  std::vector<ocp::Method> out;
  for (const auto& name : names) {
    const ocp::Method m = ocp::method_from_string(name);
    bool dup = false;
    for (ocp::Method seen : out) dup = dup || seen == m;
    if (!dup) out.push_back(m);
  }
  return out;
}

void fill_config(ocp::ExperimentConfig& cfg, const ExperimentFlags& f) {
  cfg.alphas = f.alphas.empty() ? std::vector<double>{0.1} : f.alphas;
  cfg.methods = resolve_methods(f.methods);
  cfg.repetitions = f.reps;
  cfg.seed = f.seed;
  cfg.threads = f.threads;
  cfg.fit = f.fit;
}

json config_meta(const ocp::ExperimentConfig& cfg) {
  json methods = json::array();
  for (ocp::Method m : cfg.methods) methods.push_back(ocp::to_string(m));
  return json{{"alphas", cfg.alphas},
              {"methods", methods},
              {"repetitions", cfg.repetitions},
              {"seed", cfg.seed},
              {"split",
               {{"train", cfg.n_train}, {"cal", cfg.n_cal}, {"valid", cfg.n_valid}}},
              {"fit",
               {{"max_iters", cfg.fit.max_iters},
                {"tolerance", cfg.fit.tolerance},
                {"ridge", cfg.fit.ridge}}}};
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_experiment_outputs(const ocp::ExperimentResult& result, const std::string& out_dir,
                              const json& meta) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  {
    auto out = open_out(dir / "results.jsonl");
    ocp::write_reports_jsonl(result, out);
  }
  {
    auto out = open_out(dir / "results.csv");
    ocp::write_tidy_csv(result, out);
  }
  {
    auto out = open_out(dir / "aggregates.csv");
    ocp::write_aggregates_csv(result, out);
  }
  {
    auto out = open_out(dir / "run_meta.json");
    out << meta.dump(2) << '\n';
  }

  std::set<int> excluded;
  for (const auto& rep : result.repetitions)
    for (const auto& report : rep.reports)
      excluded.insert(report.excluded_classes.begin(), report.excluded_classes.end());
  for (int y : excluded)
    std::cerr << "note: class " << y
              << " was absent from some validation splits and excluded from CCV there\n";

  ocp::print_aggregate_table(result, std::cout);
  std::cerr << "wrote " << (dir / "results.jsonl").string() << ", results.csv, aggregates.csv, run_meta.json\n";
}

int cmd_simulate(const ExperimentFlags& flags, const std::string& setting_name, std::size_t dim,
                 std::size_t n_train, std::size_t n_cal, std::size_t n_valid) {
  ocp::ExperimentConfig cfg;
  if (setting_name == "gaussian-mixture") {
    cfg.setting.kind = ocp::SettingSpec::Kind::gaussian_mixture;
  } else {
    cfg.setting.kind = ocp::SettingSpec::Kind::sparse;
    cfg.setting.dim = dim;
  }
  cfg.n_train = n_train;
  cfg.n_cal = n_cal;
  cfg.n_valid = n_valid;
  fill_config(cfg, flags);

  const ocp::ExperimentResult result = ocp::run_experiment(cfg);

  json meta = config_meta(cfg);
  meta["command"] = "simulate";
  meta["setting"] = setting_name;
  if (setting_name == "sparse") meta["dim"] = dim;
  meta["n_total"] = cfg.n_train + cfg.n_cal + cfg.n_valid;
  write_experiment_outputs(result, flags.out_dir, meta);
  return 0;
}

int cmd_real_data(const ExperimentFlags& flags, const std::string& in_path,
                  std::size_t train_size, double cal_frac) {
  const ocp::Dataset data = ocp::read_csv_dataset(in_path);
  if (train_size >= data.size())
    throw std::runtime_error("train size " + std::to_string(train_size) +
                             " leaves no data for calibration/validation (rows: " +
                             std::to_string(data.size()) + ")");
  const std::size_t remaining = data.size() - train_size;
  // Calibration count is floor(cal_frac * remaining); the remainder validates.
  const auto n_cal = static_cast<std::size_t>(static_cast<double>(remaining) * cal_frac);
  const std::size_t n_valid = remaining - n_cal;
  if (n_cal == 0 || n_valid == 0)
    throw std::runtime_error("calibration fraction leaves an empty split");

  ocp::ExperimentConfig cfg;
  cfg.setting.kind = ocp::SettingSpec::Kind::csv;
  cfg.setting.csv_path = in_path;
  cfg.n_train = train_size;
  cfg.n_cal = n_cal;
  cfg.n_valid = n_valid;
  fill_config(cfg, flags);

  const ocp::ExperimentResult result = ocp::run_experiment(cfg);

  json meta = config_meta(cfg);
  meta["command"] = "real-data";
  meta["input"] = in_path;
  meta["rows"] = data.size();
  meta["num_classes"] = data.num_classes;
  meta["cal_frac"] = cal_frac;
  meta["rounding"] =
      "calibration count = floor(cal_frac * (rows - train)); remainder goes to validation";
  write_experiment_outputs(result, flags.out_dir, meta);
  return 0;
}

int cmd_fit(const std::string& in_path, const std::string& out_path, const ocp::FitConfig& fit) {
  const ocp::Dataset train = ocp::read_csv_dataset(in_path);
  const ocp::LogisticClassifier model = ocp::LogisticClassifier::fit(train, fit);
  auto out = open_out(out_path);
  out << model.to_json().dump(2) << '\n';
  std::cerr << "fit " << model.num_classes() << "-class model on " << train.size() << " rows ("
            << model.training_meta().iterations << " iterations, final loss "
            << model.training_meta().final_loss << ")\n";
  return 0;
}

ocp::LogisticClassifier load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  in >> j;
  return ocp::LogisticClassifier::from_json(j);
}

int cmd_predict(const std::string& model_path, const std::string& cal_path,
                const std::string& in_path, const std::string& out_path, double alpha,
                const std::string& method_name) {
  const ocp::LogisticClassifier model = load_model(model_path);
  const ocp::Dataset cal = ocp::read_csv_dataset(cal_path);
  const ocp::CalibrationScores scores = ocp::compute_calibration_scores(model, cal);
  const ocp::Dataset test = ocp::read_csv_features(in_path);
  if (test.d != static_cast<std::size_t>(model.dimension()))
    throw std::runtime_error("test features have dimension " + std::to_string(test.d) +
                             ", model expects " + std::to_string(model.dimension()));

  const ocp::Method method = ocp::method_from_string(method_name);
  const ocp::PValueMode mode = ocp::method_mode(method);
  auto out = open_out(out_path);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const ocp::PValueVector p = ocp::pvalue_vector(scores, model, test.row(i), mode);
    const ocp::PredictionRegion region = ocp::method_kind(method) == ocp::RegionKind::interval
                                             ? ocp::ordinal_prediction_interval(p, alpha)
                                             : ocp::ordinal_prediction_set(p, alpha);
    json j = ocp::region_to_json(region);
    j["row"] = i;
    out << j.dump() << '\n';
  }
  std::cerr << "wrote " << test.size() << " regions to " << out_path << '\n';
  return 0;
}

int cmd_evaluate(const std::string& regions_path, const std::string& truth_path,
                 const std::string& out_path) {
  std::ifstream in(regions_path);
  if (!in) throw std::runtime_error("cannot open regions file: " + regions_path);
  std::vector<ocp::PredictionRegion> regions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      regions.push_back(ocp::region_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(regions_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (regions.empty()) throw std::runtime_error(regions_path + ": no regions found");

  const double alpha = regions.front().alpha;
  const ocp::RegionKind kind = regions.front().kind;
  const ocp::PValueMode mode = regions.front().mode;
  for (const auto& r : regions) {
    if (r.alpha != alpha || r.kind != kind || r.mode != mode)
      throw std::runtime_error(regions_path + ": regions mix alpha/kind/mode; evaluate one batch at a time");
  }
  std::string method;
  for (ocp::Method m : ocp::kAllMethods)
    if (ocp::method_mode(m) == mode && ocp::method_kind(m) == kind) method = ocp::to_string(m);

  const ocp::Dataset truth = ocp::read_csv_dataset(truth_path);
  if (truth.size() != regions.size())
    throw std::runtime_error("regions (" + std::to_string(regions.size()) + ") and truths (" +
                             std::to_string(truth.size()) + ") differ in length");
  int num_classes = truth.num_classes;
  for (const auto& r : regions)
    if (!r.labels.empty()) num_classes = std::max(num_classes, r.labels.back());

  const ocp::EvalReport report =
      ocp::evaluate(regions, truth.labels, num_classes, alpha, method);
  json j{{"method", report.method},
         {"alpha", report.alpha},
         {"n_eval", report.n_eval},
         {"marginal_coverage", report.marginal_coverage},
         {"avg_size", report.avg_size},
         {"per_class_coverage", report.per_class_coverage},
         {"class_counts", report.class_counts},
         {"ccv", report.ccv},
         {"empty_region_rate", report.empty_region_rate}};
  if (!report.excluded_classes.empty()) j["excluded_classes"] = report.excluded_classes;
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    auto out = open_out(out_path);
    out << j.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ocp: distribution-free prediction regions for ordinal classification"};
  app.require_subcommand(1);

  // simulate
  ExperimentFlags sim_flags;
  std::string sim_setting = "gaussian-mixture";
  std::size_t sim_dim = 5;
  std::size_t sim_train = 500, sim_cal = 525, sim_valid = 975;
  CLI::App* sim = app.add_subcommand("simulate", "run a synthetic-data experiment");
  sim->add_option("--setting", sim_setting, "data generating process")
      ->check(CLI::IsMember({"gaussian-mixture", "sparse"}));
  sim->add_option("--dim", sim_dim, "feature dimension (sparse setting)")
      ->check(CLI::Range(std::size_t{5}, std::size_t{1000000}));
  sim->add_option("--train-size", sim_train, "training rows per repetition")
      ->check(CLI::PositiveNumber);
  sim->add_option("--cal-size", sim_cal, "calibration rows per repetition")
      ->check(CLI::PositiveNumber);
  sim->add_option("--valid-size", sim_valid, "validation rows per repetition")
      ->check(CLI::PositiveNumber);
  add_experiment_flags(sim, sim_flags);

  // real-data
  ExperimentFlags real_flags;
  real_flags.reps = 1;
  std::string real_in;
  std::size_t real_train = 500;
  double real_cal_frac = 0.35;
  CLI::App* real = app.add_subcommand("real-data", "run the CSV-ingestion experiment");
  real->add_option("--in", real_in, "input CSV (header, numeric features, 1-based y column)")
      ->required();
  real->add_option("--train-size", real_train, "rows used to train the classifier")
      ->check(CLI::PositiveNumber);
  real->add_option("--cal-frac", real_cal_frac,
                   "fraction of the remaining rows used for calibration")
      ->check(alpha_validator());
  add_experiment_flags(real, real_flags);

  // fit
  std::string fit_in, fit_out, fit_config;
  ocp::FitConfig fit_cfg;
  CLI::App* fit = app.add_subcommand("fit", "fit the logistic classifier on a CSV");
  fit->add_option("--in", fit_in, "training CSV")->required();
  fit->add_option("--out", fit_out, "output model JSON")->required();
  fit->add_option("--max-iters", fit_cfg.max_iters)->check(CLI::PositiveNumber);
  fit->add_option("--tol", fit_cfg.tolerance);
  fit->add_option("--ridge", fit_cfg.ridge);
  fit->add_option("--config", fit_config, "flat key=value file mirroring the flags");

  // predict
  std::string pred_model, pred_cal, pred_in, pred_out, pred_method = "marginal_ops";
  double pred_alpha = 0.1;
  CLI::App* pred = app.add_subcommand("predict", "emit prediction regions for a test CSV");
  pred->add_option("--model", pred_model, "model JSON from `fit`")->required();
  pred->add_option("--cal", pred_cal, "calibration CSV (labeled)")->required();
  pred->add_option("--in", pred_in, "test CSV (y column optional, ignored)")->required();
  pred->add_option("--out", pred_out, "output regions JSONL")->required();
  pred->add_option("--alpha", pred_alpha, "mis-coverage level")->check(alpha_validator());
  std::string pred_config;
  pred->add_option("--method", pred_method, "region method")
      ->check(CLI::IsMember({"marginal_opi", "conditional_opi", "marginal_ops",
                             "conditional_ops"}));
  pred->add_option("--config", pred_config, "flat key=value file mirroring the flags");

  // evaluate
  std::string eval_regions, eval_truth, eval_out;
  CLI::App* eval = app.add_subcommand("evaluate", "score a regions JSONL against true labels");
  std::string eval_config;
  eval->add_option("--regions", eval_regions, "regions JSONL from `predict`")->required();
  eval->add_option("--truth", eval_truth, "CSV with the true y column")->required();
  eval->add_option("--out", eval_out, "report JSON path (default: stdout)");
  eval->add_option("--config", eval_config, "flat key=value file mirroring the flags");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config_args(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes reversed argument lists
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(sim_flags, sim_setting, sim_dim, sim_train, sim_cal, sim_valid);
    if (real->parsed()) return cmd_real_data(real_flags, real_in, real_train, real_cal_frac);
    if (fit->parsed()) return cmd_fit(fit_in, fit_out, fit_cfg);
    if (pred->parsed())
      return cmd_predict(pred_model, pred_cal, pred_in, pred_out, pred_alpha, pred_method);
    if (eval->parsed()) return cmd_evaluate(eval_regions, eval_truth, eval_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
