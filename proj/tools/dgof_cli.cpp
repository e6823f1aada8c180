// Command-line surface for the goodness-of-fit toolkit: fit conditional
// discrete response models, run PIT-based bootstrap specification tests,
// simulate from fitted or configured models, and reproduce the Monte Carlo
// size/power study on synthetic covariates.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "dgof/bootstrap.hpp"
#include "dgof/config.hpp"
#include "dgof/csv.hpp"
#include "dgof/rng.hpp"
#include "dgof/scenario.hpp"
#include "dgof/tables.hpp"

namespace {

using namespace dgof;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string out_dir;
};

int effective_threads(const CommonArgs& args) {
  if (args.threads > 0) return args.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write output file: " + path);
  out << content;
}

struct LoadedData {
  IngestResult ingest;
  std::unique_ptr<Model> model;
};

LoadedData load_model_and_data(const RunConfig& config) {
  if (config.data_path.empty())
    throw ValidationError("config [data] path is required for this command");
  LoadedData out;
  if (config.family == "poisson") {
    // counts are shifted, never recoded
    out.ingest =
        ingest_csv_counts(config.data_path, config.y_column, config.x_columns);
  } else if (!config.discretize_column.empty()) {
    out.ingest = ingest_csv_discretized(config.data_path,
                                        config.discretize_column,
                                        config.thresholds, config.x_columns);
  } else {
    out.ingest =
        ingest_csv(config.data_path, config.y_column, config.x_columns);
  }
  out.model = model_from_config(config, out.ingest.series.support_K,
                                static_cast<int>(config.x_columns.size()));
  return out;
}

int cmd_fit(const CommonArgs& args) {
  const RunConfig config = parse_config(args.config_path);
  LoadedData data = load_model_and_data(config);
  const FitResult fit = fit_mle(*data.model, data.ingest.series);
  const Table table =
      fit_report_table(fit, data.model->param_names(), data.model->describe());
  std::cout << table.to_text();
  const std::string dir = args.out_dir.empty() ? config.out_dir : args.out_dir;
  write_file(dir, "fit.txt", table.to_text());
  write_file(dir, "fit.csv", table.to_csv());
  if (!fit.converged) {
    std::cerr << "fit did not converge\n";
    return kExitNumeric;
  }
  return 0;
}

int cmd_test(const CommonArgs& args) {
  const RunConfig config = parse_config(args.config_path);
  LoadedData data = load_model_and_data(config);
  const StatPlan plan =
      plan_from_config(config, data.model->ordered_spec() != nullptr);

  BootstrapOptions opts;
  opts.B = config.B;
  opts.alpha = config.alpha;
  opts.burnin = config.burnin;
  opts.threads = effective_threads(args);
  const BootstrapResult result = parametric_bootstrap(
      *data.model, data.ingest.series, plan, opts, args.seed);

  std::string text, csv;
  for (const Table& table :
       test_report_tables(result, data.model->describe())) {
    text += table.to_text() + "\n";
    csv += table.to_csv();
  }
  std::cout << text;
  if (result.dropped > 0)
    std::cout << "note: " << result.dropped
              << " bootstrap replicates dropped after refit failures\n";
  const std::string dir = args.out_dir.empty() ? config.out_dir : args.out_dir;
  write_file(dir, "test.txt", text);
  write_file(dir, "test.csv", csv);
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  const RunConfig config = parse_config(args.config_path);
  if (config.theta.empty())
    throw ValidationError("[model] theta is required for simulate");

  std::unique_ptr<Model> model;
  Eigen::MatrixXd x;
  double init_lag = 0.0;
  if (!config.data_path.empty()) {
    // covariates come from the file; the response column is ignored
    LoadedData data = load_model_and_data(config);
    model = std::move(data.model);
    x = data.ingest.series.x;
    init_lag = config.family == "poisson" ? data.ingest.series.y[0] - 1.0
                                          : data.ingest.series.y[0];
  } else {
    model = model_from_config(config, config.K,
                              static_cast<int>(config.x_columns.size()));
    if (!config.x_columns.empty())
      throw ValidationError(
          "simulate without a data file supports only covariate-free models");
    x = Eigen::MatrixXd(config.sim_T, 0);
    init_lag = config.family == "poisson" ? config.y0
                                          : std::ceil(config.K / 2.0);
  }
  const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(
      config.theta.data(), static_cast<int>(config.theta.size()));
  model->validate_theta(theta);
  Rng rng(args.seed);
  const ObservationSeries sim = model->simulate(theta, x, init_lag, rng);
  const std::string dir = args.out_dir.empty() ? config.out_dir : args.out_dir;
  write_file(dir, "simulated.csv", "");  // ensure directory exists
  // count series go out as raw counts so they re-ingest unchanged
  write_series_csv(dir + "/simulated.csv", sim, config.family == "poisson");
  std::cout << "wrote " << sim.length() << " observations to " << dir
            << "/simulated.csv\n";
  return 0;
}

int cmd_mc(const CommonArgs& args) {
  const RunConfig config = parse_config(args.config_path);
  std::vector<std::string> names = config.scenarios;
  if (names.empty()) names = scenario_names();

  StatPlan plan = plan_from_config(config, true);
  if (config.processes.empty()) {
    plan = StatPlan::sr_plain();  // default MC battery: S1, S2, R1, R2
    plan.z = true;
    plan.ks = config.norm_ks;
    plan.cvm = config.norm_cvm;
  }

  if (config.R < 100)
    std::cout << "warning: R = " << config.R
              << " gives wide rejection-rate confidence intervals\n";

  std::vector<WarpResult> results;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Scenario scenario = make_scenario(names[i], config.T);
    // one deterministic sub-stream per scenario
    results.push_back(warp_mc(scenario, plan, config.R, config.alpha,
                              mix_seed(args.seed, i), effective_threads(args)));
  }

  std::string text, csv;
  if (plan.cvm) {
    const Table t = mc_report_table(results, names, "CvM");
    text += t.to_text() + "\n";
    csv += t.to_csv();
  }
  if (plan.ks) {
    const Table t = mc_report_table(results, names, "KS");
    text += t.to_text() + "\n";
    csv += t.to_csv();
  }
  std::cout << text;
  const std::string dir = args.out_dir.empty() ? config.out_dir : args.out_dir;
  write_file(dir, "mc.txt", text);
  write_file(dir, "mc.csv", csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Goodness-of-fit diagnostics for conditional discrete response models"};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* sub, bool seed_required) {
    sub->add_option("--config", args.config_path, "run configuration file")
        ->required();
    auto* seed_opt =
        sub->add_option("--seed", args.seed, "master seed (no wall-clock seeding)");
    if (seed_required) seed_opt->required();
    sub->add_option("--threads", args.threads,
                    "worker threads (default: machine parallelism)");
    sub->add_option("--out", args.out_dir, "output directory override");
  };

  CLI::App* fit = app.add_subcommand("fit", "maximum-likelihood fit");
  add_common(fit, false);
  CLI::App* test =
      app.add_subcommand("test", "bootstrap specification test battery");
  add_common(test, true);
  CLI::App* simulate =
      app.add_subcommand("simulate", "simulate a configured model");
  add_common(simulate, true);
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo size/power study");
  add_common(mc, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(args);
    if (test->parsed()) return cmd_test(args);
    if (simulate->parsed()) return cmd_simulate(args);
    if (mc->parsed()) return cmd_mc(args);
  } catch (const ValidationError& err) {
    std::cerr << "validation error: " << err.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
