#ifndef DGOF_CONFIG_HPP_
#define DGOF_CONFIG_HPP_

#include <memory>
#include <string>
#include <vector>

#include "dgof/bootstrap.hpp"
#include "dgof/model.hpp"

namespace dgof {

// Parsed plain-text run configuration ([section] / key = value lines).
struct RunConfig {
  // [model]
  std::string family = "ordered";  // ordered | poisson
  std::string link = "probit";  // probit|logit | exp-static|identity-ar|log-ar
  int K = 0;                    // 0: infer from the data
  bool dynamic = false;
  double lambda0 = 1.0;
  double y0 = 0.0;
  std::vector<double> theta;  // ground truth for `simulate`

  // [data]
  std::string data_path;
  std::string y_column = "y";
  std::vector<std::string> x_columns;
  std::string discretize_column;
  std::vector<double> thresholds;

  // [test]
  std::vector<std::string> processes;  // default: the full nine-process battery
  bool norm_ks = true;
  bool norm_cvm = true;
  int B = 999;
  double alpha = 0.05;
  int burnin = 0;

  // [mc]
  std::vector<std::string> scenarios;
  int R = 500;
  int T = 100;

  // [simulate]
  int sim_T = 200;

  // [output]
  std::string out_dir = ".";
};

RunConfig parse_config(const std::string& path);

// Model from the [model] section; K may come from the ingested data.
std::unique_ptr<Model> model_from_config(const RunConfig& config,
                                         int data_K, int data_p);

// Stat plan from the [test] process list (S2, R2M(50), R2, S1, R1M(25),
// R1, Z, ...); empty list = the full battery.
StatPlan plan_from_config(const RunConfig& config, bool ordered_model);

}  // namespace dgof

#endif  // DGOF_CONFIG_HPP_
