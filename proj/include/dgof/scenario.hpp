#ifndef DGOF_SCENARIO_HPP_
#define DGOF_SCENARIO_HPP_

#include <Eigen/Dense>
#include <memory>
#include <string>

#include "dgof/model.hpp"
#include "dgof/rng.hpp"

namespace dgof {

// Synthetic covariate generators for the Monte Carlo studies. Real
// conditioning series are not shipped, so size/power numbers are
// qualitatively, not numerically, comparable to published tables.
struct CovariateGenerator {
  enum class Kind { iid_normal, ar1_normal };

  Kind kind = Kind::iid_normal;
  double coef = 0.0;  // AR(1) coefficient; stationary unit variance
  int dims = 1;

  Eigen::MatrixXd draw(int T, Rng& rng) const;
};

// One Monte Carlo scenario: data come from (truth, theta_truth), the test
// fits and checks null_model.
struct Scenario {
  std::string name;
  std::shared_ptr<const Model> truth;
  Eigen::VectorXd theta_truth;
  std::shared_ptr<const Model> null_model;
  CovariateGenerator xgen;
  int T = 100;
  int burnin = 50;        // warm-up steps dropped from truth simulations
  double init_lag = 0.0;  // lag seed for dynamic truth simulations
};

// Named presets mirroring the scenario table layout:
//   size1:  H0 static probit (truth = null)
//   size2:  H0 static logit
//   power1: H0 static probit vs truth static logit
//   power2: H0 static probit vs truth dynamic probit
//   power3: H0 static probit vs truth dynamic logit
Scenario make_scenario(const std::string& name, int T);

std::vector<std::string> scenario_names();

}  // namespace dgof

#endif  // DGOF_SCENARIO_HPP_
