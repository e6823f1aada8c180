#ifndef DGOF_BOOTSTRAP_HPP_
#define DGOF_BOOTSTRAP_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dgof/estimate.hpp"
#include "dgof/model.hpp"
#include "dgof/scenario.hpp"
#include "dgof/stat.hpp"

namespace dgof {

// Which (process, norm) statistics a run computes. M lists are in output
// order; M = 1 is the plain randomized process (R1 / R2).
struct StatPlan {
  bool s2 = true;
  std::vector<int> r2_ms;  // e.g. {50, 25, 1}
  bool s1 = true;
  std::vector<int> r1_ms;
  bool z = false;  // marked-process test; ordered models only, experimental
  bool ks = true;
  bool cvm = true;
  StatOptions stat_opts;

  static StatPlan full();      // S2, R2M(50/25/1), S1, R1M(50/25/1), Z
  static StatPlan s_only();    // S1 and S2
  static StatPlan sr_plain();  // S1, S2, R1, R2
};

std::vector<std::string> stat_names(const StatPlan& plan);

// All planned statistics for one dataset under theta; noise for the
// randomized processes is drawn from rng (one matrix per distinct M).
Eigen::VectorXd compute_stats(const Model& model, const Eigen::VectorXd& theta,
                              const ObservationSeries& series,
                              const StatPlan& plan, Rng& rng);

struct BootstrapOptions {
  int B = 999;
  double alpha = 0.05;
  int burnin = 0;  // warm-up steps holding x at its first row
  int threads = 1;
  double max_drop_frac = 0.05;  // beyond this the result is flagged
  FitOptions fit;
};

struct BootstrapResult {
  std::vector<std::string> names;
  FitResult fit;
  Eigen::VectorXd observed;
  Eigen::MatrixXd replicates;  // B_eff x n_stats
  Eigen::VectorXd critical;    // empirical (1 - alpha) percentile
  Eigen::VectorXd pvalue;      // (1 + #{rep >= obs}) / (B_eff + 1)
  std::uint64_t seed = 0;
  int B = 0;
  int dropped = 0;
  double alpha = 0.05;
  bool reliable = true;
};

// The parametric bootstrap: fit, simulate recursively from the fitted null
// reusing the original covariates, refit with the same method, and compare
// the observed statistics against the replicate distribution.
BootstrapResult parametric_bootstrap(const Model& model,
                                     const ObservationSeries& series,
                                     const StatPlan& plan,
                                     const BootstrapOptions& options,
                                     std::uint64_t seed);

struct WarpResult {
  std::vector<std::string> names;
  Eigen::VectorXd rejection_rate;
  Eigen::VectorXd pooled_critical;
  std::uint64_t seed = 0;
  int R = 0;
  int failures = 0;
  double alpha = 0.05;
};

// Warp-speed Monte Carlo: each replication draws data from the scenario
// truth, fits the null, computes observed statistics, and contributes
// exactly one bootstrap statistic; the pooled bootstrap draws estimate the
// null critical values.
WarpResult warp_mc(const Scenario& scenario, const StatPlan& plan, int R,
                   double alpha, std::uint64_t seed, int threads = 1);

}  // namespace dgof

#endif  // DGOF_BOOTSTRAP_HPP_
