#ifndef DGOF_ESTIMATE_HPP_
#define DGOF_ESTIMATE_HPP_

#include <Eigen/Dense>

#include "dgof/model.hpp"

namespace dgof {

struct FitOptions {
  double grad_tol = 1e-6;  // sup-norm of the score at convergence
  int max_iter = 200;
};

struct FitResult {
  Eigen::VectorXd theta;
  double loglik = 0.0;
  Eigen::VectorXd score;          // at theta_hat
  Eigen::MatrixXd observed_info;  // negative analytic Hessian at theta_hat
  Eigen::VectorXd se;             // from the inverse observed information
  bool converged = false;
  bool info_pd = false;  // reported, never silently repaired
  int iterations = 0;
};

// Dampened Newton with line search on the unconstrained reparameterization
// (log-gap thresholds, softplus-positive Poisson AR parameters), ridge
// fallback when the curvature is not positive definite.
FitResult fit_mle(const Model& model, const ObservationSeries& series,
                  const FitOptions& options = {});

double loglik(const Model& model, const Eigen::VectorXd& theta,
              const ObservationSeries& series);

Eigen::VectorXd score(const Model& model, const Eigen::VectorXd& theta,
                      const ObservationSeries& series);

// Negative analytic Hessian of the loglikelihood.
Eigen::MatrixXd observed_info(const Model& model, const Eigen::VectorXd& theta,
                              const ObservationSeries& series);

// Outer-product form sum_t sum_k s_t(k) fdot_t(k)'; always PSD.
Eigen::MatrixXd expected_info(const Model& model, const Eigen::VectorXd& theta,
                              const ObservationSeries& series);

}  // namespace dgof

#endif  // DGOF_ESTIMATE_HPP_
