#include "dgof/estimate.hpp"

#include <cmath>
#include <limits>

namespace dgof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Newton direction on A d = g with escalating ridge until A is PD.
Eigen::VectorXd ridged_newton(const Eigen::MatrixXd& a,
                              const Eigen::VectorXd& g) {
  double ridge = 0.0;
  const double scale = std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 40; ++attempt) {
    Eigen::MatrixXd work = a;
    if (ridge > 0.0) work.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      Eigen::VectorXd d = llt.solve(g);
      if (d.allFinite() && d.dot(g) > 0.0) return d;
    }
    ridge = ridge == 0.0 ? 1e-8 * scale : ridge * 10.0;
  }
  // curvature unusable; fall back to a gradient step
  return g / scale;
}

}  // namespace

double loglik(const Model& model, const Eigen::VectorXd& theta,
              const ObservationSeries& series) {
  return model.loglik(theta, series);
}

Eigen::VectorXd score(const Model& model, const Eigen::VectorXd& theta,
                      const ObservationSeries& series) {
  Eigen::VectorXd grad;
  model.loglik_grad_hess(theta, series, &grad, nullptr);
  return grad;
}

Eigen::MatrixXd observed_info(const Model& model, const Eigen::VectorXd& theta,
                              const ObservationSeries& series) {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  model.loglik_grad_hess(theta, series, &grad, &hess);
  return -hess;
}

Eigen::MatrixXd expected_info(const Model& model, const Eigen::VectorXd& theta,
                              const ObservationSeries& series) {
  return model.expected_info(theta, series);
}

FitResult fit_mle(const Model& model, const ObservationSeries& series,
                  const FitOptions& options) {
  model.check_series(series);
  const int m = model.n_params();

  Eigen::VectorXd psi = model.to_unconstrained(model.init_guess(series));
  Eigen::VectorXd theta = model.from_unconstrained(psi);
  Eigen::VectorXd grad_theta(m);
  Eigen::MatrixXd hess_theta(m, m);
  double ll = model.loglik_grad_hess(theta, series, &grad_theta, &hess_theta);
  if (!std::isfinite(ll))
    throw NumericError("initial guess has invalid likelihood");

  FitResult result;
  result.theta = theta;
  result.loglik = ll;
  bool converged = false;
  int iter = 0;

  for (; iter < options.max_iter; ++iter) {
    Eigen::VectorXd grad_psi = grad_theta;
    Eigen::MatrixXd hess_psi = hess_theta;
    model.pullback(psi, &grad_psi, &hess_psi);

    // interior optimum, or a boundary optimum (e.g. an AR coefficient
    // pinned at zero) where the score cannot vanish but the pulled-back
    // gradient does
    if (grad_theta.cwiseAbs().maxCoeff() <= options.grad_tol ||
        grad_psi.cwiseAbs().maxCoeff() <= 1e-8) {
      converged = true;
      break;
    }

    const Eigen::VectorXd dir = ridged_newton(-hess_psi, grad_psi);
    const double slope = grad_psi.dot(dir);

    // Armijo with a floating-point slack: near the optimum the loglik
    // improvement drops below double resolution before the score tolerance
    // is met, and the full Newton step must still be acceptable.
    const double slack = 1e-12 * (1.0 + std::abs(ll));
    double step = 1.0;
    bool accepted = false;
    while (step >= 1e-14) {
      const Eigen::VectorXd psi_new = psi + step * dir;
      if (model.psi_feasible(psi_new)) {
        const Eigen::VectorXd theta_new = model.from_unconstrained(psi_new);
        const double ll_new = model.loglik(theta_new, series);
        if (std::isfinite(ll_new) &&
            ll_new >= ll + 1e-4 * step * slope - slack) {
          psi = psi_new;
          theta = theta_new;
          ll = model.loglik_grad_hess(theta, series, &grad_theta, &hess_theta);
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;  // stalled; report flagged, do not panic
  }

  result.theta = theta;
  result.loglik = ll;
  result.score = grad_theta;
  result.observed_info = -hess_theta;
  result.converged = converged;
  result.iterations = iter;

  Eigen::LLT<Eigen::MatrixXd> llt(result.observed_info);
  result.info_pd = llt.info() == Eigen::Success;
  result.se = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::quiet_NaN());
  if (result.info_pd) {
    const Eigen::MatrixXd inv =
        llt.solve(Eigen::MatrixXd::Identity(m, m));
    for (int i = 0; i < m; ++i)
      result.se[i] = inv(i, i) > 0.0 ? std::sqrt(inv(i, i)) : kInf;
  }
  return result;
}

}  // namespace dgof
