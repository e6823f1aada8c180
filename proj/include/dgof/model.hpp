#ifndef DGOF_MODEL_HPP_
#define DGOF_MODEL_HPP_

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "dgof/errors.hpp"

namespace dgof {

class Rng;

// The sample {Y_t, X_t}. y holds 1-based support indices: ordered-choice
// categories 1..K, or shifted counts Y = Y* + 1 for count models.
struct ObservationSeries {
  Eigen::VectorXi y;
  Eigen::MatrixXd x;   // T x p, p may be 0
  int support_K = 0;   // 0 marks countably infinite support

  int length() const { return static_cast<int>(y.size()); }
  void validate() const;
};

// A conditional discrete law F(.|Omega_t) frozen at one time point.
// Support is {1,...,K}; F(0) = 0, F(K) = 1 and every cell has positive mass.
class DiscreteLaw {
 public:
  static DiscreteLaw from_pmf(const std::vector<double>& pmf,
                              double floor = 1e-12);
  static DiscreteLaw from_cdf(std::vector<double> cdf, double floor = 1e-12);

  double cdf(int k) const {
    if (k <= 0) return 0.0;
    if (k >= size()) return 1.0;
    return cdf_[static_cast<std::size_t>(k) - 1];
  }
  double pmf(int k) const { return cdf(k) - cdf(k - 1); }

  // min{y : F(y) >= u} for u in (0,1]; u outside that range is a domain
  // error (u = 0 would land outside the support).
  int quantile(double u) const;

  int size() const { return static_cast<int>(cdf_.size()); }

 private:
  std::vector<double> cdf_;  // cdf_[i] = F(i+1), back() == 1 exactly
};

// Poisson cdf on the shifted support: category k covers counts <= k-1,
// so cdf(k) = sum_{j=0}^{k-1} lambda^j e^-lambda / j!.
double poisson_cdf(double lambda, int k);

// Truncated shifted-Poisson law: support ends at the smallest k with
// cdf >= 1 - 1e-12 (cap 1e6); the residual tail mass is folded into the
// top cell so the law stays proper.
DiscreteLaw poisson_law(double lambda);

// Pointwise convex mixture (1 - delta/sqrt(T)) F + (delta/sqrt(T)) H used
// for local-alternative drift experiments. Requires shared support.
DiscreteLaw mixture_law(const DiscreteLaw& f, const DiscreteLaw& h,
                        double delta, int T);

// Realized information state at time t: covariate row plus the lagged
// response for dynamic specifications.
struct InfoState {
  Eigen::VectorXd x;
  double y_lag = 0.0;
};

// ---------------------------------------------------------------------------
// Ordered choice: latent V* = x'beta + rho y_{t-1} + eps cut by thresholds.

struct OrderedChoiceSpec {
  enum class Link { probit, logit };

  Link link = Link::probit;
  int K = 2;
  bool dynamic = false;
  int p = 0;

  // theta layout: beta (p), [rho], tau_1 .. tau_{K-1}
  int n_params() const { return p + (dynamic ? 1 : 0) + K - 1; }
  int rho_index() const { return dynamic ? p : -1; }
  int tau_index(int k) const { return p + (dynamic ? 1 : 0) + k - 1; }
};

// F_eps(tau_k - x'beta - rho y_{t-1}), with tau_0 = -inf, tau_K = +inf.
double ordered_cdf(const OrderedChoiceSpec& spec, const Eigen::VectorXd& theta,
                   const InfoState& info, int k);

// Raw cell probability P(Y = k | info), computed without cancellation in
// the tails. May underflow to 0 for extreme latent indices; use
// ordered_law when class-M strictness is required.
double ordered_pmf(const OrderedChoiceSpec& spec, const Eigen::VectorXd& theta,
                   const InfoState& info, int k);

DiscreteLaw ordered_law(const OrderedChoiceSpec& spec,
                        const Eigen::VectorXd& theta, const InfoState& info);

// ---------------------------------------------------------------------------
// Conditional Poisson for counts Y* = Y - 1.

struct PoissonSpec {
  enum class Link { exp_static, identity_ar, log_ar };

  Link link = Link::identity_ar;
  int p = 0;          // covariate count (exp_static / log_ar)
  double lambda0 = 1.0;  // initial intensity for AR links
  double y0 = 0.0;       // initial count Y*_0 for AR links

  // identity_ar theta: (alpha0, alpha1, rho); log_ar: (beta, rho)
  int n_params() const {
    switch (link) {
      case Link::exp_static: return p;
      case Link::identity_ar: return 3;
      case Link::log_ar: return p + 1;
    }
    return 0;
  }
};

// Forward intensity recursion and its parameter gradient, with
// lambda_dot_0 = 0 (the initial state does not depend on theta).
struct LambdaPath {
  Eigen::VectorXd lambda;  // T
  Eigen::MatrixXd grad;    // T x m
};

LambdaPath lambda_path(const PoissonSpec& spec, const Eigen::VectorXd& theta,
                       const ObservationSeries& series);

// ---------------------------------------------------------------------------
// Family-independent interface consumed by estimate / transform / bootstrap.

class Model {
 public:
  virtual ~Model() = default;

  virtual int n_params() const = 0;
  virtual int support_K() const = 0;  // 0 for infinite support

  virtual void validate_theta(const Eigen::VectorXd& theta) const = 0;
  virtual bool theta_feasible(const Eigen::VectorXd& theta) const = 0;

  // Preconditions for fitting: every category observed (ordered),
  // positive count variance (Poisson). Throws NumericError.
  virtual void check_series(const ObservationSeries& series) const = 0;

  virtual double loglik(const Eigen::VectorXd& theta,
                        const ObservationSeries& series) const = 0;

  // Analytic score and Hessian of the loglikelihood; returns the loglik.
  // Either output may be null.
  virtual double loglik_grad_hess(const Eigen::VectorXd& theta,
                                  const ObservationSeries& series,
                                  Eigen::VectorXd* grad,
                                  Eigen::MatrixXd* hess) const = 0;

  // Conditional expected information sum_t sum_k fdot fdot' / f.
  virtual Eigen::MatrixXd expected_info(
      const Eigen::VectorXd& theta, const ObservationSeries& series) const = 0;

  virtual std::vector<DiscreteLaw> laws(
      const Eigen::VectorXd& theta, const ObservationSeries& series) const = 0;

  // Laws plus dF/dtheta per t: fdot[t] has one row per support cell.
  virtual void laws_grad(const Eigen::VectorXd& theta,
                         const ObservationSeries& series,
                         std::vector<DiscreteLaw>* laws,
                         std::vector<Eigen::MatrixXd>* fdot) const = 0;

  // PIT pairs (F(Y_t - 1), F(Y_t)) without materializing full laws.
  virtual void pit_bounds(const Eigen::VectorXd& theta,
                          const ObservationSeries& series,
                          Eigen::VectorXd* lo, Eigen::VectorXd* hi) const = 0;

  // Inverse-cdf simulation, recursing on simulated lags for dynamic specs.
  // init_lag seeds Omega_1: the lagged category (ordered) or count Y*_0
  // (Poisson AR links; overrides the configured initial count).
  virtual ObservationSeries simulate(const Eigen::VectorXd& theta,
                                     const Eigen::MatrixXd& x, double init_lag,
                                     Rng& rng) const = 0;

  // Unconstrained reparameterization for the optimizer.
  virtual Eigen::VectorXd to_unconstrained(
      const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd from_unconstrained(
      const Eigen::VectorXd& psi) const = 0;
  virtual bool psi_feasible(const Eigen::VectorXd& psi) const = 0;

  // Chain-rule pull-back of a theta-space gradient/Hessian to psi space,
  // including the curvature of the reparameterization.
  virtual void pullback(const Eigen::VectorXd& psi, Eigen::VectorXd* grad,
                        Eigen::MatrixXd* hess) const = 0;

  virtual Eigen::VectorXd init_guess(const ObservationSeries& series) const = 0;

  virtual std::string describe() const = 0;
  virtual std::vector<std::string> param_names() const = 0;

  // Non-null for ordered-choice models; the marked-process test needs the
  // single-index structure.
  virtual const OrderedChoiceSpec* ordered_spec() const { return nullptr; }
};

std::unique_ptr<Model> make_model(const OrderedChoiceSpec& spec);
std::unique_ptr<Model> make_model(const PoissonSpec& spec);

}  // namespace dgof

#endif  // DGOF_MODEL_HPP_
