#include "dgof/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dgof/math.hpp"
#include "dgof/rng.hpp"

namespace dgof {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPoissonTailEps = 1e-12;
constexpr int kPoissonCap = 1'000'000;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double inv_softplus(double y) {
  if (y <= 0.0) throw ValidationError("inv_softplus: argument must be > 0");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

double sigmoid(double x) { return logistic_cdf(x); }

}  // namespace

// ---------------------------------------------------------------------------
// ObservationSeries

void ObservationSeries::validate() const {
  if (y.size() < 2) throw ValidationError("series needs T >= 2");
  if (x.rows() != y.size())
    throw ValidationError("covariate rows do not match response length");
  for (int t = 0; t < length(); ++t) {
    if (y[t] < 1) throw ValidationError("responses must be >= 1");
    if (support_K > 0 && y[t] > support_K)
      throw ValidationError("response above declared support");
  }
}

// ---------------------------------------------------------------------------
// DiscreteLaw

DiscreteLaw DiscreteLaw::from_pmf(const std::vector<double>& pmf,
                                  double floor) {
  std::vector<double> cdf(pmf.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    acc += pmf[i];
    cdf[i] = acc;
  }
  return from_cdf(std::move(cdf), floor);
}

DiscreteLaw DiscreteLaw::from_cdf(std::vector<double> cdf, double floor) {
  if (cdf.empty()) throw ValidationError("law needs nonempty support");
  if (std::abs(cdf.back() - 1.0) > 1e-8)
    throw ValidationError("law cdf must reach 1 at the top of the support");
  cdf.back() = 1.0;
  double prev = 0.0;
  for (double v : cdf) {
    if (!(v - prev > floor) || !(v - prev > 0.0))
      throw NumericError("degenerate law: nonpositive or floored cell mass");
    prev = v;
  }
  DiscreteLaw law;
  law.cdf_ = std::move(cdf);
  return law;
}

int DiscreteLaw::quantile(double u) const {
  if (!(u > 0.0) || u > 1.0)
    throw ValidationError("quantile: u must lie in (0,1]");
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(it - cdf_.begin()) + 1;
}

// ---------------------------------------------------------------------------
// Poisson pieces

double poisson_cdf(double lambda, int k) {
  if (!(lambda > 0.0)) throw NumericError("poisson_cdf: lambda must be > 0");
  if (k <= 0) return 0.0;
  // term j is the count pmf lambda^j e^-lambda / j!
  double term = std::exp(-lambda);
  if (term == 0.0)
    throw NumericError("poisson_cdf: intensity too large to evaluate");
  double acc = term;
  for (int j = 1; j < k; ++j) {
    term *= lambda / j;
    acc += term;
    if (acc >= 1.0 - kPoissonTailEps) return 1.0;
  }
  return acc >= 1.0 - kPoissonTailEps ? 1.0 : acc;
}

DiscreteLaw poisson_law(double lambda) {
  if (!(lambda > 0.0)) throw NumericError("poisson_law: lambda must be > 0");
  std::vector<double> cdf;
  cdf.reserve(16);
  double term = std::exp(-lambda);
  if (term == 0.0)
    throw NumericError("poisson_law: intensity too large to evaluate");
  double acc = term;
  cdf.push_back(acc);
  int j = 0;
  while (acc < 1.0 - kPoissonTailEps && j < kPoissonCap) {
    ++j;
    term *= lambda / j;
    acc += term;
    cdf.push_back(acc);
  }
  cdf.back() = 1.0;  // residual tail mass folded into the top cell
  // Truncated Poisson cells in the far left tail are legitimately below
  // 1e-12 for larger lambda, so only strict positivity is enforced here.
  return DiscreteLaw::from_cdf(std::move(cdf), 0.0);
}

DiscreteLaw mixture_law(const DiscreteLaw& f, const DiscreteLaw& h,
                        double delta, int T) {
  if (f.size() != h.size())
    throw ValidationError("mixture_law: laws must share support");
  const double root_t = std::sqrt(static_cast<double>(T));
  if (!(delta >= 0.0) || delta >= root_t)
    throw ValidationError("mixture_law: need 0 <= delta < sqrt(T)");
  const double w = delta / root_t;
  std::vector<double> cdf(static_cast<std::size_t>(f.size()));
  for (int k = 1; k <= f.size(); ++k)
    cdf[static_cast<std::size_t>(k) - 1] =
        (1.0 - w) * f.cdf(k) + w * h.cdf(k);
  return DiscreteLaw::from_cdf(std::move(cdf), 0.0);
}

// ---------------------------------------------------------------------------
// Ordered choice free functions

namespace {

double link_cdf(OrderedChoiceSpec::Link link, double z) {
  return link == OrderedChoiceSpec::Link::probit ? normal_cdf(z)
                                                 : logistic_cdf(z);
}

double link_upper(OrderedChoiceSpec::Link link, double z) {
  return link == OrderedChoiceSpec::Link::probit ? 0.5 * std::erfc(z / kSqrt2)
                                                 : logistic_cdf(-z);
}

double link_pdf(OrderedChoiceSpec::Link link, double z) {
  return link == OrderedChoiceSpec::Link::probit ? normal_pdf(z)
                                                 : logistic_pdf(z);
}

double link_pdf_deriv(OrderedChoiceSpec::Link link, double z) {
  return link == OrderedChoiceSpec::Link::probit ? normal_pdf_deriv(z)
                                                 : logistic_pdf_deriv(z);
}

double link_quantile(OrderedChoiceSpec::Link link, double p) {
  return link == OrderedChoiceSpec::Link::probit ? normal_quantile(p)
                                                 : logistic_quantile(p);
}

// P(a_lo < eps <= a_hi) without cancellation in the upper tail.
double cell_prob(OrderedChoiceSpec::Link link, double a_lo, double a_hi) {
  if (a_lo == -kInf) return link_cdf(link, a_hi);
  if (a_hi == kInf) return link_upper(link, a_lo);
  if (a_lo > 0.0) return link_upper(link, a_lo) - link_upper(link, a_hi);
  return link_cdf(link, a_hi) - link_cdf(link, a_lo);
}

void check_thresholds(const OrderedChoiceSpec& spec,
                      const Eigen::VectorXd& theta) {
  if (theta.size() != spec.n_params())
    throw ValidationError("theta has the wrong dimension");
  for (int k = 2; k <= spec.K - 1; ++k) {
    if (!(theta[spec.tau_index(k)] > theta[spec.tau_index(k - 1)]))
      throw ValidationError("thresholds must be strictly increasing");
  }
}

double latent_index(const OrderedChoiceSpec& spec, const Eigen::VectorXd& theta,
                    const InfoState& info) {
  double v = 0.0;
  for (int j = 0; j < spec.p; ++j) v += info.x[j] * theta[j];
  if (spec.dynamic) v += theta[spec.rho_index()] * info.y_lag;
  return v;
}

}  // namespace

double ordered_cdf(const OrderedChoiceSpec& spec, const Eigen::VectorXd& theta,
                   const InfoState& info, int k) {
  check_thresholds(spec, theta);
  if (k < 0 || k > spec.K) throw ValidationError("ordered_cdf: k out of range");
  if (k == 0) return 0.0;
  if (k == spec.K) return 1.0;
  const double v = latent_index(spec, theta, info);
  return link_cdf(spec.link, theta[spec.tau_index(k)] - v);
}

double ordered_pmf(const OrderedChoiceSpec& spec, const Eigen::VectorXd& theta,
                   const InfoState& info, int k) {
  check_thresholds(spec, theta);
  if (k < 1 || k > spec.K) throw ValidationError("ordered_pmf: k out of range");
  const double v = latent_index(spec, theta, info);
  const double a_lo = k > 1 ? theta[spec.tau_index(k - 1)] - v : -kInf;
  const double a_hi = k < spec.K ? theta[spec.tau_index(k)] - v : kInf;
  return cell_prob(spec.link, a_lo, a_hi);
}

DiscreteLaw ordered_law(const OrderedChoiceSpec& spec,
                        const Eigen::VectorXd& theta, const InfoState& info) {
  check_thresholds(spec, theta);
  const double v = latent_index(spec, theta, info);
  std::vector<double> pmf(static_cast<std::size_t>(spec.K));
  for (int k = 1; k <= spec.K; ++k) {
    const double a_lo = k > 1 ? theta[spec.tau_index(k - 1)] - v : -kInf;
    const double a_hi = k < spec.K ? theta[spec.tau_index(k)] - v : kInf;
    pmf[static_cast<std::size_t>(k) - 1] = cell_prob(spec.link, a_lo, a_hi);
  }
  return DiscreteLaw::from_pmf(pmf);
}

// ---------------------------------------------------------------------------
// OrderedModel

namespace {

class OrderedModel final : public Model {
 public:
  explicit OrderedModel(OrderedChoiceSpec spec) : spec_(spec) {
    if (spec_.K < 2) throw ValidationError("ordered model needs K >= 2");
  }

  int n_params() const override { return spec_.n_params(); }
  int support_K() const override { return spec_.K; }

  void validate_theta(const Eigen::VectorXd& theta) const override {
    check_thresholds(spec_, theta);
  }

  bool theta_feasible(const Eigen::VectorXd& theta) const override {
    if (theta.size() != spec_.n_params() || !theta.allFinite()) return false;
    for (int k = 2; k <= spec_.K - 1; ++k)
      if (!(theta[spec_.tau_index(k)] > theta[spec_.tau_index(k - 1)]))
        return false;
    return true;
  }

  void check_series(const ObservationSeries& series) const override {
    series.validate();
    std::vector<int> seen(static_cast<std::size_t>(spec_.K), 0);
    for (int t = 0; t < series.length(); ++t) {
      if (series.y[t] > spec_.K)
        throw ValidationError("response above model support K");
      seen[static_cast<std::size_t>(series.y[t]) - 1]++;
    }
    for (int k = 0; k < spec_.K; ++k)
      if (seen[static_cast<std::size_t>(k)] == 0)
        throw NumericError("separation: category " + std::to_string(k + 1) +
                           " never observed");
    if (spec_.p > 0 && series.x.cols() != spec_.p)
      throw ValidationError("covariate dimension does not match spec");
  }

  double loglik(const Eigen::VectorXd& theta,
                const ObservationSeries& series) const override {
    return loglik_grad_hess(theta, series, nullptr, nullptr);
  }

  double loglik_grad_hess(const Eigen::VectorXd& theta,
                          const ObservationSeries& series,
                          Eigen::VectorXd* grad,
                          Eigen::MatrixXd* hess) const override {
    const int m = spec_.n_params();
    const int T = series.length();
    if (grad) grad->setZero(m);
    if (hess) hess->setZero(m, m);
    Eigen::VectorXd da_hi(m), da_lo(m), dp(m);
    double ll = 0.0;
    for (int t = 0; t < T; ++t) {
      const int k = series.y[t];
      const double lag = lag_at(series, t);
      double v = 0.0;
      for (int j = 0; j < spec_.p; ++j) v += series.x(t, j) * theta[j];
      if (spec_.dynamic) v += theta[spec_.rho_index()] * lag;

      const double a_hi = k < spec_.K ? theta[spec_.tau_index(k)] - v : kInf;
      const double a_lo = k > 1 ? theta[spec_.tau_index(k - 1)] - v : -kInf;
      const double p = cell_prob(spec_.link, a_lo, a_hi);
      if (!(p > 0.0) || !std::isfinite(p))
        return -kInf;  // zero cell at an observed outcome
      ll += std::log(p);
      if (!grad && !hess) continue;

      fill_da(series, t, lag, k < spec_.K ? k : 0, &da_hi);
      fill_da(series, t, lag, k > 1 ? k - 1 : 0, &da_lo);
      const double g_hi = k < spec_.K ? link_pdf(spec_.link, a_hi) : 0.0;
      const double g_lo = k > 1 ? link_pdf(spec_.link, a_lo) : 0.0;
      dp = g_hi * da_hi - g_lo * da_lo;
      if (grad) *grad += dp / p;
      if (hess) {
        const double gp_hi = k < spec_.K ? link_pdf_deriv(spec_.link, a_hi) : 0.0;
        const double gp_lo = k > 1 ? link_pdf_deriv(spec_.link, a_lo) : 0.0;
        hess->noalias() += (gp_hi / p) * (da_hi * da_hi.transpose());
        hess->noalias() -= (gp_lo / p) * (da_lo * da_lo.transpose());
        hess->noalias() -= (dp / p) * (dp / p).transpose();
      }
    }
    return ll;
  }

  Eigen::MatrixXd expected_info(const Eigen::VectorXd& theta,
                                const ObservationSeries& series) const override {
    const int m = spec_.n_params();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd da_hi(m), da_lo(m), dp(m);
    for (int t = 0; t < series.length(); ++t) {
      const double lag = lag_at(series, t);
      double v = 0.0;
      for (int j = 0; j < spec_.p; ++j) v += series.x(t, j) * theta[j];
      if (spec_.dynamic) v += theta[spec_.rho_index()] * lag;
      for (int k = 1; k <= spec_.K; ++k) {
        const double a_hi = k < spec_.K ? theta[spec_.tau_index(k)] - v : kInf;
        const double a_lo = k > 1 ? theta[spec_.tau_index(k - 1)] - v : -kInf;
        const double p = cell_prob(spec_.link, a_lo, a_hi);
        if (!(p > 0.0)) throw NumericError("degenerate cell in expected_info");
        fill_da(series, t, lag, k < spec_.K ? k : 0, &da_hi);
        fill_da(series, t, lag, k > 1 ? k - 1 : 0, &da_lo);
        const double g_hi = k < spec_.K ? link_pdf(spec_.link, a_hi) : 0.0;
        const double g_lo = k > 1 ? link_pdf(spec_.link, a_lo) : 0.0;
        dp = g_hi * da_hi - g_lo * da_lo;
        info.noalias() += (dp * dp.transpose()) / p;
      }
    }
    return info;
  }

  std::vector<DiscreteLaw> laws(const Eigen::VectorXd& theta,
                                const ObservationSeries& series) const override {
    std::vector<DiscreteLaw> out;
    out.reserve(static_cast<std::size_t>(series.length()));
    for (int t = 0; t < series.length(); ++t)
      out.push_back(ordered_law(spec_, theta, info_at(series, t)));
    return out;
  }

  void laws_grad(const Eigen::VectorXd& theta, const ObservationSeries& series,
                 std::vector<DiscreteLaw>* laws_out,
                 std::vector<Eigen::MatrixXd>* fdot_out) const override {
    const int m = spec_.n_params();
    laws_out->clear();
    fdot_out->clear();
    Eigen::VectorXd da(m);
    for (int t = 0; t < series.length(); ++t) {
      laws_out->push_back(ordered_law(spec_, theta, info_at(series, t)));
      const double lag = lag_at(series, t);
      double v = 0.0;
      for (int j = 0; j < spec_.p; ++j) v += series.x(t, j) * theta[j];
      if (spec_.dynamic) v += theta[spec_.rho_index()] * lag;
      Eigen::MatrixXd fdot = Eigen::MatrixXd::Zero(spec_.K, m);
      for (int k = 1; k < spec_.K; ++k) {
        const double a = theta[spec_.tau_index(k)] - v;
        fill_da(series, t, lag, k, &da);
        fdot.row(k - 1) = link_pdf(spec_.link, a) * da.transpose();
      }
      fdot_out->push_back(std::move(fdot));
    }
  }

  void pit_bounds(const Eigen::VectorXd& theta, const ObservationSeries& series,
                  Eigen::VectorXd* lo, Eigen::VectorXd* hi) const override {
    const int T = series.length();
    lo->resize(T);
    hi->resize(T);
    for (int t = 0; t < T; ++t) {
      const int k = series.y[t];
      const double lag = lag_at(series, t);
      double v = 0.0;
      for (int j = 0; j < spec_.p; ++j) v += series.x(t, j) * theta[j];
      if (spec_.dynamic) v += theta[spec_.rho_index()] * lag;
      (*lo)[t] = k > 1 ? link_cdf(spec_.link, theta[spec_.tau_index(k - 1)] - v)
                       : 0.0;
      (*hi)[t] = k < spec_.K
                     ? link_cdf(spec_.link, theta[spec_.tau_index(k)] - v)
                     : 1.0;
    }
  }

  ObservationSeries simulate(const Eigen::VectorXd& theta,
                             const Eigen::MatrixXd& x, double init_lag,
                             Rng& rng) const override {
    validate_theta(theta);
    const int T = static_cast<int>(x.rows());
    ObservationSeries out;
    out.y.resize(T);
    out.x = x;
    out.support_K = spec_.K;
    double lag = init_lag;
    for (int t = 0; t < T; ++t) {
      double v = 0.0;
      for (int j = 0; j < spec_.p; ++j) v += x(t, j) * theta[j];
      if (spec_.dynamic) v += theta[spec_.rho_index()] * lag;
      const double u = rng.uniform_open();
      int k = spec_.K;
      for (int c = 1; c < spec_.K; ++c) {
        if (link_cdf(spec_.link, theta[spec_.tau_index(c)] - v) >= u) {
          k = c;
          break;
        }
      }
      out.y[t] = k;
      lag = k;
    }
    return out;
  }

  Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& theta) const override {
    validate_theta(theta);
    Eigen::VectorXd psi = theta;
    for (int k = spec_.K - 1; k >= 2; --k)
      psi[spec_.tau_index(k)] =
          std::log(theta[spec_.tau_index(k)] - theta[spec_.tau_index(k - 1)]);
    return psi;
  }

  Eigen::VectorXd from_unconstrained(const Eigen::VectorXd& psi) const override {
    Eigen::VectorXd theta = psi;
    for (int k = 2; k <= spec_.K - 1; ++k)
      theta[spec_.tau_index(k)] =
          theta[spec_.tau_index(k - 1)] + std::exp(psi[spec_.tau_index(k)]);
    return theta;
  }

  bool psi_feasible(const Eigen::VectorXd& psi) const override {
    return psi.allFinite() && from_unconstrained(psi).allFinite();
  }

  void pullback(const Eigen::VectorXd& psi, Eigen::VectorXd* grad,
                Eigen::MatrixXd* hess) const override {
    const int m = spec_.n_params();
    // J = dtheta/dpsi: identity except tau_k = tau_1 + sum_{j<=k} exp(psi_j)
    Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(m, m);
    for (int k = 2; k <= spec_.K - 1; ++k) {
      const int row = spec_.tau_index(k);
      jac(row, spec_.tau_index(1)) = 1.0;
      for (int j = 2; j <= k; ++j)
        jac(row, spec_.tau_index(j)) = std::exp(psi[spec_.tau_index(j)]);
    }
    Eigen::VectorXd theta_grad = *grad;
    *grad = jac.transpose() * theta_grad;
    if (hess) {
      *hess = jac.transpose() * (*hess) * jac;
      for (int j = 2; j <= spec_.K - 1; ++j) {
        double acc = 0.0;
        for (int k = j; k <= spec_.K - 1; ++k)
          acc += theta_grad[spec_.tau_index(k)];
        const int idx = spec_.tau_index(j);
        (*hess)(idx, idx) += acc * std::exp(psi[idx]);
      }
    }
  }

  Eigen::VectorXd init_guess(const ObservationSeries& series) const override {
    const int T = series.length();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(spec_.n_params());
    std::vector<double> counts(static_cast<std::size_t>(spec_.K), 0.0);
    for (int t = 0; t < T; ++t)
      counts[static_cast<std::size_t>(series.y[t]) - 1] += 1.0;
    double cum = 0.0;
    for (int k = 1; k <= spec_.K - 1; ++k) {
      cum += counts[static_cast<std::size_t>(k) - 1];
      double q = cum / T;
      q = std::min(std::max(q, 1e-3), 1.0 - 1e-3);
      theta[spec_.tau_index(k)] = link_quantile(spec_.link, q);
    }
    // clamping can produce ties; nudge into strict monotonicity
    for (int k = 2; k <= spec_.K - 1; ++k) {
      const int i = spec_.tau_index(k);
      if (theta[i] <= theta[i - 1]) theta[i] = theta[i - 1] + 1e-3;
    }
    return theta;
  }

  std::string describe() const override {
    std::string s = spec_.dynamic ? "dynamic " : "static ";
    s += spec_.link == OrderedChoiceSpec::Link::probit ? "probit" : "logit";
    s += " (K=" + std::to_string(spec_.K) + ")";
    return s;
  }

  std::vector<std::string> param_names() const override {
    std::vector<std::string> names;
    for (int j = 0; j < spec_.p; ++j) names.push_back("beta" + std::to_string(j + 1));
    if (spec_.dynamic) names.push_back("rho");
    for (int k = 1; k <= spec_.K - 1; ++k) names.push_back("tau" + std::to_string(k));
    return names;
  }

  const OrderedChoiceSpec* ordered_spec() const override { return &spec_; }

 private:
  // Omega_1 is realized with the self-lag y_1; one conditioning choice
  // among the initializations the data cannot identify.
  double lag_at(const ObservationSeries& series, int t) const {
    return t == 0 ? series.y[0] : series.y[t - 1];
  }

  InfoState info_at(const ObservationSeries& series, int t) const {
    InfoState info;
    info.x = series.x.row(t);
    info.y_lag = lag_at(series, t);
    return info;
  }

  // d(tau_k - v)/dtheta; k = 0 encodes a boundary threshold (vector unused
  // because the matching density weight is zero, but must stay finite).
  void fill_da(const ObservationSeries& series, int t, double lag, int k,
               Eigen::VectorXd* da) const {
    da->setZero();
    for (int j = 0; j < spec_.p; ++j) (*da)[j] = -series.x(t, j);
    if (spec_.dynamic) (*da)[spec_.rho_index()] = -lag;
    if (k >= 1) (*da)[spec_.tau_index(k)] = 1.0;
  }

  OrderedChoiceSpec spec_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Poisson model

LambdaPath lambda_path(const PoissonSpec& spec, const Eigen::VectorXd& theta,
                       const ObservationSeries& series) {
  const int T = series.length();
  const int m = spec.n_params();
  if (theta.size() != m) throw ValidationError("theta has the wrong dimension");
  LambdaPath path;
  path.lambda.resize(T);
  path.grad.setZero(T, m);

  switch (spec.link) {
    case PoissonSpec::Link::exp_static: {
      for (int t = 0; t < T; ++t) {
        double v = 0.0;
        for (int j = 0; j < spec.p; ++j) v += series.x(t, j) * theta[j];
        const double lam = std::exp(v);
        path.lambda[t] = lam;
        for (int j = 0; j < spec.p; ++j) path.grad(t, j) = lam * series.x(t, j);
      }
      break;
    }
    case PoissonSpec::Link::identity_ar: {
      const double a0 = theta[0], a1 = theta[1], rho = theta[2];
      if (!(a0 > 0.0) || a1 < 0.0 || rho < 0.0 || a1 + rho >= 1.0)
        throw ValidationError(
            "identity-ar needs alpha0 > 0, alpha1, rho >= 0, alpha1 + rho < 1");
      double lam_prev = spec.lambda0;
      double y_prev = spec.y0;
      Eigen::RowVector3d g_prev = Eigen::RowVector3d::Zero();
      for (int t = 0; t < T; ++t) {
        const double lam = a0 + a1 * lam_prev + rho * y_prev;
        Eigen::RowVector3d g;
        g << 1.0, lam_prev, y_prev;
        g += a1 * g_prev;
        path.lambda[t] = lam;
        path.grad.row(t) = g;
        if (!(lam > 0.0)) throw NumericError("nonpositive intensity in path");
        g_prev = g;
        lam_prev = lam;
        y_prev = series.y[t] - 1;  // shifted category back to count
      }
      break;
    }
    case PoissonSpec::Link::log_ar: {
      // log lambda_t = x_t' beta + rho e_{t-1}, e_t = (Y*_t - lambda_t)/lambda_t
      const int pr = spec.p;  // rho sits after beta
      double e_prev = 0.0;
      Eigen::VectorXd de_prev = Eigen::VectorXd::Zero(m);
      for (int t = 0; t < T; ++t) {
        double mt = 0.0;
        for (int j = 0; j < pr; ++j) mt += series.x(t, j) * theta[j];
        mt += theta[pr] * e_prev;
        const double lam = std::exp(mt);
        if (!(lam > 0.0) || !std::isfinite(lam))
          throw NumericError("nonpositive intensity in path");
        Eigen::VectorXd dm = Eigen::VectorXd::Zero(m);
        for (int j = 0; j < pr; ++j) dm[j] = series.x(t, j);
        dm[pr] = e_prev;
        dm += theta[pr] * de_prev;
        path.lambda[t] = lam;
        path.grad.row(t) = lam * dm.transpose();
        const double ystar = series.y[t] - 1;
        e_prev = ystar / lam - 1.0;
        de_prev = -(ystar / (lam * lam)) * (lam * dm);
      }
      break;
    }
  }
  return path;
}

namespace {

class PoissonModel final : public Model {
 public:
  explicit PoissonModel(PoissonSpec spec) : spec_(spec) {}

  int n_params() const override { return spec_.n_params(); }
  int support_K() const override { return 0; }

  void validate_theta(const Eigen::VectorXd& theta) const override {
    if (theta.size() != spec_.n_params())
      throw ValidationError("theta has the wrong dimension");
    if (spec_.link == PoissonSpec::Link::identity_ar) {
      if (!(theta[0] > 0.0) || theta[1] < 0.0 || theta[2] < 0.0 ||
          theta[1] + theta[2] >= 1.0)
        throw ValidationError(
            "identity-ar needs alpha0 > 0, alpha1, rho >= 0, alpha1 + rho < 1");
    }
  }

  bool theta_feasible(const Eigen::VectorXd& theta) const override {
    if (theta.size() != spec_.n_params() || !theta.allFinite()) return false;
    if (spec_.link == PoissonSpec::Link::identity_ar)
      return theta[0] > 0.0 && theta[1] >= 0.0 && theta[2] >= 0.0 &&
             theta[1] + theta[2] < 1.0;
    return true;
  }

  void check_series(const ObservationSeries& series) const override {
    series.validate();
    double mean = 0.0, sq = 0.0;
    for (int t = 0; t < series.length(); ++t) {
      mean += series.y[t];
      sq += static_cast<double>(series.y[t]) * series.y[t];
    }
    mean /= series.length();
    const double var = sq / series.length() - mean * mean;
    if (!(var > 0.0))
      throw NumericError("counts have zero variance; cannot fit");
    if (spec_.p > 0 && series.x.cols() != spec_.p)
      throw ValidationError("covariate dimension does not match spec");
  }

  double loglik(const Eigen::VectorXd& theta,
                const ObservationSeries& series) const override {
    return loglik_grad_hess(theta, series, nullptr, nullptr);
  }

  double loglik_grad_hess(const Eigen::VectorXd& theta,
                          const ObservationSeries& series,
                          Eigen::VectorXd* grad,
                          Eigen::MatrixXd* hess) const override {
    const int m = spec_.n_params();
    const int T = series.length();
    if (!theta_feasible(theta)) return -kInf;
    if (grad) grad->setZero(m);
    if (hess) hess->setZero(m, m);

    LambdaPath path;
    std::vector<Eigen::MatrixXd> lam_hess;
    try {
      if (hess)
        path = path_with_hessian(theta, series, &lam_hess);
      else
        path = lambda_path(spec_, theta, series);
    } catch (const NumericError&) {
      return -kInf;
    }

    double ll = 0.0;
    for (int t = 0; t < T; ++t) {
      const double lam = path.lambda[t];
      const double ystar = series.y[t] - 1;
      if (!(lam > 0.0)) return -kInf;
      ll += ystar * std::log(lam) - lam - std::lgamma(ystar + 1.0);
      if (grad) *grad += (ystar / lam - 1.0) * path.grad.row(t).transpose();
      if (hess) {
        const Eigen::VectorXd g = path.grad.row(t).transpose();
        hess->noalias() -= (ystar / (lam * lam)) * (g * g.transpose());
        hess->noalias() += (ystar / lam - 1.0) * lam_hess[static_cast<std::size_t>(t)];
      }
    }
    return ll;
  }

  Eigen::MatrixXd expected_info(const Eigen::VectorXd& theta,
                                const ObservationSeries& series) const override {
    validate_theta(theta);
    const LambdaPath path = lambda_path(spec_, theta, series);
    const int m = spec_.n_params();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(m, m);
    for (int t = 0; t < series.length(); ++t) {
      const Eigen::VectorXd g = path.grad.row(t).transpose();
      info.noalias() += (g * g.transpose()) / path.lambda[t];
    }
    return info;
  }

  std::vector<DiscreteLaw> laws(const Eigen::VectorXd& theta,
                                const ObservationSeries& series) const override {
    validate_theta(theta);
    const LambdaPath path = lambda_path(spec_, theta, series);
    std::vector<DiscreteLaw> out;
    out.reserve(static_cast<std::size_t>(series.length()));
    for (int t = 0; t < series.length(); ++t)
      out.push_back(poisson_law(path.lambda[t]));
    return out;
  }

  void laws_grad(const Eigen::VectorXd& theta, const ObservationSeries& series,
                 std::vector<DiscreteLaw>* laws_out,
                 std::vector<Eigen::MatrixXd>* fdot_out) const override {
    validate_theta(theta);
    const LambdaPath path = lambda_path(spec_, theta, series);
    const int m = spec_.n_params();
    laws_out->clear();
    fdot_out->clear();
    for (int t = 0; t < series.length(); ++t) {
      DiscreteLaw law = poisson_law(path.lambda[t]);
      const int K = law.size();
      Eigen::MatrixXd fdot = Eigen::MatrixXd::Zero(K, m);
      for (int k = 1; k < K; ++k)
        fdot.row(k - 1) = -law.pmf(k) * path.grad.row(t);
      laws_out->push_back(std::move(law));
      fdot_out->push_back(std::move(fdot));
    }
  }

  void pit_bounds(const Eigen::VectorXd& theta, const ObservationSeries& series,
                  Eigen::VectorXd* lo, Eigen::VectorXd* hi) const override {
    validate_theta(theta);
    const LambdaPath path = lambda_path(spec_, theta, series);
    const int T = series.length();
    lo->resize(T);
    hi->resize(T);
    for (int t = 0; t < T; ++t) {
      const double lam = path.lambda[t];
      const int k = series.y[t];
      // walk the raw cdf; truncation folds deep-tail cells into the top
      // cell, matching poisson_law.
      double term = std::exp(-lam);
      if (term == 0.0) throw NumericError("intensity too large for pit pair");
      double acc = term;     // raw cdf at category c
      double acc_prev = 0.0; // raw cdf at category c - 1
      int c = 1;
      while (c < k && acc < 1.0 - kPoissonTailEps) {
        acc_prev = acc;
        term *= lam / c;
        acc += term;
        ++c;
      }
      if (acc >= 1.0 - kPoissonTailEps) {
        (*lo)[t] = acc_prev;
        (*hi)[t] = 1.0;
      } else {
        (*lo)[t] = acc_prev;
        (*hi)[t] = acc;
      }
    }
  }

  ObservationSeries simulate(const Eigen::VectorXd& theta,
                             const Eigen::MatrixXd& x, double init_lag,
                             Rng& rng) const override {
    validate_theta(theta);
    const int T = static_cast<int>(x.rows());
    ObservationSeries out;
    out.y.resize(T);
    out.x = x;
    out.support_K = 0;

    double lam_prev = spec_.lambda0;
    double y_prev = std::isnan(init_lag) ? spec_.y0 : init_lag;
    double e_prev = 0.0;
    for (int t = 0; t < T; ++t) {
      double lam = 0.0;
      switch (spec_.link) {
        case PoissonSpec::Link::exp_static: {
          double v = 0.0;
          for (int j = 0; j < spec_.p; ++j) v += x(t, j) * theta[j];
          lam = std::exp(v);
          break;
        }
        case PoissonSpec::Link::identity_ar:
          lam = theta[0] + theta[1] * lam_prev + theta[2] * y_prev;
          break;
        case PoissonSpec::Link::log_ar: {
          double mt = 0.0;
          for (int j = 0; j < spec_.p; ++j) mt += x(t, j) * theta[j];
          mt += theta[spec_.p] * e_prev;
          lam = std::exp(mt);
          break;
        }
      }
      if (!(lam > 0.0) || !std::isfinite(lam))
        throw NumericError("nonpositive intensity while simulating");
      const int count = draw_count(lam, rng);
      out.y[t] = count + 1;
      lam_prev = lam;
      y_prev = count;
      e_prev = (count - lam) / lam;
    }
    return out;
  }

  Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& theta) const override {
    validate_theta(theta);
    if (spec_.link != PoissonSpec::Link::identity_ar) return theta;
    Eigen::VectorXd psi(3);
    for (int i = 0; i < 3; ++i)
      psi[i] = inv_softplus(std::max(theta[i], 1e-12));
    return psi;
  }

  Eigen::VectorXd from_unconstrained(const Eigen::VectorXd& psi) const override {
    if (spec_.link != PoissonSpec::Link::identity_ar) return psi;
    Eigen::VectorXd theta(3);
    for (int i = 0; i < 3; ++i) theta[i] = softplus(psi[i]);
    return theta;
  }

  bool psi_feasible(const Eigen::VectorXd& psi) const override {
    if (!psi.allFinite()) return false;
    if (spec_.link != PoissonSpec::Link::identity_ar) return true;
    const Eigen::VectorXd theta = from_unconstrained(psi);
    // stationarity barrier
    return theta[1] + theta[2] < 1.0 - 1e-8;
  }

  void pullback(const Eigen::VectorXd& psi, Eigen::VectorXd* grad,
                Eigen::MatrixXd* hess) const override {
    if (spec_.link != PoissonSpec::Link::identity_ar) return;
    Eigen::Vector3d jac;
    for (int i = 0; i < 3; ++i) jac[i] = sigmoid(psi[i]);
    const Eigen::VectorXd theta_grad = *grad;
    for (int i = 0; i < 3; ++i) (*grad)[i] *= jac[i];
    if (hess) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) (*hess)(i, j) *= jac[i] * jac[j];
      for (int i = 0; i < 3; ++i)
        (*hess)(i, i) += theta_grad[i] * jac[i] * (1.0 - jac[i]);
    }
  }

  Eigen::VectorXd init_guess(const ObservationSeries& series) const override {
    const int T = series.length();
    Eigen::VectorXd counts(T);
    for (int t = 0; t < T; ++t) counts[t] = series.y[t] - 1;
    const double mean = counts.mean();
    switch (spec_.link) {
      case PoissonSpec::Link::exp_static: {
        Eigen::VectorXd logc(T);
        for (int t = 0; t < T; ++t) logc[t] = std::log(std::max(counts[t], 0.5));
        return (series.x.transpose() * series.x)
            .ldlt()
            .solve(series.x.transpose() * logc);
      }
      case PoissonSpec::Link::identity_ar: {
        double num = 0.0, den = 0.0;
        for (int t = 1; t < T; ++t) {
          num += (counts[t] - mean) * (counts[t - 1] - mean);
          den += (counts[t] - mean) * (counts[t] - mean);
        }
        double s = den > 0.0 ? num / den : 0.0;
        s = std::min(std::max(s, 0.05), 0.8);
        Eigen::VectorXd theta(3);
        theta << std::max(mean * (1.0 - s), 0.05), s / 2.0, s / 2.0;
        return theta;
      }
      case PoissonSpec::Link::log_ar: {
        Eigen::VectorXd logc(T);
        for (int t = 0; t < T; ++t) logc[t] = std::log(std::max(counts[t], 0.5));
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(spec_.p + 1);
        theta.head(spec_.p) = (series.x.transpose() * series.x)
                                  .ldlt()
                                  .solve(series.x.transpose() * logc);
        return theta;
      }
    }
    return Eigen::VectorXd::Zero(spec_.n_params());
  }

  std::string describe() const override {
    switch (spec_.link) {
      case PoissonSpec::Link::exp_static: return "poisson exp-static";
      case PoissonSpec::Link::identity_ar: return "poisson identity-ar";
      case PoissonSpec::Link::log_ar: return "poisson log-ar";
    }
    return "poisson";
  }

  std::vector<std::string> param_names() const override {
    std::vector<std::string> names;
    switch (spec_.link) {
      case PoissonSpec::Link::exp_static:
        for (int j = 0; j < spec_.p; ++j)
          names.push_back("beta" + std::to_string(j + 1));
        break;
      case PoissonSpec::Link::identity_ar:
        names = {"alpha0", "alpha1", "rho"};
        break;
      case PoissonSpec::Link::log_ar:
        for (int j = 0; j < spec_.p; ++j)
          names.push_back("beta" + std::to_string(j + 1));
        names.push_back("rho");
        break;
    }
    return names;
  }

 private:
  static int draw_count(double lam, Rng& rng) {
    const double u = rng.uniform_open();
    double term = std::exp(-lam);
    double acc = term;
    int j = 0;
    while (acc < u && acc < 1.0 - kPoissonTailEps && j < kPoissonCap) {
      ++j;
      term *= lam / j;
      acc += term;
    }
    return j;
  }

  // Second derivatives of the intensity path, one m x m matrix per t.
  LambdaPath path_with_hessian(const Eigen::VectorXd& theta,
                               const ObservationSeries& series,
                               std::vector<Eigen::MatrixXd>* lam_hess) const {
    const int T = series.length();
    const int m = spec_.n_params();
    LambdaPath path = lambda_path(spec_, theta, series);
    lam_hess->assign(static_cast<std::size_t>(T),
                     Eigen::MatrixXd::Zero(m, m));
    switch (spec_.link) {
      case PoissonSpec::Link::exp_static: {
        for (int t = 0; t < T; ++t) {
          const Eigen::VectorXd xt = series.x.row(t).transpose();
          (*lam_hess)[static_cast<std::size_t>(t)] =
              path.lambda[t] * (xt * xt.transpose());
        }
        break;
      }
      case PoissonSpec::Link::identity_ar: {
        const double a1 = theta[1];
        Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(3, 3);
        Eigen::RowVector3d g_prev = Eigen::RowVector3d::Zero();
        for (int t = 0; t < T; ++t) {
          Eigen::MatrixXd h = a1 * h_prev;
          h.row(1) += g_prev;
          h.col(1) += g_prev.transpose();
          (*lam_hess)[static_cast<std::size_t>(t)] = h;
          h_prev = h;
          g_prev = path.grad.row(t);
        }
        break;
      }
      case PoissonSpec::Link::log_ar: {
        const int pr = spec_.p;
        Eigen::VectorXd de_prev = Eigen::VectorXd::Zero(m);
        Eigen::MatrixXd d2e_prev = Eigen::MatrixXd::Zero(m, m);
        for (int t = 0; t < T; ++t) {
          const double lam = path.lambda[t];
          Eigen::VectorXd dm = path.grad.row(t).transpose() / lam;
          Eigen::MatrixXd d2m = theta[pr] * d2e_prev;
          d2m.row(pr) += de_prev.transpose();
          d2m.col(pr) += de_prev;
          (*lam_hess)[static_cast<std::size_t>(t)] =
              lam * (dm * dm.transpose() + d2m);
          const double ystar = series.y[t] - 1;
          const Eigen::VectorXd dlam = path.grad.row(t).transpose();
          const Eigen::MatrixXd& d2lam = (*lam_hess)[static_cast<std::size_t>(t)];
          de_prev = -(ystar / (lam * lam)) * dlam;
          d2e_prev =
              (2.0 * ystar / (lam * lam * lam)) * (dlam * dlam.transpose()) -
              (ystar / (lam * lam)) * d2lam;
        }
        break;
      }
    }
    return path;
  }

  PoissonSpec spec_;
};

}  // namespace

std::unique_ptr<Model> make_model(const OrderedChoiceSpec& spec) {
  return std::make_unique<OrderedModel>(spec);
}

std::unique_ptr<Model> make_model(const PoissonSpec& spec) {
  return std::make_unique<PoissonModel>(spec);
}

}  // namespace dgof
