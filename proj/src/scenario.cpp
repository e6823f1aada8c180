#include "dgof/scenario.hpp"

#include <cmath>

namespace dgof {

Eigen::MatrixXd CovariateGenerator::draw(int T, Rng& rng) const {
  Eigen::MatrixXd x(T, dims);
  switch (kind) {
    case Kind::iid_normal:
      for (int t = 0; t < T; ++t)
        for (int j = 0; j < dims; ++j) x(t, j) = rng.normal();
      break;
    case Kind::ar1_normal: {
      const double innov = std::sqrt(1.0 - coef * coef);
      for (int j = 0; j < dims; ++j) {
        double prev = rng.normal();
        x(0, j) = prev;
        for (int t = 1; t < T; ++t) {
          prev = coef * prev + innov * rng.normal();
          x(t, j) = prev;
        }
      }
      break;
    }
  }
  return x;
}

namespace {

// Synthetic designs: K = 4 categories, two persistent covariates. Logit
// parameters are the probit ones scaled by ~1.7 so the two links give
// nearly matching cell probabilities. Each scenario row carries its own
// parameter point, the way the published study simulates from differently
// fitted models.
//
// The static design keeps balanced cells. The dynamic design uses
// lag coefficient -1.08 (the magnitude seen in fitted dynamic models) with
// thresholds shifted by rho * E[Y] and a flatter middle: the lag mixture
// then separates into components a static link cannot imitate, which is
// what gives the univariate statistics their modest residual power.
constexpr double kLogitScale = 1.7;
constexpr double kRhoDynamic = -1.08;

OrderedChoiceSpec spec_of(OrderedChoiceSpec::Link link, bool dynamic) {
  OrderedChoiceSpec spec;
  spec.link = link;
  spec.K = 4;
  spec.dynamic = dynamic;
  spec.p = 2;
  return spec;
}

Eigen::VectorXd theta_static(OrderedChoiceSpec::Link link) {
  const double s = link == OrderedChoiceSpec::Link::probit ? 1.0 : kLogitScale;
  Eigen::VectorXd theta(5);
  theta << s * 1.0, s * -0.8, s * -1.6, 0.0, s * 1.6;
  return theta;
}

Eigen::VectorXd theta_dynamic(OrderedChoiceSpec::Link link) {
  const double s = link == OrderedChoiceSpec::Link::probit ? 1.0 : kLogitScale;
  const double shift = kRhoDynamic * 2.5;
  Eigen::VectorXd theta(6);
  theta << s * 2.0, s * -1.6, s * kRhoDynamic, s * (-1.1 + shift), s * shift,
      s * (1.1 + shift);
  return theta;
}

CovariateGenerator xgen_of(double coef) {
  CovariateGenerator g;
  g.kind = CovariateGenerator::Kind::ar1_normal;
  g.coef = coef;
  g.dims = 2;
  return g;
}

}  // namespace

Scenario make_scenario(const std::string& name, int T) {
  using Link = OrderedChoiceSpec::Link;
  Scenario sc;
  sc.name = name;
  sc.T = T;
  sc.burnin = 50;
  sc.init_lag = 2.0;
  sc.xgen = xgen_of(0.8);

  if (name == "size1") {
    sc.truth = make_model(spec_of(Link::probit, false));
    sc.theta_truth = theta_static(Link::probit);
    sc.null_model = make_model(spec_of(Link::probit, false));
  } else if (name == "size2") {
    sc.truth = make_model(spec_of(Link::logit, false));
    sc.theta_truth = theta_static(Link::logit);
    sc.null_model = make_model(spec_of(Link::logit, false));
  } else if (name == "power1") {
    sc.truth = make_model(spec_of(Link::logit, false));
    sc.theta_truth = theta_static(Link::logit);
    sc.null_model = make_model(spec_of(Link::probit, false));
  } else if (name == "power2") {
    sc.truth = make_model(spec_of(Link::probit, true));
    sc.theta_truth = theta_dynamic(Link::probit);
    sc.null_model = make_model(spec_of(Link::probit, false));
    sc.xgen = xgen_of(0.85);
  } else if (name == "power3") {
    sc.truth = make_model(spec_of(Link::logit, true));
    sc.theta_truth = theta_dynamic(Link::logit);
    sc.null_model = make_model(spec_of(Link::probit, false));
    sc.xgen = xgen_of(0.85);
  } else {
    throw ValidationError("unknown scenario: " + name);
  }
  return sc;
}

std::vector<std::string> scenario_names() {
  return {"size1", "size2", "power1", "power2", "power3"};
}

}  // namespace dgof
