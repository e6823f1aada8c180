#ifndef DGOF_TRANSFORM_HPP_
#define DGOF_TRANSFORM_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "dgof/model.hpp"

namespace dgof {

// One PIT pair (F(Y_t - 1 | Omega_t), F(Y_t | Omega_t)). Strictly ordered
// because the observed cell carries positive mass.
struct PitPair {
  double lo = 0.0;
  double hi = 1.0;
};

// Per-t pairs plus the breakpoint set they induce: the sorted union of
// {0, 1} and all pair endpoints. Every process built from the series is
// piecewise linear (1D) or bilinear (2D) between these points.
struct TransformSeries {
  std::vector<PitPair> pairs;
  std::vector<double> breakpoints;

  int length() const { return static_cast<int>(pairs.size()); }

  static TransformSeries from_bounds(const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi);
  static TransformSeries from_model(const Model& model,
                                    const Eigen::VectorXd& theta,
                                    const ObservationSeries& series);
};

// T x M matrix of U[0,1) noises, reproducible from its seed.
struct NoiseMatrix {
  Eigen::MatrixXd z;
  std::uint64_t seed = 0;

  static NoiseMatrix draw(int T, int M, std::uint64_t seed);
};

// The nonrandomized transform: 0 below the pair, a linear ramp across the
// observed cell, 1 above. Continuous and nondecreasing in u.
double nonrandomized(const PitPair& pair, double u);

// Randomized PIT: lo + z (hi - lo).
double randomized_pit(const PitPair& pair, double z);

// M-random transform: fraction of jittered PITs at or below u; its noise
// mean equals the nonrandomized transform.
double m_random(const PitPair& pair, std::span<const double> z_row, double u);

// delta_F(u) = (F(F^-1(u)) - u) / f(F^-1(u)), in [0,1).
double delta_f(const DiscreteLaw& law, double u);

// Conditional covariance correction gamma(u,v): nonzero only when u and v
// invert into the same cell.
double gamma_cov(const DiscreteLaw& law, double u, double v);

// d(G,F,u) = E_G[I_F(Y,u)] - u in closed form.
double discrepancy_d(const DiscreteLaw& g, const DiscreteLaw& f, double u);

// Biparameter discrepancy d(G,F,u,v) entering the second-moment identity
// E_G[I_F(Y,u) I_F(Y,v)] = u^v - delta_F(u,v) + d(G,F,u,v).
double discrepancy_d2(const DiscreteLaw& g, const DiscreteLaw& f, double u,
                      double v);

// Parameter drift of the transform: Fdot(F^-1(u)) - delta_F(u) fdot(F^-1(u)).
// fdot has one row per support cell, as produced by Model::laws_grad.
Eigen::VectorXd nabla_drift(const DiscreteLaw& law, const Eigen::MatrixXd& fdot,
                            double u);

}  // namespace dgof

#endif  // DGOF_TRANSFORM_HPP_
