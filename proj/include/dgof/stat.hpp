#ifndef DGOF_STAT_HPP_
#define DGOF_STAT_HPP_

#include <functional>

#include "dgof/process.hpp"

namespace dgof {

struct TestStatistic {
  enum class Norm { KS, CvM };
  Norm norm = Norm::KS;
  int dim = 1;
  double value = 0.0;
  // KS argmax; ties broken toward the smallest u (lexicographic in 2D).
  double arg1 = 0.0;
  double arg2 = 0.0;
};

struct StatOptions {
  // 2D CvM falls back from exact per-cell quadrature to a fixed grid when
  // the breakpoint count exceeds this limit (O(B^2 T) exactness becomes the
  // bottleneck inside bootstrap loops).
  int exact_knot_limit = 1024;
  int grid_n = 101;
};

// Exact sup |process|: piecewise-linear segments attain extrema at knots,
// so both one-sided limits at every knot are scanned.
TestStatistic ks_1d(const Process1D& process);

// Exact integral of the squared process under Lebesgue phi: the integrand
// is quadratic per knot interval, so 2-point Gauss-Legendre is exact.
TestStatistic cvm_1d(const Process1D& process);

// Density-weighted phi hook; the quadrature is then only as exact as the
// weight is close to per-interval linear.
TestStatistic cvm_1d(const Process1D& process,
                     const std::function<double(double)>& phi_density);

// Exact sup over cell corners (bilinear functions attain rectangle extrema
// at corners).
TestStatistic ks_2d(const Bilinear2D& process);

// Exact per-cell tensor 2x2 Gauss-Legendre (biquadratic integrand), with
// the fixed-grid fallback from StatOptions.
TestStatistic cvm_2d(const Bilinear2D& process, const StatOptions& opts = {});

// Step-field variants for the randomized biparameter processes. The field
// is constant minus nrm*u1*u2 on every cell of the point-induced grid;
// both norms admit an exact O(n^2) corner/cell sweep.
TestStatistic ks_2d(const StepField2D& process);
TestStatistic cvm_2d(const StepField2D& process, const StatOptions& opts = {});

}  // namespace dgof

#endif  // DGOF_STAT_HPP_
