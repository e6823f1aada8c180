#ifndef DGOF_MATH_HPP_
#define DGOF_MATH_HPP_

#include <cmath>

namespace dgof {

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kInvSqrt2Pi = 0.3989422804014327;

inline double normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / kSqrt2);
}

// Inverse standard normal cdf, accurate to full double precision
// (rational approximation polished with one Halley step).
double normal_quantile(double p);

// 1/(1+e^-x) with the stable branch for x < 0.
inline double logistic_cdf(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logistic_pdf(double x) {
  const double e = std::exp(-std::abs(x));
  const double d = 1.0 + e;
  return e / (d * d);
}

inline double logistic_quantile(double p) { return std::log(p / (1.0 - p)); }

// Derivative of the link density, needed for analytic Hessians.
// probit: phi'(x) = -x phi(x); logit: g'(x) = g(x) (1 - 2 Lambda(x)).
inline double normal_pdf_deriv(double x) { return -x * normal_pdf(x); }
inline double logistic_pdf_deriv(double x) {
  return logistic_pdf(x) * (1.0 - 2.0 * logistic_cdf(x));
}

}  // namespace dgof

#endif  // DGOF_MATH_HPP_
