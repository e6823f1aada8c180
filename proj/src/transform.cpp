#include "dgof/transform.hpp"

#include <algorithm>
#include <cmath>

#include "dgof/rng.hpp"

namespace dgof {

TransformSeries TransformSeries::from_bounds(const Eigen::VectorXd& lo,
                                             const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size())
    throw ValidationError("pit bounds must have equal length");
  TransformSeries ts;
  const int T = static_cast<int>(lo.size());
  ts.pairs.reserve(static_cast<std::size_t>(T));
  ts.breakpoints.reserve(2 * static_cast<std::size_t>(T) + 2);
  ts.breakpoints.push_back(0.0);
  ts.breakpoints.push_back(1.0);
  for (int t = 0; t < T; ++t) {
    if (!(lo[t] >= 0.0 && lo[t] < hi[t] && hi[t] <= 1.0))
      throw NumericError("invalid pit pair: need 0 <= lo < hi <= 1");
    ts.pairs.push_back({lo[t], hi[t]});
    ts.breakpoints.push_back(lo[t]);
    ts.breakpoints.push_back(hi[t]);
  }
  std::sort(ts.breakpoints.begin(), ts.breakpoints.end());
  ts.breakpoints.erase(
      std::unique(ts.breakpoints.begin(), ts.breakpoints.end()),
      ts.breakpoints.end());
  return ts;
}

TransformSeries TransformSeries::from_model(const Model& model,
                                            const Eigen::VectorXd& theta,
                                            const ObservationSeries& series) {
  Eigen::VectorXd lo, hi;
  model.pit_bounds(theta, series, &lo, &hi);
  return from_bounds(lo, hi);
}

NoiseMatrix NoiseMatrix::draw(int T, int M, std::uint64_t seed) {
  if (T < 1 || M < 1) throw ValidationError("noise matrix needs T, M >= 1");
  NoiseMatrix nm;
  nm.seed = seed;
  nm.z.resize(T, M);
  Rng rng(seed);
  for (int t = 0; t < T; ++t)
    for (int m = 0; m < M; ++m) nm.z(t, m) = rng.uniform();
  return nm;
}

double nonrandomized(const PitPair& pair, double u) {
  if (u <= pair.lo) return 0.0;
  if (u >= pair.hi) return 1.0;
  return (u - pair.lo) / (pair.hi - pair.lo);
}

double randomized_pit(const PitPair& pair, double z) {
  return pair.lo + z * (pair.hi - pair.lo);
}

double m_random(const PitPair& pair, std::span<const double> z_row, double u) {
  if (z_row.empty()) throw ValidationError("m_random needs M >= 1");
  int hits = 0;
  for (double z : z_row)
    if (randomized_pit(pair, z) <= u) ++hits;
  return static_cast<double>(hits) / static_cast<double>(z_row.size());
}

double delta_f(const DiscreteLaw& law, double u) {
  const int k = law.quantile(u);
  return (law.cdf(k) - u) / law.pmf(k);
}

double gamma_cov(const DiscreteLaw& law, double u, double v) {
  const int k = law.quantile(u);
  if (law.quantile(v) != k) return 0.0;
  const double fk = law.cdf(k);
  const double fk1 = law.cdf(k - 1);
  return (fk - std::max(u, v)) * (std::min(u, v) - fk1) / (fk - fk1);
}

double discrepancy_d(const DiscreteLaw& g, const DiscreteLaw& f, double u) {
  const int k = f.quantile(u);
  return g.cdf(k) - f.cdf(k) - delta_f(f, u) * (g.pmf(k) - f.pmf(k));
}

double discrepancy_d2(const DiscreteLaw& g, const DiscreteLaw& f, double u,
                      double v) {
  double out = discrepancy_d(g, f, std::min(u, v));
  const int k = f.quantile(u);
  if (f.quantile(v) == k) {
    out -= (delta_f(f, std::max(u, v)) - delta_f(f, u) * delta_f(f, v)) *
           (g.pmf(k) - f.pmf(k));
  }
  return out;
}

Eigen::VectorXd nabla_drift(const DiscreteLaw& law, const Eigen::MatrixXd& fdot,
                            double u) {
  if (fdot.rows() != law.size())
    throw ValidationError("nabla_drift: fdot rows must match the support");
  const int k = law.quantile(u);
  Eigen::VectorXd fdot_k = fdot.row(k - 1);
  Eigen::VectorXd fdot_km1 =
      k >= 2 ? Eigen::VectorXd(fdot.row(k - 2))
             : Eigen::VectorXd(Eigen::VectorXd::Zero(fdot.cols()));
  return fdot_k - delta_f(law, u) * (fdot_k - fdot_km1);
}

}  // namespace dgof
