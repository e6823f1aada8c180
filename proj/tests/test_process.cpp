#include "doctest.h"

#include <cmath>
#include <vector>

#include "dgof/process.hpp"
#include "dgof/rng.hpp"
#include "dgof/transform.hpp"
#include "test_oracles.hpp"

using namespace dgof;

namespace {

TransformSeries two_point_series() {
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.0, 0.7;
  hi << 0.2, 1.0;
  return TransformSeries::from_bounds(lo, hi);
}

TransformSeries simulated_series(int T, std::uint64_t seed) {
  OrderedChoiceSpec spec;
  spec.K = 4;
  spec.p = 1;
  auto model = make_model(spec);
  Eigen::VectorXd theta(4);
  theta << 0.7, -1.0, 0.0, 1.0;
  Rng rng(seed);
  Eigen::MatrixXd x(T, 1);
  for (int t = 0; t < T; ++t) x(t, 0) = rng.normal();
  const ObservationSeries sim = model->simulate(theta, x, 1.0, rng);
  return TransformSeries::from_model(*model, theta, sim);
}

}  // namespace

TEST_CASE("s1 hand values on the two-point series") {
  const TransformSeries ts = two_point_series();
  CHECK(s1_eval(ts, 0.0) == 0.0);
  CHECK(s1_eval(ts, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s1_eval(ts, 0.1) ==
        doctest::Approx(0.3 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s1_eval(ts, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("s2 hand values on the two-point series") {
  const TransformSeries ts = two_point_series();
  CHECK(s2_eval(ts, 0.5, 0.1) == doctest::Approx(-0.05).epsilon(1e-15));
  CHECK(s2_eval(ts, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s2_eval(ts, 0.0, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("s1 handle is the piecewise-linear interpolant of s1_eval") {
  const TransformSeries ts = simulated_series(40, 7);
  const Process1D s1 = s1_process(ts);
  for (int i = 0; i <= 5000; ++i) {
    const double u = i / 5000.0;
    CHECK(s1(u) == doctest::Approx(s1_eval(ts, u)).epsilon(1e-12));
  }
  CHECK(s1(0.0) == 0.0);
  CHECK(s1(1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("s2 handle is bilinear per cell and matches direct evaluation") {
  const TransformSeries ts = simulated_series(25, 8);
  const Bilinear2D s2 = s2_process(ts);
  Rng rng(9);
  for (int i = 0; i < 4000; ++i) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    CHECK(s2(u1, u2) == doctest::Approx(s2_eval(ts, u1, u2)).epsilon(1e-12));
  }
  // bilinearity inside a cell: the center equals the mean of opposing-edge
  // midpoints
  const auto& b = ts.breakpoints;
  for (std::size_t i = 0; i + 1 < b.size(); i += 3) {
    for (std::size_t j = 0; j + 1 < b.size(); j += 3) {
      const double mx = 0.5 * (b[i] + b[i + 1]);
      const double my = 0.5 * (b[j] + b[j + 1]);
      const double edges = 0.5 * (s2(b[i], my) + s2(b[i + 1], my));
      CHECK(s2(mx, my) == doctest::Approx(edges).epsilon(1e-12));
    }
  }
}

TEST_CASE("r1m with zero noise is the edf of the lower pit bounds") {
  const TransformSeries ts = two_point_series();
  NoiseMatrix noise;
  noise.z = Eigen::MatrixXd::Zero(2, 1);
  // U^r = lo: {0.0, 0.7}
  const double root_t = std::sqrt(2.0);
  CHECK(r1m_eval(ts, noise, 0.3) ==
        doctest::Approx(root_t * (0.5 - 0.3)).epsilon(1e-15));
  CHECK(r1m_eval(ts, noise, 0.7) ==
        doctest::Approx(root_t * (1.0 - 0.7)).epsilon(1e-15));
  CHECK(r1m_eval(ts, noise, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("r1m handle agrees with direct evaluation, including jumps") {
  const TransformSeries ts = simulated_series(30, 10);
  const NoiseMatrix noise = NoiseMatrix::draw(30, 3, 77);
  const Process1D r1 = r1m_process(ts, noise);
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform();
    CHECK(r1(u) == doctest::Approx(r1m_eval(ts, noise, u)).epsilon(1e-12));
  }
  for (double knot : r1.knots())
    CHECK(r1(knot) == doctest::Approx(r1m_eval(ts, noise, knot)).epsilon(1e-12));
}

TEST_CASE("noise mean of r1m recovers s1") {
  const TransformSeries ts = simulated_series(20, 12);
  const int draws = 10000;
  Rng seeder(13);
  for (double u : {0.15, 0.4, 0.85}) {
    const double target = s1_eval(ts, u);
    double acc = 0.0, acc_sq = 0.0;
    for (int d = 0; d < draws; ++d) {
      const NoiseMatrix noise = NoiseMatrix::draw(20, 2, seeder.next_u64());
      const double v = r1m_eval(ts, noise, u);
      acc += v;
      acc_sq += v * v;
    }
    const double mean = acc / draws;
    const double var = std::max(acc_sq / draws - mean * mean, 0.0);
    CHECK(std::abs(mean - target) <= 3.0 * std::sqrt(var / draws) + 1e-12);
  }
}

TEST_CASE("r2m single-term hand value and endpoint") {
  const TransformSeries ts = two_point_series();
  NoiseMatrix noise;
  noise.z = Eigen::MatrixXd::Constant(2, 1, 0.5);
  // U^r_0 = 0.1 (pair (0,0.2)), U^r_1 = 0.85 (pair (0.7,1.0)); T - 1 = 1
  CHECK(r2m_eval(ts, noise, 0.9, 0.05) ==
        doctest::Approx(-0.045).epsilon(1e-15));
  CHECK(r2m_eval(ts, noise, 0.9, 0.15) ==
        doctest::Approx(1.0 - 0.135).epsilon(1e-15));
  CHECK(r2m_eval(ts, noise, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("r2m handle agrees with direct evaluation") {
  const TransformSeries ts = simulated_series(15, 14);
  const NoiseMatrix noise = NoiseMatrix::draw(15, 4, 78);
  const StepField2D r2 = r2m_process(ts, noise);
  Rng rng(15);
  for (int i = 0; i < 1500; ++i) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    CHECK(r2(u1, u2) ==
          doctest::Approx(r2m_eval(ts, noise, u1, u2)).epsilon(1e-12));
  }
}

TEST_CASE("noise mean of r2m recovers s2") {
  const TransformSeries ts = simulated_series(12, 16);
  const int draws = 8000;
  Rng seeder(17);
  const double u1 = 0.55, u2 = 0.3;
  const double target = s2_eval(ts, u1, u2);
  double acc = 0.0, acc_sq = 0.0;
  for (int d = 0; d < draws; ++d) {
    const NoiseMatrix noise = NoiseMatrix::draw(12, 2, seeder.next_u64());
    const double v = r2m_eval(ts, noise, u1, u2);
    acc += v;
    acc_sq += v * v;
  }
  const double mean = acc / draws;
  const double var = std::max(acc_sq / draws - mean * mean, 0.0);
  CHECK(std::abs(mean - target) <= 3.0 * std::sqrt(var / draws) + 1e-12);
}

TEST_CASE("marked process endpoints and pooled statistics") {
  OrderedChoiceSpec spec;
  spec.K = 3;
  spec.p = 2;
  auto model = make_model(spec);
  Eigen::VectorXd theta(4);
  theta << 0.8, -0.5, -0.4, 0.9;

  const int T = 20;
  Rng rng(18);
  Eigen::MatrixXd x(T, 2);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < 2; ++j) x(t, j) = rng.normal();
  const ObservationSeries sim = model->simulate(theta, x, 1.0, rng);
  const MarkedProcess mp = z_marked(spec, theta, sim);

  SUBCASE("evaluation at -inf and +inf") {
    for (int j = 1; j <= 3; ++j) {
      CHECK(mp.eval(j, -1e300) == 0.0);
      double freq = 0.0, prob = 0.0;
      for (int t = 0; t < T; ++t) {
        freq += sim.y[t] == j ? 1.0 : 0.0;
        InfoState info;
        info.x = sim.x.row(t);
        info.y_lag = t == 0 ? sim.y[0] : sim.y[t - 1];
        prob += ordered_law(spec, theta, info).pmf(j);
      }
      CHECK(mp.eval(j, 1e300) ==
            doctest::Approx((freq - prob) / std::sqrt(1.0 * T)).epsilon(1e-12));
    }
  }

  SUBCASE("pooled statistics match the naive double loop") {
    // index and residuals recomputed from scratch
    Eigen::VectorXd index(T);
    Eigen::MatrixXd resid(T, 3);
    for (int t = 0; t < T; ++t) {
      InfoState info;
      info.x = sim.x.row(t);
      info.y_lag = t == 0 ? sim.y[0] : sim.y[t - 1];
      index[t] = x(t, 0) * theta[0] + x(t, 1) * theta[1] - theta[spec.tau_index(1)];
      const DiscreteLaw law = ordered_law(spec, theta, info);
      for (int k = 1; k <= 3; ++k)
        resid(t, k - 1) = (sim.y[t] == k ? 1.0 : 0.0) - law.pmf(k);
    }
    double cvm = 0.0, ks = 0.0;
    for (int j = 0; j < 3; ++j) {
      double col = 0.0;
      for (int t = 0; t < T; ++t) {
        double z = 0.0;
        for (int s = 0; s < T; ++s)
          if (index[s] <= index[t]) z += resid(s, j);
        z /= std::sqrt(1.0 * T);
        col += z * z;
      }
      cvm += col / T;
      ks = std::max(ks, col / T);
    }
    CHECK(mp.pooled_cvm() == doctest::Approx(cvm).epsilon(1e-12));
    CHECK(mp.pooled_ks() == doctest::Approx(ks).epsilon(1e-12));
  }
}

TEST_CASE("s1 moments under the true law" * doctest::timeout(600)) {
  // known theta_0: over replications the process has mean 0 and variance
  // u^v - uv - mean(gamma), and no more variance than r1
  OrderedChoiceSpec spec;
  spec.K = 4;
  spec.p = 0;
  auto model = make_model(spec);
  Eigen::VectorXd theta(3);
  theta << -0.9, 0.1, 1.1;
  InfoState info;
  info.x = Eigen::VectorXd(0);
  const DiscreteLaw law = ordered_law(spec, theta, info);

  const int T = 50, reps = 2000;
  const std::vector<double> grid{0.15, 0.35, 0.6, 0.85};
  Eigen::MatrixXd s1_draws(reps, static_cast<int>(grid.size()));
  Eigen::MatrixXd r1_draws(reps, static_cast<int>(grid.size()));
  Rng rng(19);
  for (int r = 0; r < reps; ++r) {
    const ObservationSeries sim =
        model->simulate(theta, Eigen::MatrixXd(T, 0), 1.0, rng);
    const TransformSeries ts = TransformSeries::from_model(*model, theta, sim);
    const NoiseMatrix noise = NoiseMatrix::draw(T, 1, rng.next_u64());
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      s1_draws(r, static_cast<int>(gi)) = s1_eval(ts, grid[gi]);
      r1_draws(r, static_cast<int>(gi)) = r1m_eval(ts, noise, grid[gi]);
    }
  }
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double u = grid[gi];
    const auto col = s1_draws.col(static_cast<int>(gi));
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / (reps - 1);
    const double se_mean = std::sqrt(var / reps);
    CHECK(std::abs(mean) <= 3.0 * se_mean);

    // static design: E[gamma_t] is the same for every t
    const double v1 = u - u * u - gamma_cov(law, u, u);
    const double se_var = var * std::sqrt(2.0 / (reps - 1));
    CHECK(std::abs(var - v1) <= 3.0 * se_var);

    const auto rcol = r1_draws.col(static_cast<int>(gi));
    const double rvar =
        (rcol.array() - rcol.mean()).square().sum() / (reps - 1);
    const double se_r = rvar * std::sqrt(2.0 / (reps - 1));
    CHECK(var <= rvar + 3.0 * se_r);
  }
}

TEST_CASE("noise decomposition of r1m covariance with data held fixed") {
  // E_z[R1M(u) R1M(v)] = (1/M) E_z[R1 R1] + (1 - 1/M) S1(u) S1(v),
  // both sides computable in closed form via the per-t noise moments
  const TransformSeries ts = simulated_series(50, 20);
  const int T = ts.length();

  const auto closed_form = [&](int M, double u, double v) {
    // diagonal terms use the joint indicator moment, cross terms factorize
    double acc = 0.0;
    for (int t = 0; t < T; ++t) {
      const auto& pair = ts.pairs[static_cast<std::size_t>(t)];
      const double iu = nonrandomized(pair, u);
      const double iv = nonrandomized(pair, v);
      const double joint = nonrandomized(pair, std::min(u, v)) / M +
                           (1.0 - 1.0 / M) * iu * iv;
      acc += joint - u * iv - v * iu + u * v;
    }
    double cross_u = 0.0, cross_v = 0.0;
    for (int t = 0; t < T; ++t) {
      cross_u += nonrandomized(ts.pairs[static_cast<std::size_t>(t)], u) - u;
      cross_v += nonrandomized(ts.pairs[static_cast<std::size_t>(t)], v) - v;
    }
    double cross = cross_u * cross_v;
    for (int t = 0; t < T; ++t) {
      const auto& pair = ts.pairs[static_cast<std::size_t>(t)];
      cross -= (nonrandomized(pair, u) - u) * (nonrandomized(pair, v) - v);
    }
    return (acc + cross) / T;
  };

  for (int M : {1, 5, 25}) {
    for (double u : {0.2, 0.5}) {
      for (double v : {0.35, 0.8}) {
        const double lhs = closed_form(M, u, v);
        const double rhs = closed_form(1, u, v) / M +
                           (1.0 - 1.0 / M) * s1_eval(ts, u) * s1_eval(ts, v);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

        // Monte Carlo confirmation over noise draws
        const int draws = 10000;
        Rng seeder(21 + M);
        double acc = 0.0, acc_sq = 0.0;
        for (int d = 0; d < draws; ++d) {
          const NoiseMatrix noise = NoiseMatrix::draw(T, M, seeder.next_u64());
          const double prod =
              r1m_eval(ts, noise, u) * r1m_eval(ts, noise, v);
          acc += prod;
          acc_sq += prod * prod;
        }
        const double mean = acc / draws;
        const double mc_var = std::max(acc_sq / draws - mean * mean, 0.0);
        CHECK(std::abs(mean - lhs) <=
              3.0 * std::sqrt(mc_var / draws) + 1e-9);
      }
    }
  }
}
