#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "dgof/model.hpp"
#include "dgof/rng.hpp"
#include "dgof/transform.hpp"
#include "test_oracles.hpp"

using namespace dgof;

namespace {

// breakpoints, interior midpoints and a uniform sweep: covers every
// piecewise-linear regime including the kinks
std::vector<double> u_grid(const DiscreteLaw& law) {
  std::vector<double> grid;
  for (int k = 0; k <= law.size(); ++k) grid.push_back(law.cdf(k));
  for (int k = 1; k <= law.size(); ++k)
    grid.push_back(0.5 * (law.cdf(k - 1) + law.cdf(k)));
  for (int i = 1; i < 50; ++i) grid.push_back(i / 50.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::remove_if(grid.begin(), grid.end(),
                            [](double u) { return u <= 0.0 || u > 1.0; }),
             grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

TEST_CASE("nonrandomized transform values") {
  const PitPair pair{0.2, 0.7};
  CHECK(nonrandomized(pair, 0.0) == 0.0);
  CHECK(nonrandomized(pair, 1.0) == 1.0);
  CHECK(nonrandomized(pair, 0.45) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(nonrandomized(pair, 0.8) == 1.0);
  CHECK(nonrandomized(pair, 0.2) == 0.0);
  CHECK(nonrandomized(pair, 0.7) == 1.0);
}

TEST_CASE("randomized pit interpolates the pair") {
  const PitPair pair{0.2, 0.7};
  CHECK(randomized_pit(pair, 0.0) == doctest::Approx(0.2));
  CHECK(randomized_pit(pair, 0.5) == doctest::Approx(0.45).epsilon(1e-15));
}

TEST_CASE("randomized pit of simulated data is uniform") {
  // draw Y ~ F and jitter; the KS distance from U[0,1] stays below the
  // 0.1% asymptotic critical value
  const DiscreteLaw law = DiscreteLaw::from_pmf({0.15, 0.35, 0.3, 0.2});
  const int T = 100000;
  Rng rng(2718);
  std::vector<double> u(static_cast<std::size_t>(T));
  for (auto& v : u) {
    const int y = law.quantile(rng.uniform_open());
    v = randomized_pit({law.cdf(y - 1), law.cdf(y)}, rng.uniform());
  }
  std::sort(u.begin(), u.end());
  double ks = 0.0;
  for (int i = 0; i < T; ++i) {
    ks = std::max(ks, std::abs((i + 1.0) / T - u[static_cast<std::size_t>(i)]));
    ks = std::max(ks, std::abs(u[static_cast<std::size_t>(i)] - i * 1.0 / T));
  }
  CHECK(ks < 1.95 / std::sqrt(static_cast<double>(T)));
}

TEST_CASE("m-random transform") {
  const PitPair pair{0.2, 0.7};

  SUBCASE("M = 1 is the plain indicator") {
    const double z[] = {0.3};
    // U^r = 0.35
    CHECK(m_random(pair, z, 0.34) == 0.0);
    CHECK(m_random(pair, z, 0.35) == 1.0);
  }

  SUBCASE("hand value at M = 2") {
    const double z[] = {0.1, 0.9};
    CHECK(m_random(pair, z, 0.45) == doctest::Approx(0.5));
  }

  SUBCASE("M = 0 is a domain error") {
    CHECK_THROWS_AS(m_random(pair, {}, 0.5), ValidationError);
  }

  SUBCASE("noise mean converges to the nonrandomized transform") {
    Rng rng(5);
    const int N = 100000;
    for (double u : {0.25, 0.45, 0.69}) {
      double acc = 0.0;
      for (int i = 0; i < N; ++i) {
        const double z[] = {rng.uniform()};
        acc += m_random(pair, z, u);
      }
      const double mean = acc / N;
      const double target = nonrandomized(pair, u);
      const double se = std::sqrt(target * (1 - target) / N) + 1e-12;
      CHECK(std::abs(mean - target) <= 3.5 * se);
    }
  }
}

TEST_CASE("delta_f values and range") {
  const DiscreteLaw law = DiscreteLaw::from_pmf({0.2, 0.5, 0.3});
  CHECK(delta_f(law, 0.2) == 0.0);
  CHECK(delta_f(law, 0.7) == 0.0);
  CHECK(delta_f(law, 1.0) == 0.0);
  CHECK(delta_f(law, 0.45) == doctest::Approx(0.5).epsilon(1e-15));
  // approaching a cell bottom from above pushes delta toward 1
  CHECK(delta_f(law, 0.2 + 1e-12) < 1.0);
  CHECK(delta_f(law, 0.2 + 1e-12) > 1.0 - 1e-10);

  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const DiscreteLaw l = oracle::random_law(5, rng);
    for (double u : u_grid(l)) {
      const double d = delta_f(l, u);
      CHECK(d >= 0.0);
      CHECK(d < 1.0);
    }
  }
}

TEST_CASE("gamma values and the appendix delta_F(u,v) identity") {
  const DiscreteLaw law = DiscreteLaw::from_pmf({0.2, 0.5, 0.3});
  CHECK(gamma_cov(law, 0.1, 0.5) == 0.0);  // different cells
  CHECK(gamma_cov(law, 0.45, 0.45) == doctest::Approx(0.125).epsilon(1e-15));

  // gamma equals (delta(u v max) - delta(u) delta(v)) f(cell), the
  // appendix display, on random laws
  Rng rng(17);
  for (int rep = 0; rep < 30; ++rep) {
    const DiscreteLaw l = oracle::random_law(3 + rep % 5, rng);
    const auto grid = u_grid(l);
    for (double u : grid) {
      for (double v : grid) {
        double appendix = 0.0;
        if (l.quantile(u) == l.quantile(v)) {
          appendix = (delta_f(l, std::max(u, v)) -
                      delta_f(l, u) * delta_f(l, v)) *
                     l.pmf(l.quantile(std::min(u, v)));
        }
        CHECK(gamma_cov(l, u, v) == doctest::Approx(appendix).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("mean identity: E_F[I_F(Y,u)] = u") {
  Rng rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    const DiscreteLaw law = oracle::random_law(2 + rep % 8, rng);
    for (double u : u_grid(law)) {
      const double mean = oracle::expect(
          law, [&](int y) { return oracle::transform_at(law, y, u); });
      CHECK(mean == doctest::Approx(u).epsilon(1e-12));
    }
  }
}

TEST_CASE("second moment identity: E_F[I(u)I(v)] = u^v - gamma(u,v)") {
  Rng rng(42);
  for (int rep = 0; rep < 30; ++rep) {
    const DiscreteLaw law = oracle::random_law(2 + rep % 6, rng);
    const auto grid = u_grid(law);
    for (double u : grid) {
      for (double v : grid) {
        const double moment = oracle::expect(law, [&](int y) {
          return oracle::transform_at(law, y, u) *
                 oracle::transform_at(law, y, v);
        });
        CHECK(moment == doctest::Approx(std::min(u, v) - gamma_cov(law, u, v))
                            .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("product identity holds exactly on the support") {
  Rng rng(43);
  for (int rep = 0; rep < 30; ++rep) {
    const DiscreteLaw law = oracle::random_law(2 + rep % 6, rng);
    const auto grid = u_grid(law);
    for (double u : grid) {
      for (double v : grid) {
        for (int y = 1; y <= law.size(); ++y) {
          const double lhs = oracle::transform_at(law, y, u) *
                             oracle::transform_at(law, y, v);
          double rhs = oracle::transform_at(law, y, std::min(u, v));
          if (law.quantile(u) == law.quantile(v) && law.quantile(u) == y) {
            rhs -= delta_f(law, std::max(u, v)) -
                   delta_f(law, u) * delta_f(law, v);
          }
          CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("discrepancy d matches the brute-force expectation") {
  const DiscreteLaw f = DiscreteLaw::from_pmf({0.2, 0.5, 0.3});
  const DiscreteLaw g = DiscreteLaw::from_pmf({0.4, 0.4, 0.2});

  SUBCASE("null case") {
    for (double u : u_grid(f))
      CHECK(discrepancy_d(f, f, u) == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("hand value at u = 0.45") {
    CHECK(discrepancy_d(g, f, 0.45) == doctest::Approx(0.15).epsilon(1e-14));
  }

  SUBCASE("random pairs: formula equals E_G[I_F] - u, range respected") {
    Rng rng(44);
    for (int rep = 0; rep < 40; ++rep) {
      const int K = 2 + rep % 6;
      const DiscreteLaw ff = oracle::random_law(K, rng);
      const DiscreteLaw gg = oracle::random_law(K, rng);
      for (double u : u_grid(ff)) {
        const double brute =
            oracle::expect(gg,
                           [&](int y) { return oracle::transform_at(ff, y, u); }) -
            u;
        const double d = discrepancy_d(gg, ff, u);
        CHECK(d == doctest::Approx(brute).epsilon(1e-12));
        CHECK(d >= -u - 1e-12);
        CHECK(d <= 1.0 - u + 1e-12);
      }
    }
  }
}

TEST_CASE("biparameter discrepancy d(G,F,u,v)") {
  Rng rng(45);
  for (int rep = 0; rep < 25; ++rep) {
    const int K = 2 + rep % 5;
    const DiscreteLaw f = oracle::random_law(K, rng);
    const DiscreteLaw g = oracle::random_law(K, rng);
    const auto grid = u_grid(f);
    for (double u : grid) {
      for (double v : grid) {
        // second-moment identity: E_G[I(u)I(v)] = u^v - delta_F(u,v) + d(G,F,u,v)
        const double brute = oracle::expect(g, [&](int y) {
          return oracle::transform_at(f, y, u) * oracle::transform_at(f, y, v);
        });
        const double claim =
            std::min(u, v) - gamma_cov(f, u, v) + discrepancy_d2(g, f, u, v);
        CHECK(brute == doctest::Approx(claim).epsilon(1e-12));
        CHECK(discrepancy_d2(f, f, u, v) ==
              doctest::Approx(0.0).epsilon(1e-15));
      }
    }
    // diagonal consistency with the univariate pieces
    for (double u : grid) {
      const double lhs = discrepancy_d2(g, f, u, u);
      const double rhs =
          discrepancy_d(g, f, u) -
          (delta_f(f, u) - delta_f(f, u) * delta_f(f, u)) *
              (g.pmf(f.quantile(u)) - f.pmf(f.quantile(u)));
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("Lipschitz-type bound on transform increments") {
  Rng rng(46);
  for (int rep = 0; rep < 100; ++rep) {
    const DiscreteLaw law = oracle::random_law(2 + rep % 6, rng);
    const auto grid = u_grid(law);
    for (double u : grid) {
      for (double v : grid) {
        for (int y = 1; y <= law.size(); ++y) {
          const double inc = std::abs(oracle::transform_at(law, y, u) - u -
                                      oracle::transform_at(law, y, v) + v);
          const double bound =
              std::max(std::abs(u - v), 1.0 - law.pmf(y));
          CHECK(inc <= bound + 1e-12);
          if ((u <= law.cdf(y - 1) && v <= law.cdf(y - 1)) ||
              (u >= law.cdf(y) && v >= law.cdf(y))) {
            CHECK(inc == doctest::Approx(std::abs(u - v)).epsilon(1e-12));
          }
        }
      }
    }
  }
}

TEST_CASE("perturbation bound with factor 9") {
  Rng rng(47);
  for (int rep = 0; rep < 500; ++rep) {
    const int K = 2 + rep % 6;
    const DiscreteLaw f = oracle::random_law(K, rng);
    const DiscreteLaw h = oracle::random_law(K, rng);
    double sup = 0.0;
    for (int k = 1; k <= K; ++k)
      sup = std::max(sup, std::abs(f.cdf(k) - h.cdf(k)));
    for (double u : {0.1, 0.3, 0.55, 0.8, 0.97}) {
      const double mean_sq = oracle::expect(f, [&](int y) {
        const double d =
            oracle::transform_at(f, y, u) - oracle::transform_at(h, y, u);
        return d * d;
      });
      CHECK(mean_sq <= 9.0 * sup + 1e-12);
    }
  }
}

TEST_CASE("noise expectations of the m-random transform (closed form)") {
  // E_z[1{U^r <= u}] = I(u) and
  // E_z[I_M(u) I_M(v)] = I(u^v)/M + (1-1/M) I(u)I(v),
  // checked by exact enumeration over the noise distribution per t: the
  // indicator is 1 iff z <= (u - lo)/(hi - lo) clipped to [0,1].
  const PitPair pair{0.3, 0.8};
  const auto indicator_mean = [&](double u) {
    if (u < pair.lo) return 0.0;
    if (u >= pair.hi) return 1.0;
    return (u - pair.lo) / (pair.hi - pair.lo);
  };
  for (double u : {0.1, 0.3, 0.45, 0.62, 0.9, 1.0}) {
    CHECK(indicator_mean(u) ==
          doctest::Approx(nonrandomized(pair, u)).epsilon(1e-15));
  }
  // z <= a and z <= b jointly have probability min(a,b); expand I_M I_M
  // into diagonal and off-diagonal noise terms
  for (int M : {1, 2, 5}) {
    for (double u : {0.35, 0.5, 0.79}) {
      for (double v : {0.31, 0.66}) {
        const double pu = indicator_mean(u);
        const double pv = indicator_mean(v);
        const double puv = std::min(pu, pv);
        const double closed =
            puv / M + (1.0 - 1.0 / M) * pu * pv;
        const double claim = nonrandomized(pair, std::min(u, v)) / M +
                             (1.0 - 1.0 / M) * nonrandomized(pair, u) *
                                 nonrandomized(pair, v);
        CHECK(closed == doctest::Approx(claim).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("noise expectations of the m-random transform (Monte Carlo)") {
  const PitPair pair{0.25, 0.65};
  Rng rng(48);
  const int reps = 20000;
  for (int M : {2, 4}) {
    const double u = 0.4, v = 0.6;
    double acc = 0.0, acc_sq = 0.0;
    std::vector<double> z(static_cast<std::size_t>(M));
    for (int r = 0; r < reps; ++r) {
      for (auto& zz : z) zz = rng.uniform();
      const double prod = m_random(pair, z, u) * m_random(pair, z, v);
      acc += prod;
      acc_sq += prod * prod;
    }
    const double mean = acc / reps;
    const double var = std::max(acc_sq / reps - mean * mean, 0.0);
    const double target = nonrandomized(pair, std::min(u, v)) / M +
                          (1.0 - 1.0 / M) * nonrandomized(pair, u) *
                              nonrandomized(pair, v);
    CHECK(std::abs(mean - target) <= 3.0 * std::sqrt(var / reps) + 1e-9);
  }
}

TEST_CASE("nabla drift for the ordered probit") {
  OrderedChoiceSpec spec;
  spec.K = 4;
  spec.p = 2;
  spec.dynamic = true;
  auto model = make_model(spec);
  Eigen::VectorXd theta(6);
  theta << 0.6, -0.4, -0.5, -1.2, 0.1, 1.4;

  ObservationSeries series;
  series.y.resize(3);
  series.y << 2, 4, 1;
  series.x = Eigen::MatrixXd(3, 2);
  series.x << 0.5, -1.0, 1.2, 0.3, -0.7, 0.9;

  std::vector<DiscreteLaw> laws;
  std::vector<Eigen::MatrixXd> fdot;
  model->laws_grad(theta, series, &laws, &fdot);

  SUBCASE("at cell tops the drift is Fdot itself") {
    const double u = laws[0].cdf(2);
    const Eigen::VectorXd nd = nabla_drift(laws[0], fdot[0], u);
    CHECK((nd - Eigen::VectorXd(fdot[0].row(1))).cwiseAbs().maxCoeff() <=
          1e-14);
  }

  SUBCASE("threshold components are the link density") {
    // Fdot of F(k) wrt tau_k is phi(tau_k - x'beta - rho y_lag)
    const double lag = series.y[0];  // self-lag convention at t = 0
    const double v =
        series.x(0, 0) * theta[0] + series.x(0, 1) * theta[1] + theta[2] * lag;
    for (int k = 1; k <= 3; ++k) {
      CHECK(fdot[0](k - 1, spec.tau_index(k)) ==
            doctest::Approx(normal_pdf(theta[spec.tau_index(k)] - v))
                .epsilon(1e-13));
      for (int j = 1; j <= 3; ++j)
        if (j != k) CHECK(fdot[0](k - 1, spec.tau_index(j)) == 0.0);
    }
  }

  SUBCASE("matches finite differences of the transform drift") {
    // d/dtheta of F_theta evaluated through the transform: compare
    // nabla_drift against central differences of I computed at fixed u
    // through the perturbed law, using E_G[I_F(Y,u)] - u = d(G,F,u)
    for (int t = 0; t < 3; ++t) {
      for (double u : {0.15, 0.42, 0.77}) {
        const Eigen::VectorXd nd = nabla_drift(laws[static_cast<std::size_t>(t)],
                                               fdot[static_cast<std::size_t>(t)], u);
        const Eigen::VectorXd fd = oracle::fd_gradient(
            [&](const Eigen::VectorXd& th) {
              std::vector<DiscreteLaw> l2;
              std::vector<Eigen::MatrixXd> f2;
              model->laws_grad(th, series, &l2, &f2);
              return discrepancy_d(l2[static_cast<std::size_t>(t)],
                                   laws[static_cast<std::size_t>(t)], u);
            },
            theta, 1e-5);
        for (int j = 0; j < 6; ++j)
          CHECK(nd[j] == doctest::Approx(fd[j]).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("transform series breakpoints") {
  Eigen::VectorXd lo(2), hi(2);
  lo << 0.0, 0.7;
  hi << 0.2, 1.0;
  const TransformSeries ts = TransformSeries::from_bounds(lo, hi);
  CHECK(ts.breakpoints.front() == 0.0);
  CHECK(ts.breakpoints.back() == 1.0);
  CHECK(ts.breakpoints.size() == 4);  // 0, 0.2, 0.7, 1
  for (std::size_t i = 1; i < ts.breakpoints.size(); ++i)
    CHECK(ts.breakpoints[i] > ts.breakpoints[i - 1]);

  Eigen::VectorXd bad_lo(1), bad_hi(1);
  bad_lo << 0.5;
  bad_hi << 0.5;
  CHECK_THROWS_AS(TransformSeries::from_bounds(bad_lo, bad_hi), NumericError);
}

TEST_CASE("pit bounds agree with the laws for both families") {
  // the fast pair path and the materialized laws must describe the same
  // conditional distribution, including the Poisson truncation fold
  {
    OrderedChoiceSpec spec;
    spec.K = 4;
    spec.p = 1;
    spec.dynamic = true;
    auto model = make_model(spec);
    Eigen::VectorXd theta(5);
    theta << 0.9, -0.7, -1.8, -0.2, 1.2;
    Rng rng(61);
    Eigen::MatrixXd x(40, 1);
    for (int t = 0; t < 40; ++t) x(t, 0) = rng.normal();
    const ObservationSeries sim = model->simulate(theta, x, 2.0, rng);
    Eigen::VectorXd lo, hi;
    model->pit_bounds(theta, sim, &lo, &hi);
    const auto laws = model->laws(theta, sim);
    for (int t = 0; t < 40; ++t) {
      CHECK(lo[t] == doctest::Approx(laws[static_cast<std::size_t>(t)].cdf(
                         sim.y[t] - 1)).epsilon(1e-14));
      CHECK(hi[t] == doctest::Approx(laws[static_cast<std::size_t>(t)].cdf(
                         sim.y[t])).epsilon(1e-14));
    }
  }
  {
    PoissonSpec spec;
    spec.link = PoissonSpec::Link::identity_ar;
    spec.lambda0 = 2.0;
    spec.y0 = 1.0;
    auto model = make_model(spec);
    Eigen::VectorXd theta(3);
    theta << 0.8, 0.35, 0.3;
    Rng rng(62);
    const ObservationSeries sim =
        model->simulate(theta, Eigen::MatrixXd(60, 0), 1.0, rng);
    Eigen::VectorXd lo, hi;
    model->pit_bounds(theta, sim, &lo, &hi);
    const auto laws = model->laws(theta, sim);
    for (int t = 0; t < 60; ++t) {
      const auto& law = laws[static_cast<std::size_t>(t)];
      const int y_eff = std::min(sim.y[t], law.size());
      CHECK(lo[t] == doctest::Approx(law.cdf(y_eff - 1)).epsilon(1e-14));
      CHECK(hi[t] == doctest::Approx(law.cdf(y_eff)).epsilon(1e-14));
    }
  }
}

TEST_CASE("noise matrix reproducibility") {
  const NoiseMatrix a = NoiseMatrix::draw(10, 3, 99);
  const NoiseMatrix b = NoiseMatrix::draw(10, 3, 99);
  CHECK((a.z - b.z).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.z.array() >= 0.0).all());
  CHECK((a.z.array() < 1.0).all());
}
