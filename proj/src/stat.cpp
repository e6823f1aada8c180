#include "dgof/stat.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dgof {

namespace {

constexpr double kGaussOffset = 0.28867513459481287;  // 1/(2 sqrt(3))

}  // namespace

TestStatistic ks_1d(const Process1D& process) {
  TestStatistic stat;
  stat.norm = TestStatistic::Norm::KS;
  stat.dim = 1;
  const auto& knots = process.knots();
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double cand =
        std::max(std::abs(process.left()[i]), std::abs(process.right()[i]));
    if (cand > stat.value) {
      stat.value = cand;
      stat.arg1 = knots[i];
    }
  }
  return stat;
}

TestStatistic cvm_1d(const Process1D& process) {
  return cvm_1d(process, nullptr);
}

TestStatistic cvm_1d(const Process1D& process,
                     const std::function<double(double)>& phi_density) {
  TestStatistic stat;
  stat.norm = TestStatistic::Norm::CvM;
  stat.dim = 1;
  const auto& knots = process.knots();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double h = knots[i + 1] - knots[i];
    const double a = process.right()[i];
    const double b = process.left()[i + 1];
    for (int node = 0; node < 2; ++node) {
      const double w = node == 0 ? 0.5 - kGaussOffset : 0.5 + kGaussOffset;
      const double u = knots[i] + w * h;
      const double val = a + w * (b - a);
      const double density = phi_density ? phi_density(u) : 1.0;
      acc += 0.5 * h * val * val * density;
    }
  }
  stat.value = acc;
  return stat;
}

TestStatistic ks_2d(const Bilinear2D& process) {
  TestStatistic stat;
  stat.norm = TestStatistic::Norm::KS;
  stat.dim = 2;
  const auto& k1 = process.knots1();
  const auto& k2 = process.knots2();
  const Eigen::MatrixXd& corner = process.corner();
  for (std::size_t i = 0; i < k1.size(); ++i) {
    for (std::size_t j = 0; j < k2.size(); ++j) {
      const double cand = std::abs(corner(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)));
      if (cand > stat.value) {
        stat.value = cand;
        stat.arg1 = k1[i];
        stat.arg2 = k2[j];
      }
    }
  }
  return stat;
}

TestStatistic cvm_2d(const Bilinear2D& process, const StatOptions& opts) {
  TestStatistic stat;
  stat.norm = TestStatistic::Norm::CvM;
  stat.dim = 2;
  const auto& k1 = process.knots1();
  const auto& k2 = process.knots2();

  if (static_cast<int>(std::max(k1.size(), k2.size())) > opts.exact_knot_limit) {
    // midpoint rule on a fixed grid
    const int G = opts.grid_n;
    double acc = 0.0;
    for (int i = 0; i < G; ++i) {
      const double u1 = (i + 0.5) / G;
      for (int j = 0; j < G; ++j) {
        const double u2 = (j + 0.5) / G;
        const double v = process(u1, u2);
        acc += v * v;
      }
    }
    stat.value = acc / (static_cast<double>(G) * G);
    return stat;
  }

  const Eigen::MatrixXd& corner = process.corner();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < k1.size(); ++i) {
    const double h1 = k1[i + 1] - k1[i];
    for (std::size_t j = 0; j + 1 < k2.size(); ++j) {
      const double h2 = k2[j + 1] - k2[j];
      const double v00 = corner(static_cast<Eigen::Index>(i),
                                static_cast<Eigen::Index>(j));
      const double v10 = corner(static_cast<Eigen::Index>(i) + 1,
                                static_cast<Eigen::Index>(j));
      const double v01 = corner(static_cast<Eigen::Index>(i),
                                static_cast<Eigen::Index>(j) + 1);
      const double v11 = corner(static_cast<Eigen::Index>(i) + 1,
                                static_cast<Eigen::Index>(j) + 1);
      for (int na = 0; na < 2; ++na) {
        const double a = na == 0 ? 0.5 - kGaussOffset : 0.5 + kGaussOffset;
        for (int nb = 0; nb < 2; ++nb) {
          const double b = nb == 0 ? 0.5 - kGaussOffset : 0.5 + kGaussOffset;
          const double v = (1 - a) * (1 - b) * v00 + a * (1 - b) * v10 +
                           (1 - a) * b * v01 + a * b * v11;
          acc += 0.25 * h1 * h2 * v * v;
        }
      }
    }
  }
  stat.value = acc;
  return stat;
}

// ---------------------------------------------------------------------------
// Step-field sweeps. Cell (i,j) of the grid induced by the point cloud
// carries the constant count N(i,j) = #{points <= (x_i, y_j)}; the field is
// amp*(s N - nrm u1 u2) there. The incremental sweep keeps a per-y-knot
// count so no N matrix is ever materialized.

namespace {

struct SweepGrid {
  std::vector<double> xs, ys;       // sorted unique knots incl 0 and 1
  std::vector<int> order;           // points ordered by x
  std::vector<std::size_t> y_rank;  // y knot index per point
};

SweepGrid build_grid(const StepField2D& f) {
  SweepGrid g;
  g.xs = f.px();
  g.xs.push_back(0.0);
  g.xs.push_back(1.0);
  std::sort(g.xs.begin(), g.xs.end());
  g.xs.erase(std::unique(g.xs.begin(), g.xs.end()), g.xs.end());
  g.ys = f.py();
  g.ys.push_back(0.0);
  g.ys.push_back(1.0);
  std::sort(g.ys.begin(), g.ys.end());
  g.ys.erase(std::unique(g.ys.begin(), g.ys.end()), g.ys.end());

  const std::size_t n = f.px().size();
  g.order.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.order[i] = static_cast<int>(i);
  std::sort(g.order.begin(), g.order.end(),
            [&](int a, int b) { return f.px()[static_cast<std::size_t>(a)] <
                                       f.px()[static_cast<std::size_t>(b)]; });
  g.y_rank.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = std::lower_bound(g.ys.begin(), g.ys.end(), f.py()[i]);
    g.y_rank[i] = static_cast<std::size_t>(it - g.ys.begin());
  }
  return g;
}

}  // namespace

TestStatistic ks_2d(const StepField2D& process) {
  TestStatistic stat;
  stat.norm = TestStatistic::Norm::KS;
  stat.dim = 2;
  const SweepGrid g = build_grid(process);
  const double cs = process.indicator_scale();
  const double cp = process.product_scale();
  const std::size_t nx = g.xs.size(), ny = g.ys.size();
  std::vector<double> cnt(ny, 0.0);
  std::size_t ptr = 0;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    while (ptr < g.order.size() &&
           process.px()[static_cast<std::size_t>(g.order[ptr])] <= g.xs[i]) {
      cnt[g.y_rank[static_cast<std::size_t>(g.order[ptr])]] += 1.0;
      ++ptr;
    }
    double run = 0.0;
    const double xlo = g.xs[i], xhi = g.xs[i + 1];
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      run += cnt[j];
      const double c = cs * run;
      // |c - cp*u1*u2| is extremal where u1*u2 is: the low and high corners
      const double lo = std::abs(c - cp * xlo * g.ys[j]);
      const double hi = std::abs(c - cp * xhi * g.ys[j + 1]);
      if (lo > stat.value) {
        stat.value = lo;
        stat.arg1 = xlo;
        stat.arg2 = g.ys[j];
      }
      if (hi > stat.value) {
        stat.value = hi;
        stat.arg1 = xhi;
        stat.arg2 = g.ys[j + 1];
      }
    }
  }
  return stat;
}

TestStatistic cvm_2d(const StepField2D& process, const StatOptions& opts) {
  TestStatistic stat;
  stat.norm = TestStatistic::Norm::CvM;
  stat.dim = 2;
  const std::size_t n = process.px().size();
  if (static_cast<int>(n) + 2 > opts.exact_knot_limit) {
    const int G = opts.grid_n;
    // histogram of points binned by the first grid point dominating them
    std::vector<double> mids(static_cast<std::size_t>(G));
    for (int i = 0; i < G; ++i) mids[static_cast<std::size_t>(i)] = (i + 0.5) / G;
    std::vector<double> hist(static_cast<std::size_t>(G) * G, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      const auto bx = std::lower_bound(mids.begin(), mids.end(), process.px()[p]);
      const auto by = std::lower_bound(mids.begin(), mids.end(), process.py()[p]);
      if (bx == mids.end() || by == mids.end()) continue;
      hist[static_cast<std::size_t>(bx - mids.begin()) * G +
           static_cast<std::size_t>(by - mids.begin())] += 1.0;
    }
    const double cs = process.indicator_scale();
    const double cp = process.product_scale();
    double acc = 0.0;
    std::vector<double> colcum(static_cast<std::size_t>(G), 0.0);
    for (int i = 0; i < G; ++i) {
      double run = 0.0;
      for (int j = 0; j < G; ++j) {
        colcum[static_cast<std::size_t>(j)] +=
            hist[static_cast<std::size_t>(i) * G + static_cast<std::size_t>(j)];
        run += colcum[static_cast<std::size_t>(j)];
        const double v = cs * run - cp * mids[static_cast<std::size_t>(i)] *
                                        mids[static_cast<std::size_t>(j)];
        acc += v * v;
      }
    }
    stat.value = acc / (static_cast<double>(G) * G);
    return stat;
  }

  const SweepGrid g = build_grid(process);
  const double cs = process.indicator_scale();
  const double cp = process.product_scale();
  const std::size_t nx = g.xs.size(), ny = g.ys.size();
  std::vector<double> cnt(ny, 0.0);

  // per-interval moments of u and u^2 along y, reused for every x strip
  std::vector<double> hy(ny - 1), iy(ny - 1), jy(ny - 1);
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    const double a = g.ys[j], b = g.ys[j + 1];
    hy[j] = b - a;
    iy[j] = 0.5 * (b * b - a * a);
    jy[j] = (b * b * b - a * a * a) / 3.0;
  }

  double acc = 0.0;
  std::size_t ptr = 0;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    while (ptr < g.order.size() &&
           process.px()[static_cast<std::size_t>(g.order[ptr])] <= g.xs[i]) {
      cnt[g.y_rank[static_cast<std::size_t>(g.order[ptr])]] += 1.0;
      ++ptr;
    }
    const double a = g.xs[i], b = g.xs[i + 1];
    const double hx = b - a;
    const double ix = 0.5 * (b * b - a * a);
    const double jx = (b * b * b - a * a * a) / 3.0;
    double run = 0.0;
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      run += cnt[j];
      const double c = cs * run;
      // integral of (c - cp u1 u2)^2 over the cell in closed form
      acc += c * c * hx * hy[j] - 2.0 * c * cp * ix * iy[j] +
             cp * cp * jx * jy[j];
    }
  }
  stat.value = acc;
  return stat;
}

}  // namespace dgof
