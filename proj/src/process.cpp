#include "dgof/process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dgof {

namespace {

void check_knots(const std::vector<double>& knots) {
  if (knots.size() < 2) throw ValidationError("process needs >= 2 knots");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      throw ValidationError("knots must be strictly increasing");
}

}  // namespace

// ---------------------------------------------------------------------------
// Process1D

Process1D Process1D::continuous(std::vector<double> knots,
                                std::vector<double> values) {
  check_knots(knots);
  if (values.size() != knots.size())
    throw ValidationError("knot/value size mismatch");
  Process1D p;
  p.knots_ = std::move(knots);
  p.left_ = values;
  p.right_ = std::move(values);
  return p;
}

Process1D Process1D::with_jumps(std::vector<double> knots,
                                std::vector<double> left,
                                std::vector<double> right) {
  check_knots(knots);
  if (left.size() != knots.size() || right.size() != knots.size())
    throw ValidationError("knot/value size mismatch");
  Process1D p;
  p.knots_ = std::move(knots);
  p.left_ = std::move(left);
  p.right_ = std::move(right);
  return p;
}

double Process1D::operator()(double u) const {
  if (u <= knots_.front()) return right_.front();
  if (u >= knots_.back()) return right_.back();
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  if (u == knots_[i]) return right_[i];
  const double h = knots_[i + 1] - knots_[i];
  const double w = (u - knots_[i]) / h;
  return right_[i] + w * (left_[i + 1] - right_[i]);
}

Process1D Process1D::scaled(double c) const {
  Process1D p = *this;
  for (auto& v : p.left_) v *= c;
  for (auto& v : p.right_) v *= c;
  return p;
}

// ---------------------------------------------------------------------------
// Bilinear2D

Bilinear2D::Bilinear2D(std::vector<double> k1, std::vector<double> k2,
                       Eigen::MatrixXd corner)
    : k1_(std::move(k1)), k2_(std::move(k2)), corner_(std::move(corner)) {
  check_knots(k1_);
  check_knots(k2_);
  if (corner_.rows() != static_cast<Eigen::Index>(k1_.size()) ||
      corner_.cols() != static_cast<Eigen::Index>(k2_.size()))
    throw ValidationError("corner matrix does not match the knot grid");
}

double Bilinear2D::operator()(double u1, double u2) const {
  const auto locate = [](const std::vector<double>& k, double u) {
    if (u <= k.front()) return std::pair<std::size_t, double>{0, 0.0};
    if (u >= k.back())
      return std::pair<std::size_t, double>{k.size() - 2, 1.0};
    const auto it = std::upper_bound(k.begin(), k.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - k.begin()) - 1;
    return std::pair<std::size_t, double>{i, (u - k[i]) / (k[i + 1] - k[i])};
  };
  const auto [i, a] = locate(k1_, u1);
  const auto [j, b] = locate(k2_, u2);
  const Eigen::Index ii = static_cast<Eigen::Index>(i);
  const Eigen::Index jj = static_cast<Eigen::Index>(j);
  return (1 - a) * (1 - b) * corner_(ii, jj) + a * (1 - b) * corner_(ii + 1, jj) +
         (1 - a) * b * corner_(ii, jj + 1) + a * b * corner_(ii + 1, jj + 1);
}

Bilinear2D Bilinear2D::scaled(double c) const {
  return Bilinear2D(k1_, k2_, c * corner_);
}

// ---------------------------------------------------------------------------
// StepField2D

StepField2D::StepField2D(std::vector<double> px, std::vector<double> py,
                         double s, double nrm)
    : px_(std::move(px)), py_(std::move(py)), s_(s), nrm_(nrm) {
  if (px_.size() != py_.size())
    throw ValidationError("point coordinate size mismatch");
}

double StepField2D::operator()(double u1, double u2) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < px_.size(); ++i)
    if (px_[i] <= u1 && py_[i] <= u2) ++n;
  return amp_ * (s_ * static_cast<double>(n) - nrm_ * u1 * u2);
}

StepField2D StepField2D::scaled(double c) const {
  StepField2D f = *this;
  f.amp_ *= c;
  return f;
}

// ---------------------------------------------------------------------------
// S processes

double s1_eval(const TransformSeries& ts, double u) {
  const int T = ts.length();
  double acc = 0.0;
  for (const auto& pair : ts.pairs) acc += nonrandomized(pair, u) - u;
  return acc / std::sqrt(static_cast<double>(T));
}

Process1D s1_process(const TransformSeries& ts) {
  std::vector<double> values(ts.breakpoints.size());
  for (std::size_t i = 0; i < ts.breakpoints.size(); ++i)
    values[i] = s1_eval(ts, ts.breakpoints[i]);
  return Process1D::continuous(ts.breakpoints, std::move(values));
}

double s2_eval(const TransformSeries& ts, double u1, double u2) {
  const int T = ts.length();
  if (T < 2) throw ValidationError("s2 needs T >= 2");
  double acc = 0.0;
  for (int t = 1; t < T; ++t) {
    acc += nonrandomized(ts.pairs[static_cast<std::size_t>(t)], u1) *
               nonrandomized(ts.pairs[static_cast<std::size_t>(t) - 1], u2) -
           u1 * u2;
  }
  return acc / std::sqrt(static_cast<double>(T - 1));
}

Bilinear2D s2_process(const TransformSeries& ts) {
  const int T = ts.length();
  if (T < 2) throw ValidationError("s2 needs T >= 2");
  const int B = static_cast<int>(ts.breakpoints.size());
  Eigen::MatrixXd all(T, B);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < B; ++i)
      all(t, i) = nonrandomized(ts.pairs[static_cast<std::size_t>(t)],
                                ts.breakpoints[static_cast<std::size_t>(i)]);
  const Eigen::MatrixXd cur = all.bottomRows(T - 1);
  const Eigen::MatrixXd lag = all.topRows(T - 1);
  Eigen::MatrixXd corner = cur.transpose() * lag;
  const Eigen::Map<const Eigen::VectorXd> b(ts.breakpoints.data(), B);
  corner.noalias() -= static_cast<double>(T - 1) * (b * b.transpose());
  corner /= std::sqrt(static_cast<double>(T - 1));
  return Bilinear2D(ts.breakpoints, ts.breakpoints, std::move(corner));
}

// ---------------------------------------------------------------------------
// R processes

namespace {

// flattened randomized PITs, column-major in m so one noise column serves
// the whole series
std::vector<double> jittered_pits(const TransformSeries& ts,
                                  const NoiseMatrix& noise) {
  const int T = ts.length();
  const int M = static_cast<int>(noise.z.cols());
  if (noise.z.rows() != T)
    throw ValidationError("noise rows must match the series length");
  std::vector<double> u(static_cast<std::size_t>(T) * static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m)
    for (int t = 0; t < T; ++t)
      u[static_cast<std::size_t>(m) * static_cast<std::size_t>(T) +
        static_cast<std::size_t>(t)] =
          randomized_pit(ts.pairs[static_cast<std::size_t>(t)], noise.z(t, m));
  return u;
}

}  // namespace

double r1m_eval(const TransformSeries& ts, const NoiseMatrix& noise, double u) {
  const int T = ts.length();
  const int M = static_cast<int>(noise.z.cols());
  if (noise.z.rows() != T)
    throw ValidationError("noise rows must match the series length");
  double acc = 0.0;
  for (int t = 0; t < T; ++t) {
    const auto& pair = ts.pairs[static_cast<std::size_t>(t)];
    for (int m = 0; m < M; ++m)
      if (randomized_pit(pair, noise.z(t, m)) <= u) acc += 1.0;
  }
  const double frac = acc / (static_cast<double>(T) * M);
  return std::sqrt(static_cast<double>(T)) * (frac - u);
}

Process1D r1m_process(const TransformSeries& ts, const NoiseMatrix& noise) {
  const int T = ts.length();
  const int M = static_cast<int>(noise.z.cols());
  std::vector<double> u = jittered_pits(ts, noise);
  std::sort(u.begin(), u.end());

  std::vector<double> knots = u;
  knots.push_back(0.0);
  knots.push_back(1.0);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  const double root_t = std::sqrt(static_cast<double>(T));
  const double denom = static_cast<double>(T) * M;
  std::vector<double> left(knots.size()), right(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double b = knots[i];
    const auto lo = std::lower_bound(u.begin(), u.end(), b);
    const auto hi = std::upper_bound(u.begin(), u.end(), b);
    left[i] = root_t * (static_cast<double>(lo - u.begin()) / denom - b);
    right[i] = root_t * (static_cast<double>(hi - u.begin()) / denom - b);
  }
  return Process1D::with_jumps(std::move(knots), std::move(left),
                               std::move(right));
}

double r2m_eval(const TransformSeries& ts, const NoiseMatrix& noise, double u1,
                double u2) {
  const int T = ts.length();
  const int M = static_cast<int>(noise.z.cols());
  if (T < 2) throw ValidationError("r2m needs T >= 2");
  if (noise.z.rows() != T)
    throw ValidationError("noise rows must match the series length");
  double acc = 0.0;
  for (int t = 1; t < T; ++t) {
    const auto& cur = ts.pairs[static_cast<std::size_t>(t)];
    const auto& prev = ts.pairs[static_cast<std::size_t>(t) - 1];
    for (int m = 0; m < M; ++m) {
      const bool a = randomized_pit(cur, noise.z(t, m)) <= u1;
      const bool b = randomized_pit(prev, noise.z(t - 1, m)) <= u2;
      acc += (a && b ? 1.0 : 0.0) - u1 * u2;
    }
  }
  return acc / (std::sqrt(static_cast<double>(T - 1)) * M);
}

StepField2D r2m_process(const TransformSeries& ts, const NoiseMatrix& noise) {
  const int T = ts.length();
  const int M = static_cast<int>(noise.z.cols());
  if (T < 2) throw ValidationError("r2m needs T >= 2");
  if (noise.z.rows() != T)
    throw ValidationError("noise rows must match the series length");
  std::vector<double> px, py;
  px.reserve(static_cast<std::size_t>(T - 1) * static_cast<std::size_t>(M));
  py.reserve(px.capacity());
  for (int m = 0; m < M; ++m) {
    for (int t = 1; t < T; ++t) {
      px.push_back(randomized_pit(ts.pairs[static_cast<std::size_t>(t)],
                                  noise.z(t, m)));
      py.push_back(randomized_pit(ts.pairs[static_cast<std::size_t>(t) - 1],
                                  noise.z(t - 1, m)));
    }
  }
  const double nrm = std::sqrt(static_cast<double>(T - 1));
  return StepField2D(std::move(px), std::move(py), 1.0 / (nrm * M), nrm);
}

// ---------------------------------------------------------------------------
// Marked process

MarkedProcess::MarkedProcess(Eigen::VectorXd index, Eigen::MatrixXd resid)
    : index_(std::move(index)), resid_(std::move(resid)) {
  const int T = static_cast<int>(index_.size());
  if (resid_.rows() != T)
    throw ValidationError("marked process: index/resid size mismatch");
  const int K = static_cast<int>(resid_.cols());
  const double root_t = std::sqrt(static_cast<double>(T));

  std::vector<int> order(static_cast<std::size_t>(T));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return index_[a] < index_[b]; });

  z_at_index_.resize(T, K);
  Eigen::RowVectorXd cum = Eigen::RowVectorXd::Zero(K);
  int pos = 0;
  while (pos < T) {
    int end = pos;
    while (end < T && index_[order[static_cast<std::size_t>(end)]] ==
                          index_[order[static_cast<std::size_t>(pos)]])
      ++end;
    for (int q = pos; q < end; ++q)
      cum += resid_.row(order[static_cast<std::size_t>(q)]);
    for (int q = pos; q < end; ++q)
      z_at_index_.row(order[static_cast<std::size_t>(q)]) = cum / root_t;
    pos = end;
  }
}

double MarkedProcess::eval(int j, double y) const {
  const int T = static_cast<int>(index_.size());
  double acc = 0.0;
  for (int t = 0; t < T; ++t)
    if (index_[t] <= y) acc += resid_(t, j - 1);
  return acc / std::sqrt(static_cast<double>(T));
}

double MarkedProcess::pooled_cvm() const {
  const int T = static_cast<int>(index_.size());
  return z_at_index_.array().square().sum() / T;
}

double MarkedProcess::pooled_ks() const {
  const int T = static_cast<int>(index_.size());
  return z_at_index_.array().square().colwise().sum().maxCoeff() / T;
}

MarkedProcess z_marked(const OrderedChoiceSpec& spec,
                       const Eigen::VectorXd& theta,
                       const ObservationSeries& series) {
  const int T = series.length();
  Eigen::VectorXd index(T);
  Eigen::MatrixXd resid(T, spec.K);
  for (int t = 0; t < T; ++t) {
    InfoState info;
    info.x = series.x.row(t);
    info.y_lag = t == 0 ? series.y[0] : series.y[t - 1];
    double v = 0.0;
    for (int j = 0; j < spec.p; ++j) v += info.x[j] * theta[j];
    if (spec.dynamic) v += theta[spec.rho_index()] * info.y_lag;
    index[t] = v - theta[spec.tau_index(1)];
    // raw cell probabilities: deep-tail cells may be ~0, which is harmless
    // in the residual marks
    for (int k = 1; k <= spec.K; ++k)
      resid(t, k - 1) =
          (series.y[t] == k ? 1.0 : 0.0) - ordered_pmf(spec, theta, info, k);
  }
  return MarkedProcess(std::move(index), std::move(resid));
}

}  // namespace dgof
