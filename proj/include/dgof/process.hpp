#ifndef DGOF_PROCESS_HPP_
#define DGOF_PROCESS_HPP_

#include <Eigen/Dense>
#include <vector>

#include "dgof/model.hpp"
#include "dgof/transform.hpp"

namespace dgof {

// A one-parameter empirical process, piecewise linear between knots with
// possible jumps at knots (right-continuous). Continuous processes carry
// left == right everywhere.
class Process1D {
 public:
  static Process1D continuous(std::vector<double> knots,
                              std::vector<double> values);
  static Process1D with_jumps(std::vector<double> knots,
                              std::vector<double> left,
                              std::vector<double> right);

  double operator()(double u) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& left() const { return left_; }
  const std::vector<double>& right() const { return right_; }

  Process1D scaled(double c) const;

 private:
  std::vector<double> knots_, left_, right_;
};

// A biparameter process that is bilinear on every knot-grid cell and
// continuous (S2-type). corner(i,j) holds the value at (k1[i], k2[j]).
class Bilinear2D {
 public:
  Bilinear2D(std::vector<double> k1, std::vector<double> k2,
             Eigen::MatrixXd corner);

  double operator()(double u1, double u2) const;

  const std::vector<double>& knots1() const { return k1_; }
  const std::vector<double>& knots2() const { return k2_; }
  const Eigen::MatrixXd& corner() const { return corner_; }

  Bilinear2D scaled(double c) const;

 private:
  std::vector<double> k1_, k2_;
  Eigen::MatrixXd corner_;
};

// A biparameter indicator field amp * (s N(u1,u2) - nrm u1 u2) built from a
// point cloud, as arises from randomized-PIT products. N counts points
// dominated by (u1,u2).
class StepField2D {
 public:
  StepField2D(std::vector<double> px, std::vector<double> py, double s,
              double nrm);

  double operator()(double u1, double u2) const;  // O(n) per call

  const std::vector<double>& px() const { return px_; }
  const std::vector<double>& py() const { return py_; }
  double indicator_scale() const { return amp_ * s_; }
  double product_scale() const { return amp_ * nrm_; }

  StepField2D scaled(double c) const;

 private:
  std::vector<double> px_, py_;
  double s_, nrm_, amp_ = 1.0;
};

// --------------------------------------------------------------------------
// Nonrandomized-transform processes

// S1(u) = T^-1/2 sum_t (I_t(u) - u)
double s1_eval(const TransformSeries& ts, double u);
Process1D s1_process(const TransformSeries& ts);

// S2(u1,u2) = (T-1)^-1/2 sum_{t>=2} (I_t(u1) I_{t-1}(u2) - u1 u2)
double s2_eval(const TransformSeries& ts, double u1, double u2);
Bilinear2D s2_process(const TransformSeries& ts);

// --------------------------------------------------------------------------
// Randomized-transform processes; column m of the noise serves the whole
// series, pairing t with t-1 in the biparameter case.

// R1M(u) = T^1/2 (Fhat_M(u) - u), M = 1 recovering R1
double r1m_eval(const TransformSeries& ts, const NoiseMatrix& noise, double u);
Process1D r1m_process(const TransformSeries& ts, const NoiseMatrix& noise);

// R2M(u) = (T-1)^-1/2 M^-1 sum_{t,m} (1{U_{t,m} <= u1} 1{U_{t-1,m} <= u2}
//                                     - u1 u2)
double r2m_eval(const TransformSeries& ts, const NoiseMatrix& noise, double u1,
                double u2);
StepField2D r2m_process(const TransformSeries& ts, const NoiseMatrix& noise);

// --------------------------------------------------------------------------
// Marked empirical process over the fitted single index, one mark per
// category, with the pooled functionals used as test statistics.

class MarkedProcess {
 public:
  MarkedProcess(Eigen::VectorXd index, Eigen::MatrixXd resid);

  // Z_j(y) = T^-1/2 sum_t 1{index_t <= y} resid_{t,j}; j is 1-based.
  double eval(int j, double y) const;

  double pooled_cvm() const;
  double pooled_ks() const;

  int categories() const { return static_cast<int>(resid_.cols()); }

 private:
  Eigen::VectorXd index_;  // x~' beta~ per t
  Eigen::MatrixXd resid_;  // T x K: 1{Y_t = j} - P_j(t)
  Eigen::MatrixXd z_at_index_;  // Z_j evaluated at every sample index point
};

MarkedProcess z_marked(const OrderedChoiceSpec& spec,
                       const Eigen::VectorXd& theta,
                       const ObservationSeries& series);

}  // namespace dgof

#endif  // DGOF_PROCESS_HPP_
