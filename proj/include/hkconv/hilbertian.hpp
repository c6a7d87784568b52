#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hkconv/minplus.hpp"

namespace hkconv {

/// Dense symmetric positive-definite matrix of dimension at most 16.
class SPDMatrix {
 public:
  static constexpr Eigen::Index kMaxDim = 16;

  explicit SPDMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw std::invalid_argument("SPDMatrix: matrix must be square and nonempty");
    if (m_.rows() > kMaxDim) throw std::invalid_argument("SPDMatrix: dimension above 16");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("SPDMatrix: matrix is not symmetric");
    m_ = 0.5 * (m_ + m_.transpose());
    llt_.compute(m_);
    if (llt_.info() != Eigen::Success) throw std::domain_error("SPDMatrix: matrix is not positive definite");
  }

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  const Eigen::LLT<Eigen::MatrixXd>& llt() const noexcept { return llt_; }
  double quad(const Eigen::VectorXd& v) const { return v.dot(m_ * v); }

 private:
  Eigen::MatrixXd m_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline void require_same_dim(const SPDMatrix& A, const SPDMatrix& B, const char* what) {
  if (A.dim() != B.dim()) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

/// (A^{-1} + B^{-1})^{-1}, evaluated as B - B (A + B)^{-1} B.
inline SPDMatrix parallel_sum(const SPDMatrix& A, const SPDMatrix& B) {
  require_same_dim(A, B, "parallel_sum");
  const Eigen::MatrixXd& b = B.matrix();
  const Eigen::LLT<Eigen::MatrixXd> sum((A.matrix() + b).eval());
  if (sum.info() != Eigen::Success) throw std::domain_error("parallel_sum: A + B is not positive definite");
  Eigen::MatrixXd p = b - b * sum.solve(b);
  return SPDMatrix(0.5 * (p + p.transpose()));
}

/// Relative Frobenius distance between the stable form and the explicit
/// inverse form of the parallel sum.
inline double parallel_sum_form_gap(const SPDMatrix& A, const SPDMatrix& B) {
  require_same_dim(A, B, "parallel_sum_form_gap");
  const Eigen::MatrixXd P = parallel_sum(A, B).matrix();
  const Eigen::MatrixXd Q = (A.matrix().inverse() + B.matrix().inverse()).inverse();
  return (P - Q).norm() / std::max(Q.norm(), 1e-300);
}

struct OneStepResult {
  double value = 0.0;
  Eigen::VectorXd z_star;
};

/// min_z  z^T A z + (v - z)^T B (v - z); the minimizer is (A + B)^{-1} B v.
inline OneStepResult one_step_quadratic(const SPDMatrix& A, const SPDMatrix& B, const Eigen::VectorXd& v) {
  require_same_dim(A, B, "one_step_quadratic");
  if (v.size() != A.dim()) throw std::invalid_argument("one_step_quadratic: vector dimension mismatch");
  const Eigen::LLT<Eigen::MatrixXd> sum((A.matrix() + B.matrix()).eval());
  if (sum.info() != Eigen::Success) throw std::domain_error("one_step_quadratic: A + B is singular");
  OneStepResult r;
  r.z_star = sum.solve(B.matrix() * v);
  const Eigen::VectorXd w = v - r.z_star;
  r.value = A.quad(r.z_star) + B.quad(w);
  return r;
}

struct GridSpec {
  double step = 0.01;
  double margin = 0.25;  // added on each side of the bounding box of [0, v]
};

struct GridCheckResult {
  double metric_value = 0.0;
  double closed_form_value = 0.0;
  double gap = 0.0;            // metric - closed form
  double predicted_slack = 0.0;
  bool coarse_warning = false;  // gap beyond 10x the predicted slack
  std::size_t grid_points = 0;
};

/// One-step metric inf-convolution of the norms of A and B evaluated by
/// min-plus over a lattice covering [0, v], against v^T (A : B) v.
///
/// The lattice minimizer lies within step/2 of z* in each coordinate, so the
/// predicted slack is lambda_max(A + B) m step^2 / 4.
inline GridCheckResult grid_metric_check(const SPDMatrix& A, const SPDMatrix& B, const Eigen::VectorXd& v,
                                         const GridSpec& grid = {}) {
  require_same_dim(A, B, "grid_metric_check");
  const Eigen::Index m = A.dim();
  if (m > 2) throw std::invalid_argument("grid_metric_check: dimension must be 1 or 2");
  if (v.size() != m) throw std::invalid_argument("grid_metric_check: vector dimension mismatch");
  if (!(grid.step > 0.0) || !(grid.margin >= 0.0)) throw std::invalid_argument("grid_metric_check: invalid grid");

  // Lattice points k * step over the box, with 0 and v added exactly.
  std::vector<std::vector<long>> ranges(static_cast<std::size_t>(m));
  for (Eigen::Index c = 0; c < m; ++c) {
    const double lo = std::min(0.0, v(c)) - grid.margin, hi = std::max(0.0, v(c)) + grid.margin;
    for (long k = static_cast<long>(std::floor(lo / grid.step)); k <= static_cast<long>(std::ceil(hi / grid.step)); ++k)
      ranges[static_cast<std::size_t>(c)].push_back(k);
  }
  std::vector<Eigen::VectorXd> pts;
  pts.push_back(Eigen::VectorXd::Zero(m));
  pts.push_back(v);
  if (m == 1) {
    for (long k : ranges[0]) pts.push_back(Eigen::VectorXd::Constant(1, k * grid.step));
  } else {
    for (long i : ranges[0])
      for (long j : ranges[1]) pts.push_back((Eigen::VectorXd(2) << i * grid.step, j * grid.step).finished());
  }
  const auto n = static_cast<Eigen::Index>(pts.size());
  CostMatrix c1(n, n), c2(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::VectorXd w = pts[static_cast<std::size_t>(j)] - pts[static_cast<std::size_t>(i)];
      c1(i, j) = A.quad(w);
      c2(i, j) = B.quad(w);
    }

  GridCheckResult r;
  r.grid_points = pts.size();
  r.metric_value = minplus_infconv(c1, c2, 0, 1, 1).value;
  r.closed_form_value = parallel_sum(A, B).quad(v);
  r.gap = r.metric_value - r.closed_form_value;
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A.matrix() + B.matrix()).eigenvalues().maxCoeff();
  r.predicted_slack = lmax * static_cast<double>(m) * grid.step * grid.step / 4.0;
  r.coarse_warning = std::abs(r.gap) > 10.0 * r.predicted_slack + 1e-12;
  return r;
}

}  // namespace hkconv
