#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hkconv {

using CostMatrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// (min,+) product: (A (x) B)[i][k] = min_j A[i][j] + B[j][k].
inline CostMatrix minplus_multiply(const CostMatrix& A, const CostMatrix& B) {
  if (A.cols() != B.rows()) throw std::invalid_argument("minplus_multiply: inner dimensions differ");
  CostMatrix C = CostMatrix::Constant(A.rows(), B.cols(), kInf);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      const double aij = A(i, j);
      if (aij == kInf) continue;
      for (Eigen::Index k = 0; k < B.cols(); ++k) C(i, k) = std::min(C(i, k), aij + B(j, k));
    }
  return C;
}

struct MinPlusResult {
  double value = 0.0;
  // Minimizing chain x0 = z0, y1, x1, ..., yN, xN = z1 (2N + 1 indices).
  std::vector<std::size_t> chain;
};

namespace detail {

inline void check_square(const CostMatrix& c, const char* what) {
  if (c.rows() != c.cols() || c.rows() == 0) throw std::invalid_argument(std::string(what) + ": cost matrix must be square and nonempty");
}

// One relaxation v'[y] = min_x v[x] + C[x][y], smallest x on ties.
inline void relax(const std::vector<double>& v, const CostMatrix& C, std::vector<double>& out,
                  std::vector<std::size_t>& arg) {
  const std::size_t n = v.size();
  out.assign(n, kInf);
  arg.assign(n, 0);
  for (std::size_t x = 0; x < n; ++x) {
    if (v[x] == kInf) continue;
    for (std::size_t y = 0; y < n; ++y) {
      const double c = v[x] + C(x, y);
      if (c < out[y]) out[y] = c, arg[y] = x;
    }
  }
}

}  // namespace detail

/// N * (M^{(x)N})[z0][z1] with M = c1sq (x) c2sq: the minimal N-path energy
/// over the finite candidate set. Evaluated as 2N vector-matrix relaxations,
/// alternating c1sq and c2sq, so the cost is O(N n^2).
inline MinPlusResult minplus_infconv(const CostMatrix& c1sq, const CostMatrix& c2sq, std::size_t z0, std::size_t z1,
                                     std::size_t N) {
  detail::check_square(c1sq, "minplus_infconv");
  detail::check_square(c2sq, "minplus_infconv");
  if (c1sq.rows() != c2sq.rows()) throw std::invalid_argument("minplus_infconv: cost matrices differ in size");
  const std::size_t n = static_cast<std::size_t>(c1sq.rows());
  if (z0 >= n || z1 >= n) throw std::out_of_range("minplus_infconv: endpoint index out of range");
  if (N == 0) throw std::invalid_argument("minplus_infconv: N must be positive");

  std::vector<double> v(n, kInf), next;
  v[z0] = 0.0;
  std::vector<std::vector<std::size_t>> parent(2 * N);
  for (std::size_t s = 0; s < 2 * N; ++s) {
    detail::relax(v, s % 2 == 0 ? c1sq : c2sq, next, parent[s]);
    v.swap(next);
  }

  MinPlusResult out;
  out.value = v[z1] == kInf ? kInf : static_cast<double>(N) * v[z1];
  if (v[z1] == kInf) return out;
  out.chain.assign(2 * N + 1, 0);
  std::size_t cur = z1;
  for (std::size_t s = 2 * N; s-- > 0;) {
    out.chain[s + 1] = cur;
    cur = parent[s][cur];
  }
  out.chain[0] = cur;
  return out;
}

struct StabilityEntry {
  std::size_t N = 0;
  double value = 0.0;      // F_N = N * (costsq^{(x)N})[z0][z1]
  double reference = 0.0;  // costsq[z0][z1]
  double deviation = 0.0;  // value - reference
  double slack = 0.0;
  bool within = false;
};

struct StabilityReport {
  std::vector<StabilityEntry> entries;
  bool stable = true;
};

struct StabilityOptions {
  double tol = 1e-12;
  // Spacing of a uniform path-graph discretization, if the candidate set is
  // one. Splitting k grid steps into N integer parts costs h^2 r (N - r)
  // above the continuum value, with r = k mod N; the slack widens by the
  // worst case h^2 N^2 / 4.
  double grid_step = 0.0;
};

/// Chained self-minimization F_N of a squared cost and whether it reproduces
/// costsq[z0][z1] across N.
inline StabilityReport stability_probe(const CostMatrix& costsq, std::size_t z0, std::size_t z1,
                                       const std::vector<std::size_t>& N_list, const StabilityOptions& opts = {}) {
  detail::check_square(costsq, "stability_probe");
  const std::size_t n = static_cast<std::size_t>(costsq.rows());
  if (z0 >= n || z1 >= n) throw std::out_of_range("stability_probe: endpoint index out of range");
  StabilityReport rep;
  const double ref = costsq(z0, z1);
  std::vector<double> v, next;
  std::vector<std::size_t> arg;
  for (std::size_t N : N_list) {
    if (N == 0) throw std::invalid_argument("stability_probe: N must be positive");
    v.assign(n, kInf);
    v[z0] = 0.0;
    for (std::size_t s = 0; s < N; ++s) {
      detail::relax(v, costsq, next, arg);
      v.swap(next);
    }
    StabilityEntry e;
    e.N = N;
    e.value = v[z1] == kInf ? kInf : static_cast<double>(N) * v[z1];
    e.reference = ref;
    e.deviation = e.value - ref;
    const double h = opts.grid_step, nn = static_cast<double>(N);
    e.slack = opts.tol * std::max(1.0, std::abs(ref)) + h * h * nn * nn / 4.0;
    e.within = std::abs(e.deviation) <= e.slack;
    rep.stable = rep.stable && e.within;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace hkconv
