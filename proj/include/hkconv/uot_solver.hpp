#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "hkconv/cone_geometry.hpp"
#include "hkconv/measure.hpp"

namespace hkconv {

enum class CostKind { hk, whe, custom };

inline const char* to_string(CostKind k) {
  switch (k) {
    case CostKind::hk: return "hk";
    case CostKind::whe: return "whe";
    case CostKind::custom: return "custom";
  }
  return "unknown";
}

// Pair costs in mass variables: a is the mass leaving x_i, b the mass
// arriving at y_j, d = d(x_i, y_j).

inline double hk_pair_cost(double a, double b, double d) {
  const double k = std::cos(std::min(d, std::numbers::pi / 2));
  return std::max(0.0, a + b - 2.0 * k * std::sqrt(a * b));
}

// Convex envelope of the one-pair marginal entropy-transport cost. At d = 0
// the second branch is never taken.
inline double whe_pair_cost(double a, double b, double d) {
  const double d2 = d * d;
  if (d == 0.0 || b * d2 * d2 <= a) {
    const double s = std::sqrt(a) - std::sqrt(b);
    return s * s + b * d2;
  }
  return std::max(0.0, a + b - a / d2);
}

/// A jointly convex, 1-homogeneous cost c(a, b, d) on pairs of masses.
struct PairCost {
  CostKind kind = CostKind::hk;
  std::function<double(double, double, double)> custom;

  static PairCost hk() { return {CostKind::hk, {}}; }
  static PairCost whe() { return {CostKind::whe, {}}; }
  static PairCost make_custom(std::function<double(double, double, double)> f) {
    if (!f) throw std::invalid_argument("PairCost: empty custom evaluator");
    return {CostKind::custom, std::move(f)};
  }

  double operator()(double a, double b, double d) const {
    switch (kind) {
      case CostKind::hk: return hk_pair_cost(a, b, d);
      case CostKind::whe: return whe_pair_cost(a, b, d);
      case CostKind::custom: return custom(a, b, d);
    }
    return 0.0;
  }

  /// Gradient g and Hessian (haa, hab, hbb) at a, b > 0.
  void derivatives(double a, double b, double d, double g[2], double h[3]) const {
    if (kind == CostKind::custom) return finite_difference(a, b, d, g, h);
    double k = 1.0, shift = 0.0;
    if (kind == CostKind::hk) {
      k = std::cos(std::min(d, std::numbers::pi / 2));
    } else {
      const double d2 = d * d;
      if (d > 0.0 && b * d2 * d2 > a) {
        g[0] = 1.0 - 1.0 / d2;
        g[1] = 1.0;
        h[0] = h[1] = h[2] = 0.0;
        return;
      }
      shift = d2;
    }
    const double sa = std::sqrt(a), sb = std::sqrt(b);
    g[0] = 1.0 - k * sb / sa;
    g[1] = 1.0 - k * sa / sb + shift;
    h[0] = 0.5 * k * sb / (a * sa);
    h[1] = -0.5 * k / (sa * sb);
    h[2] = 0.5 * k * sa / (b * sb);
  }

 private:
  void finite_difference(double a, double b, double d, double g[2], double h[3]) const {
    const double ha = 1e-4 * a, hb = 1e-4 * b;
    const double f = custom(a, b, d);
    const double fap = custom(a + ha, b, d), fam = custom(a - ha, b, d);
    const double fbp = custom(a, b + hb, d), fbm = custom(a, b - hb, d);
    g[0] = (fap - fam) / (2 * ha);
    g[1] = (fbp - fbm) / (2 * hb);
    double haa = (fap - 2 * f + fam) / (ha * ha);
    double hbb = (fbp - 2 * f + fbm) / (hb * hb);
    double hab = (custom(a + ha, b + hb, d) - custom(a + ha, b - hb, d) - custom(a - ha, b + hb, d) +
                  custom(a - ha, b - hb, d)) / (4 * ha * hb);
    // Keep the local model convex despite differencing noise.
    haa = std::max(haa, 0.0);
    hbb = std::max(hbb, 0.0);
    const double lim = std::sqrt(haa * hbb);
    hab = std::clamp(hab, -lim, lim);
    h[0] = haa;
    h[1] = hab;
    h[2] = hbb;
  }
};

/// Barrier weights as fractions of the total mass mu0(X) + mu1(X).
struct EpsilonSchedule {
  double start = 1e-4;
  double end = 1e-12;
  double factor = 0.1;
};

struct SolveOptions {
  double tol = 1e-7;             // relative optimality target
  std::size_t max_iter = 100000; // total Newton iterations
  EpsilonSchedule epsilon_schedule;
};

/// Finite semi-coupling (a, b) over rows x cols, row-major. A null side is
/// represented by a single phantom row or column at ConePoint::kVertex.
struct SemiCoupling {
  std::vector<std::size_t> rows, cols;
  std::vector<double> a, b;
  std::vector<double> dist;

  std::size_t n_rows() const noexcept { return rows.size(); }
  std::size_t n_cols() const noexcept { return cols.size(); }
  double a_at(std::size_t i, std::size_t j) const { return a[i * cols.size() + j]; }
  double b_at(std::size_t i, std::size_t j) const { return b[i * cols.size() + j]; }

  std::vector<double> row_sums() const {
    std::vector<double> s(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) s[i] += a_at(i, j);
    return s;
  }
  std::vector<double> col_sums() const {
    std::vector<double> s(cols.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) s[j] += b_at(i, j);
    return s;
  }
  double evaluate(const PairCost& c) const {
    double v = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) v += c(a[k], b[k], dist[k]);
    return v;
  }
};

struct UOTResult {
  double value = 0.0;
  SemiCoupling plan;
  std::size_t iterations = 0;
  double barrier_weight = 0.0;  // final barrier weight t
  double gap_bound = 0.0;       // barrier suboptimality bound 2 n t
};

class UOTNonConvergence : public std::runtime_error {
 public:
  UOTNonConvergence(const std::string& msg, UOTResult best) : std::runtime_error(msg), incumbent(std::move(best)) {}
  UOTResult incumbent;
};

namespace detail {

inline SemiCoupling semi_coupling_frame(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  SemiCoupling p;
  p.rows = mu0.is_null() ? std::vector<std::size_t>{ConePoint::kVertex} : mu0.support();
  p.cols = mu1.is_null() ? std::vector<std::size_t>{ConePoint::kVertex} : mu1.support();
  const std::size_t n = p.rows.size() * p.cols.size();
  p.a.assign(n, 0.0);
  p.b.assign(n, 0.0);
  p.dist.assign(n, 0.0);
  if (!mu0.is_null() && !mu1.is_null())
    for (std::size_t i = 0; i < p.rows.size(); ++i)
      for (std::size_t j = 0; j < p.cols.size(); ++j)
        p.dist[i * p.cols.size() + j] = mu0.space().distance(p.rows[i], p.cols[j]);
  return p;
}

// Degenerate instances where one side is null: the plan is forced.
inline UOTResult solve_degenerate(const PairCost& cost, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  UOTResult r;
  if (mu0.is_null() && mu1.is_null()) return r;
  r.plan = semi_coupling_frame(mu0, mu1);
  if (mu1.is_null()) {
    r.plan.a = mu0.masses();
  } else {
    r.plan.b = mu1.masses();
  }
  r.value = r.plan.evaluate(cost);
  return r;
}

}  // namespace detail

/// Minimizes sum_ij c(a_ij, b_ij, d_ij) over semi-couplings with
/// sum_j a_ij = mu0_i and sum_i b_ij = mu1_j.
///
/// Primal log-barrier method: for a decreasing barrier weight t the smooth
/// problem  sum c - t sum(log a + log b)  is solved by equality-constrained
/// Newton steps. Each pair contributes a 2x2 Hessian block, so the KKT system
/// reduces to an (n0 + n1)-dimensional Schur complement. The final barrier
/// weight bounds the suboptimality by 2 n0 n1 t.
inline UOTResult solve_uot(const PairCost& cost, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                           const SolveOptions& opts = {}) {
  DiscreteMeasure::require_same_space(mu0, mu1, "solve_uot");
  if (mu0.is_null() || mu1.is_null()) return detail::solve_degenerate(cost, mu0, mu1);

  UOTResult res;
  SemiCoupling& p = res.plan;
  p = detail::semi_coupling_frame(mu0, mu1);
  const std::size_t n0 = p.n_rows(), n1 = p.n_cols(), np = n0 * n1;
  const std::vector<double> m0 = mu0.masses(), m1 = mu1.masses();
  const double M0 = mu0.total_mass(), M1 = mu1.total_mass(), M = M0 + M1;
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) {
      p.a[i * n1 + j] = m0[i] * m1[j] / M1;
      p.b[i * n1 + j] = m0[i] * m1[j] / M0;
    }

  const auto& sched = opts.epsilon_schedule;
  if (!(sched.start > 0.0 && sched.end > 0.0 && sched.factor > 0.0 && sched.factor < 1.0))
    throw std::invalid_argument("solve_uot: invalid barrier schedule");

  // The Schur complement has entries of order 1/t while its solution stays
  // of order one, so it is assembled and solved in extended precision.
  using Real = long double;
  std::vector<double> ga(np), gb(np), da(np), db(np);
  std::vector<Real> iaa(np), iab(np), ibb(np);
  Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> S(n0 + n1, n0 + n1);
  Eigen::Matrix<Real, Eigen::Dynamic, 1> rhs(n0 + n1);

  auto objective = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    double f = 0.0;
    for (std::size_t k = 0; k < np; ++k) f += cost(a[k], b[k], p.dist[k]) - t * (std::log(a[k]) + std::log(b[k]));
    return f;
  };

  // Row constraints only involve a and column constraints only involve b, so
  // rescaling restores exact feasibility and keeps solve errors from leaking
  // into the marginals.
  auto project_marginals = [&](std::vector<double>& a, std::vector<double>& b) {
    for (std::size_t i = 0; i < n0; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n1; ++j) s += a[i * n1 + j];
      for (std::size_t j = 0; j < n1; ++j) a[i * n1 + j] *= m0[i] / s;
    }
    for (std::size_t j = 0; j < n1; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n0; ++i) s += b[i * n1 + j];
      for (std::size_t i = 0; i < n0; ++i) b[i * n1 + j] *= m1[j] / s;
    }
  };

  // A stage is certified when its Newton decrement (dec) ends below a hundredth of
  // t. Then value - OPT <= t (m + sqrt(m dec / t)) with m = 2 np barrier
  // terms, which gives the lower bound kept in `lower`. Once a stage fails
  // to certify, the linear algebra has run out of precision and refining
  // further only adds noise.
  const double m = 2.0 * static_cast<double>(np);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double t = sched.start * M;
  const double t_floor = 1e-18 * M;
  double lower = -kInf, best_value = kInf, best_t = t;
  std::vector<double> best_a, best_b;
  std::vector<double> a_try(np), b_try(np);
  auto finish = [&] {
    p.a = best_a;
    p.b = best_b;
    res.value = best_value;
    res.barrier_weight = best_t;
    res.gap_bound = std::max(0.0, best_value - lower);
    return res;
  };
  for (;;) {
    double dec = kInf;
    bool centered = false;
    for (std::size_t newton = 0;; ++newton) {
      if (res.iterations >= opts.max_iter) {
        const double v = p.evaluate(cost);
        if (v < best_value) best_value = v, best_a = p.a, best_b = p.b, best_t = t;
        finish();
        if (!std::isfinite(lower)) res.gap_bound = kInf;
        throw UOTNonConvergence("solve_uot: iteration limit reached", res);
      }
      ++res.iterations;

      S.setZero();
      rhs.setZero();
      for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j) {
          const std::size_t k = i * n1 + j;
          const double a = p.a[k], b = p.b[k];
          double g[2], h[3];
          cost.derivatives(a, b, p.dist[k], g, h);
          const Real ta = Real(t) / (Real(a) * a), tb = Real(t) / (Real(b) * b);
          ga[k] = g[0] - t / a;
          gb[k] = g[1] - t / b;
          // (h + diag(ta, tb))^{-1}; the determinant is expanded so that the
          // cancellation inside the rank-one cost block never happens.
          const Real hc = std::max(Real(0), Real(h[0]) * h[2] - Real(h[1]) * h[1]);
          const Real det = hc + h[0] * tb + h[2] * ta + ta * tb;
          iaa[k] = (h[2] + tb) / det;
          ibb[k] = (h[0] + ta) / det;
          iab[k] = -h[1] / det;
          S(i, i) += iaa[k];
          S(n0 + j, n0 + j) += ibb[k];
          S(i, n0 + j) += iab[k];
          S(n0 + j, i) += iab[k];
          rhs(i) -= iaa[k] * ga[k] + iab[k] * gb[k];
          rhs(n0 + j) -= iab[k] * ga[k] + ibb[k] * gb[k];
        }
      const Eigen::Matrix<Real, Eigen::Dynamic, 1> w = S.ldlt().solve(rhs);

      Real dec_acc = 0;
      double step = 1.0;
      for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j) {
          const std::size_t k = i * n1 + j;
          const Real ra = ga[k] + w(i), rb = gb[k] + w(n0 + j);
          da[k] = static_cast<double>(-(iaa[k] * ra + iab[k] * rb));
          db[k] = static_cast<double>(-(iab[k] * ra + ibb[k] * rb));
          // -g.d = r^T H^{-1} r on the constraint null space, written as a
          // quadratic form so it cannot turn negative through cancellation.
          dec_acc += ra * (iaa[k] * ra + iab[k] * rb) + rb * (iab[k] * ra + ibb[k] * rb);
          if (da[k] < 0.0) step = std::min(step, -0.99 * p.a[k] / da[k]);
          if (db[k] < 0.0) step = std::min(step, -0.99 * p.b[k] / db[k]);
        }
      dec = static_cast<double>(dec_acc);
      if (!std::isfinite(dec)) throw UOTNonConvergence("solve_uot: non-finite Newton step", res);
      if (dec <= 1e-2 * t) {
        centered = true;
        break;
      }

      const double f0 = objective(p.a, p.b, t);
      bool moved = false;
      for (; step > 1e-14; step *= 0.5) {
        for (std::size_t k = 0; k < np; ++k) {
          a_try[k] = p.a[k] + step * da[k];
          b_try[k] = p.b[k] + step * db[k];
        }
        project_marginals(a_try, b_try);
        const double f1 = objective(a_try, b_try, t);
        if (f1 <= f0 - 0.25 * step * dec + 1e-15 * std::abs(f0)) {
          moved = f1 < f0 - 1e-15 * std::abs(f0);
          std::swap(p.a, a_try);
          std::swap(p.b, b_try);
          break;
        }
      }
      if (!moved || newton >= 200) break;
    }

    const double value = p.evaluate(cost);
    if (value < best_value) best_value = value, best_a = p.a, best_b = p.b, best_t = t;
    if (centered) lower = std::max(lower, value - t * (m + std::sqrt(m * std::max(dec, 0.0) / t)));
    const bool scheduled_done = t <= sched.end * M * (1.0 + 1e-12);
    const double gap = best_value - lower;
    if ((scheduled_done && gap <= opts.tol * std::max(best_value, 1e-12 * M)) || t <= t_floor ||
        (!centered && std::isfinite(lower)))
      return finish();
    t *= sched.factor;
  }
}

inline double hk_squared(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, const SolveOptions& opts = {}) {
  return solve_uot(PairCost::hk(), mu0, mu1, opts).value;
}

/// Hellinger-Kantorovich distance.
inline double hk_distance(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, const SolveOptions& opts = {}) {
  return std::sqrt(hk_squared(mu0, mu1, opts));
}

struct WHeResult {
  double value = 0.0;
  SemiCoupling plan;
  DiscreteMeasure nu_star;
  std::size_t iterations = 0;
};

/// Optimal intermediate measure read off a WHe semi-coupling: each pair keeps
/// s_ij at x_i, the part that is transported, and leaves b_ij - s_ij at y_j.
inline DiscreteMeasure reconstruct_nu(const SemiCoupling& plan, const SpacePtr& space) {
  std::map<std::size_t, double> acc;
  const std::size_t n1 = plan.n_cols();
  for (std::size_t i = 0; i < plan.n_rows(); ++i)
    for (std::size_t j = 0; j < n1; ++j) {
      const std::size_t k = i * n1 + j;
      const double a = plan.a[k], b = plan.b[k], d = plan.dist[k], d4 = d * d * d * d;
      if (b <= 0.0) continue;
      double s;
      if (d == 0.0 || b * d4 <= a) s = b;
      else s = a / d4;
      if (plan.rows[i] == ConePoint::kVertex) s = 0.0;
      if (s > 0.0) acc[plan.rows[i]] += s;
      if (b - s > 0.0) acc[plan.cols[j]] += b - s;
    }
  return DiscreteMeasure::from_map(space, acc);
}

/// inf over nu of He_2^2(mu0, nu) + W_2^2(nu, mu1), with an optimal nu.
inline WHeResult whe_cost(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, const SolveOptions& opts = {}) {
  UOTResult r = solve_uot(PairCost::whe(), mu0, mu1, opts);
  WHeResult out{r.value, std::move(r.plan), DiscreteMeasure(mu0.space_ptr()), r.iterations};
  out.nu_star = mu0.is_null() ? mu1 : reconstruct_nu(out.plan, mu0.space_ptr());
  return out;
}

struct BruteForceOptions {
  std::size_t max_levels = 60;
  double rel_step = 1e-10;  // stop once the step is this small relative to the mass
};

struct BruteForceResult {
  double value = 0.0;
  std::vector<double> level_values;  // incumbent after each zoom level
  std::vector<double> level_steps;   // grid step (mass units) of each level
  double modulus_bound = 0.0;        // continuity bound at the finest step
};

namespace detail {

struct ZoomTrace {
  double x = 0.0, value = 0.0, finest = 0.0;
  std::vector<double> values, steps;
};

// Five-point grid over a window of [0, R]; the next window is the two cells
// around the incumbent, so the step halves at every level. For a convex f the
// minimizer never leaves the window.
template <class F>
ZoomTrace zoom_min(F&& f, double R, const BruteForceOptions& opts, bool trace) {
  ZoomTrace z;
  if (!(R > 0.0)) {
    z.value = f(0.0);
    return z;
  }
  double lo = 0.0, step = 0.25 * R;
  z.x = 0.5 * R;
  z.value = f(z.x);
  for (std::size_t level = 0; level < opts.max_levels; ++level) {
    for (int k = 0; k <= 4; ++k) {
      const double x = std::min(R, lo + step * k);
      if (x == z.x) continue;
      const double v = f(x);
      if (v < z.value) z.value = v, z.x = x;
    }
    z.finest = step;
    if (trace) {
      z.values.push_back(z.value);
      z.steps.push_back(step);
    }
    if (step <= opts.rel_step * R) break;
    lo = std::clamp(z.x - step, 0.0, R - 2.0 * step);
    step *= 0.5;
  }
  return z;
}

}  // namespace detail

/// Grid search over all semi-couplings of measures with at most two atoms per
/// side. A row with two partners has one free split, and so does a column.
/// Once the column splits are fixed the rows decouple, so the search nests
/// one-dimensional zooms: column splits outside, each row split inside. The
/// objective is jointly convex, partial minima stay convex, and each zoom
/// keeps the minimizer in its window. The recorded levels are those of the
/// outermost variable; their values never increase and their steps halve.
///
/// The bound uses |c(a,b) - c(a',b')| <= (2 + d^2) h + 2 sqrt(h A) + 2 sqrt(h B)
/// for perturbations of size h of a pair with masses bounded by A and B,
/// valid for both the HK and WHe costs.
inline BruteForceResult brute_force_uot(const PairCost& cost, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                        const BruteForceOptions& opts = {}) {
  DiscreteMeasure::require_same_space(mu0, mu1, "brute_force_uot");
  if (mu0.support_size() > 2 || mu1.support_size() > 2)
    throw std::invalid_argument("brute_force_uot: support too large (at most two atoms per side)");
  BruteForceResult out;
  if (mu0.is_null() || mu1.is_null()) {
    out.value = detail::solve_degenerate(cost, mu0, mu1).value;
    out.level_values.push_back(out.value);
    out.level_steps.push_back(0.0);
    return out;
  }

  const SemiCoupling frame = detail::semi_coupling_frame(mu0, mu1);
  const std::size_t n0 = frame.n_rows(), n1 = frame.n_cols();
  const std::vector<double> m0 = mu0.masses(), m1 = mu1.masses();
  auto dist = [&](std::size_t i, std::size_t j) { return frame.dist[i * n1 + j]; };

  // b_ij for the current column splits w.
  std::vector<double> w(n1, 0.0);
  // Split masses are clamped at zero: a rounded window edge may overshoot the
  // range by an ulp, and a negative mass would poison the cost with a NaN.
  auto b_at = [&](std::size_t i, std::size_t j) {
    return n0 == 2 ? std::max(0.0, i == 0 ? w[j] : m1[j] - w[j]) : m1[j];
  };
  auto row_cost = [&](std::size_t i, double u) {
    if (n1 == 1) return cost(m0[i], b_at(i, 0), dist(i, 0));
    return cost(std::max(u, 0.0), b_at(i, 0), dist(i, 0)) + cost(std::max(m0[i] - u, 0.0), b_at(i, 1), dist(i, 1));
  };
  double finest = 0.0;
  auto inner = [&] {
    double v = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
      if (n1 == 1) {
        v += row_cost(i, m0[i]);
      } else {
        const auto z = detail::zoom_min([&](double u) { return row_cost(i, u); }, m0[i], opts, false);
        finest = std::max(finest, z.finest);
        v += z.value;
      }
    }
    return v;
  };

  const std::size_t outer_dims = n0 == 2 ? n1 : 0;
  std::function<double(std::size_t, bool)> search = [&](std::size_t q, bool trace) -> double {
    if (q == outer_dims) return inner();
    const auto z = detail::zoom_min(
        [&](double x) {
          w[q] = x;
          return search(q + 1, false);
        },
        m1[q], opts, trace);
    finest = std::max(finest, z.finest);
    if (trace) out.level_values = z.values, out.level_steps = z.steps;
    w[q] = z.x;
    return z.value;
  };

  if (outer_dims == 0 && n1 == 2 && n0 == 1) {
    // A single free variable: record its levels directly.
    const auto z = detail::zoom_min([&](double u) { return row_cost(0, u); }, m0[0], opts, true);
    out.value = z.value;
    out.level_values = z.values;
    out.level_steps = z.steps;
    finest = z.finest;
  } else {
    out.value = search(0, true);
    if (out.level_values.empty()) {
      out.level_values.push_back(out.value);
      out.level_steps.push_back(0.0);
    }
  }

  if (cost.kind == CostKind::custom) {
    out.modulus_bound = std::numeric_limits<double>::quiet_NaN();
  } else {
    for (std::size_t i = 0; i < n0; ++i)
      for (std::size_t j = 0; j < n1; ++j) {
        const double d = dist(i, j);
        out.modulus_bound += (2.0 + d * d) * finest + 2.0 * std::sqrt(finest * m0[i]) + 2.0 * std::sqrt(finest * m1[j]);
      }
  }
  return out;
}

}  // namespace hkconv
