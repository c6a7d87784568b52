#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hkconv/classical_distances.hpp"
#include "hkconv/cone_geometry.hpp"
#include "hkconv/measure.hpp"
#include "hkconv/minplus.hpp"
#include "hkconv/uot_solver.hpp"

namespace hkconv {

// ---------------------------------------------------------------------------
// N-paths and their energy

/// mu_0, ..., mu_N interleaved with nu_1, ..., nu_N; step i goes
/// mu_{i-1} -> nu_i by Hellinger and nu_i -> mu_i by Wasserstein.
struct NPath {
  std::vector<DiscreteMeasure> mu;
  std::vector<DiscreteMeasure> nu;

  std::size_t N() const noexcept { return nu.size(); }

  void validate() const {
    if (nu.empty() || mu.size() != nu.size() + 1)
      throw std::invalid_argument("NPath: need N >= 1 intermediate measures and N + 1 path measures");
    for (const auto& m : mu) DiscreteMeasure::require_same_space(mu.front(), m, "NPath");
    for (const auto& m : nu) DiscreteMeasure::require_same_space(mu.front(), m, "NPath");
  }

  bool connects(const DiscreteMeasure& z0, const DiscreteMeasure& z1) const {
    return !mu.empty() && mu.front() == z0 && mu.back() == z1;
  }
};

struct StepTerms {
  double he2 = 0.0;  // He_2^2(mu_{i-1}, nu_i)
  double w2 = 0.0;   // W_2^2(nu_i, mu_i)
  double uot = 0.0;  // solver value of the step, when one was used
};

struct EnergyReport {
  std::size_t N = 0;
  double value = 0.0;        // N * sum (he2 + w2)
  std::vector<StepTerms> steps;
  double reference = 0.0;    // HK^2 between the endpoints
  double lower_bound = 0.0;  // reference / 2
  double gap = 0.0;          // value - reference
  std::size_t iterations = 0;
};

inline double breakdown_sum(const EnergyReport& r) {
  double s = 0.0;
  for (const auto& t : r.steps) s += t.he2 + t.w2;
  return static_cast<double>(r.N) * s;
}

/// Exact energy of an N-path; an infeasible Wasserstein step gives +inf.
inline EnergyReport path_energy(const NPath& P, const SolveOptions& opts = {}) {
  P.validate();
  EnergyReport rep;
  rep.N = P.N();
  for (std::size_t i = 1; i <= rep.N; ++i) {
    StepTerms t;
    t.he2 = hellinger_pow(2.0, P.mu[i - 1], P.nu[i - 1]);
    t.w2 = wasserstein_pow(2.0, P.nu[i - 1], P.mu[i]).cost;
    rep.steps.push_back(t);
  }
  rep.value = breakdown_sum(rep);
  const UOTResult hk = solve_uot(PairCost::hk(), P.mu.front(), P.mu.back(), opts);
  rep.reference = hk.value;
  rep.lower_bound = 0.5 * hk.value;
  rep.gap = rep.value - rep.reference;
  rep.iterations = hk.iterations;
  return rep;
}

// ---------------------------------------------------------------------------
// Dirac-level energy f_N

/// Radii r_0..r_N and spatial steps d_1..d_N of a Dirac N-path.
struct FNState {
  std::vector<double> r;
  std::vector<double> d;
  double lambda = 0.0;

  std::size_t N() const noexcept { return d.size(); }
};

/// N * sum_{i=1..N} ((r_i - r_{i-1})^2 + r_i^2 d_i^2).
inline double fN_value(const FNState& s) {
  double acc = 0.0;
  for (std::size_t i = 1; i < s.r.size(); ++i) {
    const double dr = s.r[i] - s.r[i - 1];
    acc += dr * dr + s.r[i] * s.r[i] * s.d[i - 1] * s.d[i - 1];
  }
  return static_cast<double>(s.N()) * acc;
}

struct FNResiduals {
  double radial = 0.0;      // max |r_i (2 + d_i^2) - r_{i-1} - r_{i+1}| over interior i
  double multiplier = 0.0;  // max |2 r_i^2 d_i - lambda|
  double constraint = 0.0;  // |sum d_i - d|

  double max() const noexcept { return std::max({radial, multiplier, constraint}); }
};

inline FNResiduals fN_residuals(const FNState& s, double d) {
  FNResiduals res;
  const std::size_t N = s.N();
  double sum = 0.0;
  for (std::size_t i = 1; i <= N; ++i) {
    sum += s.d[i - 1];
    res.multiplier = std::max(res.multiplier, std::abs(2.0 * s.r[i] * s.r[i] * s.d[i - 1] - s.lambda));
    if (i < N)
      res.radial = std::max(res.radial, std::abs(s.r[i] * (2.0 + s.d[i - 1] * s.d[i - 1]) - s.r[i - 1] - s.r[i + 1]));
  }
  res.constraint = std::abs(sum - d);
  return res;
}

/// A priori box for minimizers whose value does not exceed the Dirac
/// competitor |r0 - rN|^2 + r0 rN (d ^ pi/2)^2.
struct FNBox {
  double r_lo, r_hi, d_hi;
};

inline FNBox fN_box(double r0, double rN, std::size_t N) {
  const double lo = std::min(r0, rN), hi = std::max(r0, rN);
  const double pi = std::numbers::pi;
  return {(1.0 - pi / 4.0) * lo, hi,
          (1.0 / std::sqrt(static_cast<double>(N))) * (pi / (2.0 - pi / 2.0)) * std::sqrt(r0 * rN) / lo};
}

inline double fN_box_threshold(double r0, double rN, double d) {
  const double a = std::min(d, std::numbers::pi / 2);
  return (r0 - rN) * (r0 - rN) + r0 * rN * a * a;
}

inline bool in_box(const FNState& s, const FNBox& box) {
  for (double r : s.r)
    if (r < box.r_lo || r > box.r_hi) return false;
  for (double d : s.d)
    if (d > box.d_hi) return false;
  return true;
}

struct FNOptions {
  double tol = 1e-8;             // stationarity residual target (relative to r0 v rN)
  std::size_t max_iter = 20000;  // per phase
  std::size_t restarts = 5;      // projected-gradient restarts on fallback
  std::uint32_t seed = 20240601;
};

struct FNResult {
  double value = 0.0;
  FNState state;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool fallback_used = false;
};

class FNNonConvergence : public std::runtime_error {
 public:
  FNNonConvergence(const std::string& msg, FNResult best) : std::runtime_error(msg), incumbent(std::move(best)) {}
  FNResult incumbent;
};

namespace detail {

// Optimal steps for given radii: d_i proportional to r_i^{-2}.
inline void fill_steps(FNState& s, double d) {
  const std::size_t N = s.N();
  double S = 0.0;
  for (std::size_t i = 1; i <= N; ++i) S += 1.0 / (s.r[i] * s.r[i]);
  for (std::size_t i = 1; i <= N; ++i) s.d[i - 1] = d / (S * s.r[i] * s.r[i]);
  s.lambda = 2.0 * d / S;
}

// Thomas algorithm for tridiagonal systems; sub = super = off.
inline std::vector<double> thomas(std::vector<double> diag, const std::vector<double>& off, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double m = off[i - 1] / diag[i - 1];
    diag[i] -= m * off[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) x[i] = (rhs[i] - (i + 1 < n ? off[i] * x[i + 1] : 0.0)) / diag[i];
  return x;
}

// Exact minimization in the interior radii for fixed steps.
inline void radial_sweep(FNState& s) {
  const std::size_t N = s.N();
  if (N < 2) return;
  std::vector<double> diag(N - 1), off(N - 2, -1.0), rhs(N - 1, 0.0);
  for (std::size_t i = 1; i < N; ++i) diag[i - 1] = 2.0 + s.d[i - 1] * s.d[i - 1];
  rhs.front() += s.r[0];
  rhs.back() += s.r[N];
  const auto x = thomas(diag, off, rhs);
  for (std::size_t i = 1; i < N; ++i) s.r[i] = x[i - 1];
}

// Reduced energy F(r) = N [sum (r_i - r_{i-1})^2 + d^2 / S(r)] after the
// steps are eliminated, with its gradient in the interior radii.
inline double reduced(const std::vector<double>& r, double d, std::vector<double>* grad) {
  const std::size_t N = r.size() - 1;
  double S = 0.0, q = 0.0;
  for (std::size_t i = 1; i <= N; ++i) {
    S += 1.0 / (r[i] * r[i]);
    q += (r[i] - r[i - 1]) * (r[i] - r[i - 1]);
  }
  if (grad) {
    grad->assign(N - 1, 0.0);
    for (std::size_t k = 1; k < N; ++k)
      (*grad)[k - 1] = static_cast<double>(N) *
                       (2.0 * (r[k] - r[k - 1]) - 2.0 * (r[k + 1] - r[k]) + 2.0 * d * d / (S * S * r[k] * r[k] * r[k]));
  }
  return static_cast<double>(N) * (q + d * d / S);
}

// Newton step on F via Thomas plus a Sherman-Morrison rank-one update. The
// tridiagonal part may lose definiteness while the full Hessian keeps it, so
// only the resulting slope is checked; `shift` adds a Levenberg term.
inline bool newton_direction(const std::vector<double>& r, double d, const std::vector<double>& g,
                             std::vector<double>& dir, double shift = 0.0) {
  const std::size_t N = r.size() - 1, n = N - 1;
  double S = 0.0;
  for (std::size_t i = 1; i <= N; ++i) S += 1.0 / (r[i] * r[i]);
  std::vector<double> diag(n), off(n > 0 ? n - 1 : 0, -2.0), u(n);
  const double c = 8.0 * d * d / (S * S * S);
  for (std::size_t k = 1; k <= n; ++k) {
    const double rk2 = r[k] * r[k];
    diag[k - 1] = 4.0 - 6.0 * d * d / (S * S * rk2 * rk2) + shift;
    u[k - 1] = 1.0 / (rk2 * r[k]);
  }
  std::vector<double> gs(n);
  for (std::size_t k = 0; k < n; ++k) gs[k] = g[k] / static_cast<double>(N);
  const auto x = thomas(diag, off, gs);
  const auto y = thomas(diag, off, u);
  double ux = 0.0, uy = 0.0;
  for (std::size_t k = 0; k < n; ++k) ux += u[k] * x[k], uy += u[k] * y[k];
  dir.resize(n);
  for (std::size_t k = 0; k < n; ++k) dir[k] = -(x[k] - y[k] * c * ux / (1.0 + c * uy));
  double slope = 0.0;
  for (std::size_t k = 0; k < n; ++k) slope += dir[k] * g[k];
  return std::isfinite(slope) && slope < 0.0;
}

inline double project_simplex_sum(std::vector<double>& v, double total) {
  // Euclidean projection onto {v >= 0, sum v = total}.
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - total) / static_cast<double>(k + 1);
    if (k + 1 == u.size() || u[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (double& x : v) x = std::max(0.0, x - theta);
  return theta;
}

// Projected gradient descent on the joint (r, d) variables.
inline FNState projected_gradient(FNState s, double d, std::size_t iters) {
  const std::size_t N = s.N();
  const double floor = 1e-12 * std::max(s.r.front(), s.r.back());
  double step = 1.0 / (8.0 * static_cast<double>(N));
  double f = fN_value(s);
  std::vector<double> gr(N + 1, 0.0), gd(N, 0.0);
  for (std::size_t it = 0; it < iters; ++it) {
    const double n = static_cast<double>(N);
    std::fill(gr.begin(), gr.end(), 0.0);
    for (std::size_t i = 1; i <= N; ++i) {
      const double dr = s.r[i] - s.r[i - 1];
      gr[i] += 2.0 * n * dr + 2.0 * n * s.r[i] * s.d[i - 1] * s.d[i - 1];
      gr[i - 1] -= 2.0 * n * dr;
      gd[i - 1] = 2.0 * n * s.r[i] * s.r[i] * s.d[i - 1];
    }
    for (;;) {
      FNState t = s;
      for (std::size_t i = 1; i < N; ++i) t.r[i] = std::max(floor, s.r[i] - step * gr[i]);
      for (std::size_t i = 0; i < N; ++i) t.d[i] = s.d[i] - step * gd[i];
      project_simplex_sum(t.d, d);
      const double ft = fN_value(t);
      if (ft <= f) {
        s = std::move(t);
        f = ft;
        step *= 1.5;
        break;
      }
      step *= 0.5;
      if (step < 1e-20) return s;
    }
  }
  return s;
}

}  // namespace detail

/// Minimizes f_N over radii r_1..r_{N-1} > 0 and steps d_i >= 0 with
/// sum d_i = d (the constraint is active at any minimizer of the >= d set).
///
/// Block minimization alternates the closed-form steps d_i = d r_i^{-2} / S
/// with an exact tridiagonal solve in r, and a Newton polish on the reduced
/// energy finishes. If the stationarity residual stays above opts.tol, a
/// projected-gradient search with random restarts takes over.
inline FNResult dirac_fN_min(double r0, double rN, double d, std::size_t N, const FNOptions& opts = {}) {
  if (N == 0) throw std::invalid_argument("dirac_fN_min: N must be positive");
  if (!(r0 > 0.0 && rN > 0.0) || !std::isfinite(r0) || !std::isfinite(rN))
    throw std::invalid_argument("dirac_fN_min: radii must be positive");
  if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("dirac_fN_min: d must be finite and >= 0");

  FNResult out;
  FNState& s = out.state;
  s.r.resize(N + 1);
  s.d.assign(N, 0.0);
  for (std::size_t i = 0; i <= N; ++i) s.r[i] = r0 + (rN - r0) * static_cast<double>(i) / static_cast<double>(N);
  s.r[N] = rN;
  const double scale = std::max(r0, rN);
  if (d == 0.0 || N == 1) {
    if (N == 1) s.d[0] = d;
    s.lambda = 2.0 * rN * rN * d;
    out.value = fN_value(s);
    return out;
  }

  detail::fill_steps(s, d);
  for (; out.iterations < std::min<std::size_t>(opts.max_iter, 500); ++out.iterations) {
    const std::vector<double> prev = s.r;
    detail::radial_sweep(s);
    detail::fill_steps(s, d);
    double change = 0.0;
    for (std::size_t i = 0; i <= N; ++i) change = std::max(change, std::abs(s.r[i] - prev[i]));
    if (change <= 1e-6 * scale) break;
  }

  std::vector<double> g, dir, trial;
  double F = detail::reduced(s.r, d, &g);
  for (std::size_t it = 0; it < 200; ++it, ++out.iterations) {
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax <= 1e-14 * static_cast<double>(N) * scale) break;
    bool have_dir = false;
    for (double shift : {0.0, 1e-6, 1e-3, 1e-1, 10.0})
      if ((have_dir = detail::newton_direction(s.r, d, g, dir, shift))) break;
    if (!have_dir) {
      detail::radial_sweep(s);
      detail::fill_steps(s, d);
      F = detail::reduced(s.r, d, &g);
      continue;
    }
    double step = 1.0;
    bool moved = false;
    for (; step > 1e-12; step *= 0.5) {
      trial = s.r;
      bool ok = true;
      for (std::size_t k = 1; k < N; ++k) {
        trial[k] += step * dir[k - 1];
        ok = ok && trial[k] > 0.0;
      }
      if (!ok) continue;
      const double Ft = detail::reduced(trial, d, nullptr);
      if (Ft <= F) {
        moved = Ft < F;
        s.r = trial;
        F = detail::reduced(s.r, d, &g);
        break;
      }
    }
    if (!moved) break;
  }
  detail::fill_steps(s, d);
  out.value = fN_value(s);
  out.residual = fN_residuals(s, d).max() / scale;

  if (out.residual > opts.tol) {
    out.fallback_used = true;
    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (std::size_t k = 0; k < opts.restarts; ++k) {
      FNState t = s;
      for (std::size_t i = 1; i < N; ++i) t.r[i] *= 1.0 + 0.2 * (U(rng) - 0.5);
      for (auto& x : t.d) x = U(rng);
      detail::project_simplex_sum(t.d, d);
      t = detail::projected_gradient(std::move(t), d, opts.max_iter);
      detail::fill_steps(t, d);
      const double v = fN_value(t);
      if (v < out.value) {
        out.state = std::move(t);
        out.value = v;
      }
    }
    out.residual = fN_residuals(out.state, d).max() / scale;
    if (out.residual > opts.tol) throw FNNonConvergence("dirac_fN_min: stationarity residual above tolerance", out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geodesic discretization experiment

class UnsupportedEndpoints : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EndpointData {
  double m0 = 0.0, m1 = 0.0, d = 0.0;
};

inline EndpointData dirac_endpoints(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  DiscreteMeasure::require_same_space(mu0, mu1, "geodesic_energy_experiment");
  if (mu0.support_size() > 1 || mu1.support_size() > 1)
    throw UnsupportedEndpoints("geodesic_energy_experiment: endpoints must be Dirac or null measures");
  EndpointData e;
  e.m0 = mu0.total_mass();
  e.m1 = mu1.total_mass();
  if (!mu0.is_null() && !mu1.is_null()) e.d = mu0.space().distance(mu0.atoms()[0].index, mu1.atoms()[0].index);
  return e;
}

/// Measures sigma_0..sigma_N sampled along the HK geodesic, on a 1-D chart
/// of the base geodesic (point coordinates are arc lengths from x0).
inline std::vector<DiscreteMeasure> geodesic_samples(const EndpointData& e, std::size_t N) {
  const double pi = std::numbers::pi;
  std::vector<double> coord;
  std::vector<std::vector<std::pair<double, double>>> atoms(N + 1);  // (coordinate, mass)
  const double r0 = std::sqrt(e.m0), r1 = std::sqrt(e.m1);
  for (std::size_t i = 0; i <= N; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(N);
    if (e.d <= pi / 2 || e.m0 == 0.0 || e.m1 == 0.0) {
      // Single moving atom: the cone geodesic read in mass variables.
      const ConePoint y0 = e.m0 > 0.0 ? ConePoint(0, r0) : ConePoint::vertex();
      const ConePoint y1 = e.m1 > 0.0 ? ConePoint(1, r1) : ConePoint::vertex();
      const ConeGeodesic g(y0, y1, e.d);
      const double r = g.radius(t);
      double x = g.arc(t) * e.d;
      if (e.m0 == 0.0) x = e.d;
      if (r * r > 0.0) atoms[i].push_back({x, r * r});
    } else {
      // Two atoms trading mass by pure growth and decay.
      if (t < 1.0) atoms[i].push_back({0.0, (1.0 - t) * (1.0 - t) * e.m0});
      if (t > 0.0) atoms[i].push_back({e.d, t * t * e.m1});
    }
  }
  std::map<double, std::size_t> index;
  for (const auto& a : atoms)
    for (const auto& [x, m] : a) index.emplace(x, 0);
  if (index.empty()) index.emplace(0.0, 0);
  std::vector<std::vector<double>> pts;
  for (auto& [x, k] : index) {
    k = pts.size();
    pts.push_back({x});
  }
  auto space = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::euclidean(pts));
  std::vector<DiscreteMeasure> out;
  for (const auto& a : atoms) {
    std::vector<Atom> v;
    for (const auto& [x, m] : a) v.push_back({index.at(x), m});
    out.emplace_back(space, std::move(v));
  }
  return out;
}

/// E_N of the discretized HK geodesic between Dirac (or null) endpoints,
/// one report per entry of N_list. Each step is a WHe problem solved by the
/// semi-coupling solver; the reported energy is that of the N-path built
/// from the reconstructed intermediate measures.
inline std::vector<EnergyReport> geodesic_energy_experiment(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                                            const std::vector<std::size_t>& N_list,
                                                            const SolveOptions& opts = {}) {
  const EndpointData e = dirac_endpoints(mu0, mu1);
  const double hk2 = solve_uot(PairCost::hk(), mu0, mu1, opts).value;
  std::vector<EnergyReport> reports;
  for (std::size_t N : N_list) {
    if (N == 0) throw std::invalid_argument("geodesic_energy_experiment: N must be positive");
    const auto sigma = geodesic_samples(e, N);
    EnergyReport rep;
    rep.N = N;
    for (std::size_t i = 1; i <= N; ++i) {
      const WHeResult w = whe_cost(sigma[i - 1], sigma[i], opts);
      StepTerms t;
      t.he2 = hellinger_pow(2.0, sigma[i - 1], w.nu_star);
      t.w2 = wasserstein_pow(2.0, w.nu_star, sigma[i]).cost;
      t.uot = w.value;
      rep.iterations += w.iterations;
      rep.steps.push_back(t);
    }
    rep.value = breakdown_sum(rep);
    rep.reference = hk2;
    rep.lower_bound = 0.5 * hk2;
    rep.gap = rep.value - hk2;
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace hkconv
