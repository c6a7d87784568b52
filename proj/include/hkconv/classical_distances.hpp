#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hkconv/measure.hpp"

namespace hkconv {

inline void require_exponent(double p, const char* what) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::domain_error(std::string(what) + ": exponent p must be >= 1");
}

/// He_p^p(mu0, mu1): sum over shared atoms of |m0^{1/p} - m1^{1/p}|^p plus all
/// unshared mass.
inline double hellinger_pow(double p, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  require_exponent(p, "hellinger");
  DiscreteMeasure::require_same_space(mu0, mu1, "hellinger");
  const auto& a = mu0.atoms();
  const auto& b = mu1.atoms();
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].index < b[j].index)) {
      acc += a[i++].mass;
    } else if (i == a.size() || b[j].index < a[i].index) {
      acc += b[j++].mass;
    } else {
      acc += std::pow(std::abs(std::pow(a[i].mass, 1.0 / p) - std::pow(b[j].mass, 1.0 / p)), p);
      ++i;
      ++j;
    }
  }
  return acc;
}

inline double hellinger(double p, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  return std::pow(hellinger_pow(p, mu0, mu1), 1.0 / p);
}

/// Optimal coupling between two equal-mass measures together with dual
/// potentials. flow is row-major over rows x cols, where rows and cols hold
/// the support indices of mu0 and mu1.
struct TransportPlan {
  std::vector<std::size_t> rows, cols;
  std::vector<double> flow;
  std::vector<double> phi, psi;
  std::vector<double> cost;  // d^p per entry, row-major

  double at(std::size_t i, std::size_t j) const { return flow[i * cols.size() + j]; }
  double primal() const {
    double s = 0.0;
    for (std::size_t k = 0; k < flow.size(); ++k) s += flow[k] * cost[k];
    return s;
  }
};

struct WassersteinResult {
  double cost = 0.0;      // W_p^p, +inf when masses differ
  double distance = 0.0;  // W_p
  std::optional<TransportPlan> plan;

  bool finite() const noexcept { return std::isfinite(cost); }
};

inline constexpr double kMassBalanceTol = 1e-12;

namespace detail {

// Successive shortest augmenting paths on the dense bipartite graph with
// Johnson potentials. Left node i has supply s[i], right node j demand t[j].
// Returns flow and final potentials (pl, pr) with c_ij + pl_i - pr_j >= 0.
inline void min_cost_flow(const std::vector<double>& c, std::vector<double> s, std::vector<double> t,
                          std::vector<double>& flow, std::vector<double>& pl, std::vector<double>& pr) {
  const std::size_t n0 = s.size(), n1 = t.size(), n = n0 + n1;
  const double inf = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (double v : s) total += v;
  const double eps = 1e-15 * total;

  flow.assign(n0 * n1, 0.0);
  pl.assign(n0, 0.0);
  pr.assign(n1, 0.0);
  std::vector<double> dist(n);
  std::vector<std::size_t> pred(n);
  std::vector<char> done(n);
  const std::size_t none = static_cast<std::size_t>(-1);

  for (;;) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(pred.begin(), pred.end(), none);
    std::fill(done.begin(), done.end(), 0);
    bool any = false;
    for (std::size_t i = 0; i < n0; ++i)
      if (s[i] > eps) dist[i] = 0.0, any = true;
    if (!any) break;

    std::size_t target = none;
    for (;;) {
      std::size_t u = none;
      for (std::size_t v = 0; v < n; ++v)
        if (!done[v] && dist[v] < inf && (u == none || dist[v] < dist[u])) u = v;
      if (u == none) break;
      done[u] = 1;
      if (u >= n0 && t[u - n0] > eps) {
        target = u;
        break;
      }
      if (u < n0) {
        for (std::size_t j = 0; j < n1; ++j) {
          const double nd = dist[u] + std::max(0.0, c[u * n1 + j] + pl[u] - pr[j]);
          if (nd < dist[n0 + j]) dist[n0 + j] = nd, pred[n0 + j] = u;
        }
      } else {
        const std::size_t j = u - n0;
        for (std::size_t i = 0; i < n0; ++i) {
          if (flow[i * n1 + j] <= eps) continue;
          const double nd = dist[u] + std::max(0.0, -c[i * n1 + j] + pr[j] - pl[i]);
          if (nd < dist[i]) dist[i] = nd, pred[i] = u;
        }
      }
    }
    if (target == none) break;  // residual supply is rounding noise

    const double dt = dist[target];
    for (std::size_t v = 0; v < n; ++v) {
      const double shift = std::min(dist[v], dt);
      if (v < n0) pl[v] += shift; else pr[v - n0] += shift;
    }

    // Bottleneck along the path back to a source.
    double push = t[target - n0];
    std::size_t v = target;
    while (pred[v] != none) {
      const std::size_t u = pred[v];
      if (u >= n0) push = std::min(push, flow[v * n1 + (u - n0)]);
      v = u;
    }
    push = std::min(push, s[v]);

    s[v] -= push;
    t[target - n0] -= push;
    v = target;
    while (pred[v] != none) {
      const std::size_t u = pred[v];
      if (u < n0) flow[u * n1 + (v - n0)] += push;
      else flow[v * n1 + (u - n0)] -= push;
      v = u;
    }
  }
}

}  // namespace detail

/// W_p^p between mu0 and mu1 by exact min-cost flow with cost d^p.
///
/// Total masses that differ by more than kMassBalanceTol (relative) give +inf
/// and no plan. Within the tolerance mu1 is rescaled to the mass of mu0.
inline WassersteinResult wasserstein_pow(double p, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  require_exponent(p, "wasserstein");
  DiscreteMeasure::require_same_space(mu0, mu1, "wasserstein");
  WassersteinResult out;
  const double m0 = mu0.total_mass(), m1 = mu1.total_mass();
  if (mu0.is_null() && mu1.is_null()) {
    out.plan = TransportPlan{};
    return out;
  }
  if (std::abs(m0 - m1) > kMassBalanceTol * std::max(m0, m1)) {
    out.cost = out.distance = std::numeric_limits<double>::infinity();
    return out;
  }

  TransportPlan plan;
  plan.rows = mu0.support();
  plan.cols = mu1.support();
  const std::size_t n0 = plan.rows.size(), n1 = plan.cols.size();
  plan.cost.resize(n0 * n1);
  const auto& X = mu0.space();
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j) plan.cost[i * n1 + j] = std::pow(X.distance(plan.rows[i], plan.cols[j]), p);

  std::vector<double> s = mu0.masses(), t = mu1.masses();
  const double rescale = m0 / m1;
  for (double& v : t) v *= rescale;

  std::vector<double> pl, pr;
  detail::min_cost_flow(plan.cost, s, t, plan.flow, pl, pr);
  plan.phi.resize(n0);
  plan.psi.resize(n1);
  for (std::size_t i = 0; i < n0; ++i) plan.phi[i] = -pl[i];
  for (std::size_t j = 0; j < n1; ++j) plan.psi[j] = pr[j];

  out.cost = std::max(0.0, plan.primal());
  out.distance = std::pow(out.cost, 1.0 / p);
  out.plan = std::move(plan);
  return out;
}

inline double wasserstein(double p, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  return wasserstein_pow(p, mu0, mu1).distance;
}

/// Value of the dual objective sum phi m0 + sum psi m1 for a solved plan.
inline double dual_value(const TransportPlan& plan, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1) {
  double v = 0.0;
  for (std::size_t i = 0; i < plan.rows.size(); ++i) v += plan.phi[i] * mu0.mass_at(plan.rows[i]);
  for (std::size_t j = 0; j < plan.cols.size(); ++j) v += plan.psi[j] * mu1.mass_at(plan.cols[j]);
  return v;
}

}  // namespace hkconv
