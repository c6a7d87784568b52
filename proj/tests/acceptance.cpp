// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hkconv/hkconv.hpp"

using namespace hkconv;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Tracks the worst deviation against a fixed limit.
struct Worst {
  double value = 0.0;
  void add(double x) { value = std::max(value, std::isnan(x) ? INFINITY : x); }
};

std::string f(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

SpacePtr two_points(double d) {
  return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::euclidean({{0.0}, {d}}));
}

SpacePtr plane(std::mt19937_64& rng, std::size_t n, double side) {
  std::uniform_real_distribution<double> U(0.0, side);
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({U(rng), U(rng)});
  return std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::euclidean(pts));
}

DiscreteMeasure random_measure(const SpacePtr& X, std::mt19937_64& rng, std::size_t k) {
  std::vector<std::size_t> idx(X->size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uniform_real_distribution<double> U(0.1, 2.0);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < k; ++i) atoms.push_back({idx[i], U(rng)});
  return {X, atoms};
}

const std::vector<double> kMasses = {0.25, 1.0, 4.0};
const std::vector<double> kDists = {0.0, 0.5, pi / 2, 2.0, pi};

// Dirac pair on a two-point line; d = 0 puts both atoms on the same point.
std::pair<DiscreteMeasure, DiscreteMeasure> diracs(double m0, double m1, double d) {
  auto X = two_points(d > 0 ? d : 1.0);
  return {DiscreteMeasure(X, {{0, m0}}), DiscreteMeasure(X, {{d > 0 ? 1u : 0u, m1}})};
}

Verdict c1_hk_closed_form() {
  Worst w;
  for (double m0 : kMasses)
    for (double m1 : kMasses)
      for (double d : kDists) {
        const auto [a, b] = diracs(m0, m1, d);
        const double expect = m0 + m1 - 2 * std::sqrt(m0 * m1) * std::cos(std::min(d, pi / 2));
        w.add(std::abs(hk_squared(a, b) - expect));
      }
  return {w.value <= 1e-6, "max abs error " + f(w.value) + " (limit 1e-6)"};
}

Verdict c2_whe_closed_form() {
  Worst val, nu;
  int first = 0, second = 0;
  for (double r0 : kMasses)
    for (double r1 : kMasses)
      for (double d : kDists) {
        const auto [a, b] = diracs(r0, r1, d);
        const auto r = whe_cost(a, b);
        double expect, s0;
        if (r1 * std::pow(d, 4) <= r0) {
          ++first;
          expect = std::pow(std::sqrt(r0) - std::sqrt(r1), 2) + r1 * d * d;
          s0 = r1;
        } else {
          ++second;
          expect = r0 + r1 - r0 / (d * d);
          s0 = r0 / std::pow(d, 4);
        }
        val.add(std::abs(r.value - expect));
        if (d > 0) {
          nu.add(std::abs(r.nu_star.mass_at(0) - s0));
          nu.add(std::abs(r.nu_star.mass_at(1) - (r1 - s0)));
        } else {
          nu.add(std::abs(r.nu_star.mass_at(0) - r1));
        }
      }
  const bool ok = val.value <= 1e-6 && nu.value <= 1e-6 && first > 0 && second > 0;
  return {ok, "value error " + f(val.value) + ", nu atom error " + f(nu.value) + " (limit 1e-6), branches " +
                  std::to_string(first) + "/" + std::to_string(second)};
}

Verdict c3_oracle() {
  std::mt19937_64 rng(20261);
  Worst w;
  for (int k = 0; k < 50; ++k) {
    auto X = plane(rng, 4, 2.5);
    const auto a = random_measure(X, rng, 1 + k % 2), b = random_measure(X, rng, 1 + (k / 2) % 2);
    for (const PairCost& c : {PairCost::hk(), PairCost::whe()})
      w.add(std::abs(solve_uot(c, a, b).value - brute_force_uot(c, a, b).value));
  }
  return {w.value <= 1e-4, "50 instances x 2 costs, max abs diff " + f(w.value) + " (limit 1e-4)"};
}

Verdict c4_inequalities() {
  std::mt19937_64 rng(20262);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Worst ratio, homog, subadd, contract;
  std::vector<std::vector<double>> line;
  for (int i = 0; i < 9; ++i) line.push_back({0.3 * i});
  auto L = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::euclidean(line));
  for (int k = 0; k < 100; ++k) {
    auto X = plane(rng, 9, 2.0);
    const auto a = random_measure(X, rng, 3), b = random_measure(X, rng, 3);
    const auto a2 = random_measure(X, rng, 3), b2 = random_measure(X, rng, 3);
    const double hk = hk_squared(a, b);
    ratio.add(hk - 2 * whe_cost(a, b).value);
    const double lam = 0.1 + 5 * U(rng);
    homog.add(std::abs(hk_squared(scale(a, lam), scale(b, lam)) - lam * hk) / std::max(lam * hk, 1e-300));
    subadd.add(hk_squared(a + a2, b + b2) - hk - hk_squared(a2, b2));
    // Contraction under a clamp of the line, a 1-Lipschitz map.
    const auto la = random_measure(L, rng, 3), lb = random_measure(L, rng, 3);
    const std::size_t c = 1 + static_cast<std::size_t>(k % 7);
    auto clamp = [c](std::size_t i) { return std::optional<std::size_t>(std::min(i, c)); };
    contract.add(hk_squared(pushforward(la, clamp), pushforward(lb, clamp)) - hk_squared(la, lb));
  }
  const bool ok = ratio.value <= 1e-8 && homog.value <= 1e-8 && subadd.value <= 1e-8 && contract.value <= 1e-8;
  return {ok, "max(HK2-2WHe) " + f(ratio.value) + ", homogeneity rel " + f(homog.value) + ", subadditivity " +
                  f(subadd.value) + ", contraction " + f(contract.value) + " (limits 1e-8)"};
}

Verdict c5_convergence_small_angle() {
  auto X = two_points(1.0);
  const DiscreteMeasure a(X, {{0, 1.0}}), b(X, {{1, 1.0}});
  const auto reps = geodesic_energy_experiment(a, b, {64, 256});
  const double target = 2 - 2 * std::cos(1.0);
  const double g64 = std::abs(reps[0].value - target), g256 = std::abs(reps[1].value - target);
  const bool ok = std::abs(reps[0].reference - target) <= 1e-6 && g64 <= 0.02 && g256 <= g64;
  return {ok, "|E64-HK2| " + f(g64) + " (limit 0.02), |E256-HK2| " + f(g256)};
}

Verdict c6_convergence_large_angle() {
  auto X = two_points(2.0);
  const DiscreteMeasure a(X, {{0, 1.0}}), b(X, {{1, 1.0}});
  const auto reps = geodesic_energy_experiment(a, b, {64});
  const double g = std::abs(reps[0].value - 2.0);
  // Per-step values against the grid oracle on a coarser path.
  const auto samples = geodesic_samples(dirac_endpoints(a, b), 8);
  const auto coarse = geodesic_energy_experiment(a, b, {8});
  Worst step;
  for (std::size_t i = 1; i <= 8; ++i)
    step.add(std::abs(coarse[0].steps[i - 1].uot - brute_force_uot(PairCost::whe(), samples[i - 1], samples[i]).value));
  return {g <= 0.05 && step.value <= 1e-4,
          "|E64-2| " + f(g) + " (limit 0.05), per-step oracle diff " + f(step.value)};
}

Verdict c7_fn_solver() {
  Worst lin;
  for (std::size_t N : {1, 4, 32, 128}) {
    const auto r = dirac_fN_min(0.5, 1.75, 0.0, N);
    lin.add(std::abs(r.value - 1.5625));
    for (std::size_t i = 0; i <= N; ++i) lin.add(std::abs(r.state.r[i] - (0.5 + 1.25 * double(i) / double(N))));
  }
  const double target = 2 - 2 * std::cos(1.0);
  const double g = std::abs(dirac_fN_min(1.0, 1.0, 1.0, 256).value - target);
  std::mt19937_64 rng(20263);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int checked = 0, bad = 0;
  for (int k = 0; k < 40; ++k) {
    const double r0 = 0.2 + 2 * U(rng), rN = 0.2 + 2 * U(rng), d = 3 * U(rng);
    for (std::size_t N : {2, 8, 32}) {
      const auto r = dirac_fN_min(r0, rN, d, N);
      if (r.value <= fN_box_threshold(r0, rN, d)) {
        ++checked;
        if (!in_box(r.state, fN_box(r0, rN, N))) ++bad;
      }
    }
  }
  const bool ok = lin.value <= 1e-12 && g <= 0.02 && bad == 0 && checked > 0;
  return {ok, "d=0 error " + f(lin.value) + " (limit 1e-12), |f256-HK2| " + f(g) + " (limit 0.02), box " +
                  std::to_string(checked - bad) + "/" + std::to_string(checked)};
}

Verdict c8_minplus() {
  const Eigen::Index n = 6;
  CostMatrix disc = CostMatrix::Ones(n, n);
  disc.diagonal().setZero();
  bool grows = true, diag = true;
  for (std::size_t N = 1; N <= 32; ++N) {
    grows = grows && minplus_infconv(disc, disc, 0, 5, N).value >= static_cast<double>(N);
    diag = diag && minplus_infconv(disc, disc, 3, 3, N).value == 0.0;
  }
  // 101-point path graph on [0, 1] with the squared length cost.
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < 100; ++i) edges.push_back({i, i + 1, 0.01});
  const auto P = FiniteMetricSpace::graph(101, edges);
  CostMatrix c(101, 101);
  for (Eigen::Index i = 0; i < 101; ++i)
    for (Eigen::Index j = 0; j < 101; ++j) c(i, j) = std::pow(P.distance(std::size_t(i), std::size_t(j)), 2);
  const double v = minplus_infconv(c, c, 0, 100, 1).value;
  const bool ok = grows && diag && std::abs(v - 0.5) <= 0.01;
  return {ok, std::string("discrete >= N ") + (grows ? "yes" : "no") + ", diagonal zero " + (diag ? "yes" : "no") +
                  ", path one-step " + f(v) + " (0.5 +- 0.01)"};
}

Verdict c9_hilbertian() {
  std::mt19937_64 rng(20264);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Worst rel;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index m = 1 + k % 6;
    auto spd = [&] {
      const Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(m, m, [&] { return U(rng); });
      return SPDMatrix(q * q.transpose() + 0.05 * Eigen::MatrixXd::Identity(m, m));
    };
    const SPDMatrix A = spd(), B = spd();
    const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(m, [&] { return U(rng); });
    // Independent closed form through explicit inverses.
    const Eigen::MatrixXd S = (A.matrix().inverse() + B.matrix().inverse()).inverse();
    const double ref = v.dot(S * v);
    rel.add(std::abs(one_step_quadratic(A, B, v).value - ref) / ref);
  }
  const auto g1 = grid_metric_check(SPDMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0)),
                                    SPDMatrix(Eigen::MatrixXd::Constant(1, 1, 3.0)), Eigen::VectorXd::Constant(1, 2.0));
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 2, 0.5, 0.5, 1;
  b << 1, -0.3, -0.3, 3;
  GridSpec plane_grid;
  plane_grid.step = 0.05;
  plane_grid.margin = 0.1;
  const auto g2 = grid_metric_check(SPDMatrix(a), SPDMatrix(b), Eigen::Vector2d(1.0, 0.8), plane_grid);
  const double r1 = std::abs(g1.gap) / g1.closed_form_value, r2 = std::abs(g2.gap) / g2.closed_form_value;
  const bool ok = rel.value <= 1e-8 && r1 <= 0.02 && r2 <= 0.02;
  return {ok, "max rel error " + f(rel.value) + " (limit 1e-8), grid gaps R1 " + f(r1) + ", R2 " + f(r2) +
                  " (limit 2%)"};
}

Verdict c10_cone() {
  std::mt19937_64 rng(20265);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Worst radius, speed, forms;
  bool bound = true;
  for (int k = 0; k < 20; ++k) {
    const double r0 = 0.1 + 2 * U(rng), r1 = 0.1 + 2 * U(rng), d = 0.999 * pi * U(rng);
    const ConeGeodesic g(ConePoint(0, r0), ConePoint(1, r1), d);
    const auto m = min_radius(r0, r1, d);
    const int n = 100000;
    int best = 0;
    for (int i = 1; i <= n; ++i)
      if (g.radius(i / double(n)) < g.radius(best / double(n))) best = i;
    double lo = std::max(0.0, (best - 1) / double(n)), hi = std::min(1.0, (best + 1) / double(n));
    const double phi = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 100; ++it) {
      const double x = hi - phi * (hi - lo), y = lo + phi * (hi - lo);
      if (g.radius(x) < g.radius(y))
        hi = y;
      else
        lo = x;
    }
    radius.add(std::abs(m.r_min - std::min(g.radius(0.5 * (lo + hi)), g.radius(best / double(n)))));
    if (d <= pi / 2 && m.r_min < std::min(r0, r1) / std::sqrt(2.0)) bound = false;
  }
  for (int k = 0; k < 30; ++k) {
    const double r0 = 2 * U(rng), r1 = 2 * U(rng), d = 4 * U(rng);
    const ConePoint y0 = r0 > 0 ? ConePoint(0, r0) : ConePoint::vertex();
    const ConePoint y1 = r1 > 0 ? ConePoint(1, r1) : ConePoint::vertex();
    const ConeGeodesic g(y0, y1, d);
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j) {
        const double s = i / 20.0, t = j / 20.0;
        speed.add(std::abs(cone_distance(g.radius(s), g.radius(t), std::abs(g.angle(s) - g.angle(t))) -
                           std::abs(s - t) * g.length()));
      }
  }
  for (int k = 0; k < 1000; ++k) {
    const double r = 3 * U(rng), s = 3 * U(rng), d = 4 * U(rng);
    forms.add(std::abs(cone_distance(r, s, d) - cone_distance_sine_form(r, s, d)));
  }
  const bool ok = radius.value <= 1e-8 && speed.value <= 1e-9 && forms.value <= 1e-12 && bound;
  return {ok, "min_radius " + f(radius.value) + " (1e-8), speed " + f(speed.value) + " (1e-9), forms " +
                  f(forms.value) + " (1e-12), r_min bound " + (bound ? "holds" : "violated")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"dirac-hk-closed-form", c1_hk_closed_form},
      {"dirac-whe-closed-form", c2_whe_closed_form},
      {"uot-oracle-equivalence", c3_oracle},
      {"inequality-suite", c4_inequalities},
      {"convergence-d-1", c5_convergence_small_angle},
      {"convergence-d-2", c6_convergence_large_angle},
      {"fn-solver", c7_fn_solver},
      {"minplus-dp", c8_minplus},
      {"hilbertian", c9_hilbertian},
      {"cone-geometry", c10_cone},
  };
  int failed = 0, idx = 0;
  for (const auto& [name, fn] : criteria) {
    ++idx;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", idx, name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
