#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hkconv/cone_geometry.hpp"

using namespace hkconv;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double pi = std::numbers::pi;

FiniteMetricSpace line(double d) { return FiniteMetricSpace::euclidean({{0.0}, {d}}); }

}  // namespace

TEST_CASE("cone distance at right angle", "[cone]") {
  auto X = line(pi / 2);
  // r^2 + s^2 - 2 r s cos(pi/2) = 2
  REQUIRE_THAT(cone_distance(ConePoint(0, 1.0), ConePoint(1, 1.0), X, pi / 2), WithinAbs(std::sqrt(2.0), 1e-15));
  REQUIRE(cone_distance(ConePoint(0, 0.7), ConePoint(0, 0.7), X) == 0.0);
  for (double a : {0.3, pi / 2, pi}) {
    REQUIRE_THAT(cone_distance(ConePoint::vertex(), ConePoint(1, 1.3), X, a), WithinAbs(1.3, 1e-15));
  }
}

TEST_CASE("cutoff outside (0, pi] is rejected", "[cone]") {
  auto X = line(1.0);
  REQUIRE_THROWS_AS(cone_distance(ConePoint(0, 1.0), ConePoint(1, 1.0), X, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(cone_distance(ConePoint(0, 1.0), ConePoint(1, 1.0), X, 4.0), std::domain_error);
}

TEST_CASE("vertex normalization", "[cone]") {
  ConePoint a(3, 1e-16), b(5, 0.0);
  REQUIRE(a.is_vertex());
  REQUIRE(a == b);
  REQUIRE(a == ConePoint::vertex());
  REQUIRE_FALSE(ConePoint(3, 1e-14).is_vertex());
  REQUIRE_THROWS_AS(ConePoint(0, -1.0), std::invalid_argument);
  REQUIRE(ConePoint::from_mass(2, 4.0).r == 2.0);
}

TEST_CASE("cosine and sine forms agree on random inputs", "[cone][property]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double r = 5 * U(rng), s = 5 * U(rng), d = 6 * U(rng), a = pi * (1e-3 + (1 - 1e-3) * U(rng));
    worst = std::max(worst, std::abs(cone_distance(r, s, d, a) - cone_distance_sine_form(r, s, d, a)));
  }
  REQUIRE(worst <= 1e-12);
}

TEST_CASE("cone distance is a metric and truncation lowers it", "[cone][property]") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({4 * U(rng), 4 * U(rng)});
  auto X = FiniteMetricSpace::euclidean(pts);
  auto point = [&] { return ConePoint(static_cast<std::size_t>(U(rng) * 10) % 10, 2 * U(rng)); };
  for (int k = 0; k < 2000; ++k) {
    const ConePoint a = point(), b = point(), c = point();
    REQUIRE(cone_distance(a, c, X) <= cone_distance(a, b, X) + cone_distance(b, c, X) + 1e-10);
    REQUIRE(cone_distance(a, b, X, pi / 2) <= cone_distance(a, b, X) + 1e-15);
    REQUIRE(cone_distance(a, b, X) == cone_distance(b, a, X));
  }
}

TEST_CASE("geodesic case selection", "[cone][geodesic]") {
  auto X = line(pi / 2);
  SECTION("radial from the vertex") {
    const auto g = cone_geodesic(ConePoint::vertex(), ConePoint(1, 1.0), X);
    REQUIRE(g.kind() == GeodesicCase::radial);
    for (double t : {0.0, 0.2, 0.5, 1.0}) REQUIRE_THAT(g.radius(t), WithinAbs(t, 1e-15));
  }
  SECTION("rotational midpoint") {
    const auto g = cone_geodesic(ConePoint(0, 1.0), ConePoint(1, 1.0), X);
    REQUIRE(g.kind() == GeodesicCase::rotational);
    // r^2(1/2) = 1/4 + 1/4 + 2 (1/4) cos(pi/2)
    REQUIRE_THAT(g.radius(0.5), WithinAbs(1.0 / std::sqrt(2.0), 1e-15));
    REQUIRE_THAT(g.angle(0.5), WithinAbs(pi / 4, 1e-12));
  }
  SECTION("through the vertex") {
    auto Y = line(3.5);
    const auto g = cone_geodesic(ConePoint(0, 1.0), ConePoint(1, 1.0), Y);
    REQUIRE(g.kind() == GeodesicCase::through_vertex);
    REQUIRE(g.switch_time() == 0.5);
    REQUIRE(g.radius(0.5) == 0.0);
    const auto h = cone_geodesic(ConePoint(0, 3.0), ConePoint(1, 1.0), Y);
    REQUIRE_THAT(h.switch_time(), WithinAbs(0.75, 1e-15));
  }
  SECTION("constant") {
    const auto g = cone_geodesic(ConePoint(1, 0.4), ConePoint(1, 0.4), X);
    REQUIRE(g.kind() == GeodesicCase::constant);
    REQUIRE(g.radius(0.3) == 0.4);
  }
  SECTION("endpoints are reproduced") {
    for (double d : {0.0, 0.4, 1.2, 2.9, 3.3}) {
      auto Y = line(d > 0 ? d : 1.0);
      const std::size_t x1 = d > 0 ? 1 : 0;
      const auto g = cone_geodesic(ConePoint(0, 1.3), ConePoint(x1, 0.6), Y);
      REQUIRE_THAT(g.radius(0.0), WithinAbs(1.3, 1e-14));
      REQUIRE_THAT(g.radius(1.0), WithinAbs(0.6, 1e-14));
      REQUIRE_THAT(g.angle(1.0), WithinAbs(d > 0 ? Y.distance(0, 1) : 0.0, 1e-7));
    }
  }
  REQUIRE_THROWS_AS(cone_geodesic(ConePoint(0, 1.0), ConePoint(1, 1.0), X).radius(1.5), std::out_of_range);
}

TEST_CASE("matrix backend cannot carry a rotational geodesic", "[cone][geodesic]") {
  auto M = FiniteMetricSpace::from_matrix({{0.0, 1.0}, {1.0, 0.0}});
  REQUIRE_THROWS_AS(cone_geodesic(ConePoint(0, 1.0), ConePoint(1, 1.0), M), BackendMissing);
  REQUIRE_NOTHROW(cone_geodesic(ConePoint::vertex(), ConePoint(1, 1.0), M));
}

TEST_CASE("geodesics have constant speed", "[cone][geodesic][property]") {
  struct Case {
    double r0, r1, d;
  };
  const std::vector<Case> cases = {{1, 1, pi / 2}, {2, 0.5, 1.0}, {0.3, 1.7, 2.8}, {1, 1, 3.5},
                                   {2, 1, 4.0},    {0, 1.2, 1.0}, {0.8, 0, 2.0},   {1.5, 0.4, 0.0}};
  for (const auto& c : cases) {
    const ConePoint y0 = c.r0 > 0 ? ConePoint(0, c.r0) : ConePoint::vertex();
    const ConePoint y1 = c.r1 > 0 ? ConePoint(1, c.r1) : ConePoint::vertex();
    const ConeGeodesic g(y0, y1, c.d);
    const double L = g.length();
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j <= 40; ++j) {
        const double s = i / 40.0, t = j / 40.0;
        const double dst = cone_distance(g.radius(s), g.radius(t), std::abs(g.angle(s) - g.angle(t)));
        worst = std::max(worst, std::abs(dst - std::abs(s - t) * L));
      }
    INFO("r0=" << c.r0 << " r1=" << c.r1 << " d=" << c.d);
    REQUIRE(worst <= 1e-9);
  }
}

TEST_CASE("geodesic points in a euclidean space", "[cone][geodesic]") {
  auto X = FiniteMetricSpace::euclidean({{0.0, 0.0}, {0.6, 0.8}});
  const ConePoint y0(0, 1.0), y1(1, 2.0);
  const auto g = cone_geodesic(y0, y1, X);
  std::vector<ConePoint> samples;
  for (int i = 0; i <= 8; ++i) samples.push_back(g.at(i / 8.0, X));
  for (std::size_t i = 1; i < samples.size(); ++i)
    REQUIRE_THAT(cone_distance(samples[i - 1], samples[i], X), WithinAbs(g.length() / 8.0, 1e-12));
  // The action of exact geodesic samples is d_C^2 at every N.
  REQUIRE_THAT(discrete_action(samples, X), WithinAbs(g.length() * g.length(), 1e-12));
}

TEST_CASE("graph backend supports rotational geodesics", "[cone][geodesic]") {
  const std::vector<Edge> edges = {{0, 1, 0.5}, {1, 2, 0.5}};
  auto G = FiniteMetricSpace::graph(3, edges);
  const auto g = cone_geodesic(ConePoint(0, 1.0), ConePoint(2, 1.0), G);
  const ConePoint mid = g.at(0.5, G);
  REQUIRE_THAT(G.distance(0, mid.x), WithinAbs(0.5, 1e-12));
  REQUIRE_THAT(cone_distance(ConePoint(0, 1.0), mid, G), WithinAbs(g.length() / 2, 1e-12));
}

TEST_CASE("minimal radius", "[cone][min_radius]") {
  auto m = min_radius(1.0, 1.0, pi / 2);
  REQUIRE_THAT(m.t_min, WithinAbs(0.5, 1e-15));
  REQUIRE_THAT(m.r_min, WithinAbs(1.0 / std::sqrt(2.0), 1e-15));

  m = min_radius(2.0, 1.0, 0.1);  // cos(0.1) >= 1/2
  REQUIRE(m.t_min == 1.0);
  REQUIRE(m.r_min == 1.0);

  auto X = line(1.0);
  m = min_radius(ConePoint(0, 0.7), ConePoint(0, 0.7), X);
  REQUIRE(m.t_min == 0.0);
  REQUIRE(m.r_min == 0.7);

  REQUIRE_THROWS_AS(min_radius(0.0, 1.0, 1.0), std::domain_error);
  REQUIRE_THROWS_AS(min_radius(1.0, 1.0, pi), std::domain_error);
}

TEST_CASE("minimal radius matches a dense grid", "[cone][min_radius][property]") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const double r0 = 0.1 + 2 * U(rng), r1 = 0.1 + 2 * U(rng), d = 0.999 * pi * U(rng);
    const ConeGeodesic g(ConePoint(0, r0), ConePoint(1, r1), d);
    const auto m = min_radius(r0, r1, d);
    // Golden-section refinement of the best grid cell is the oracle.
    const int n = 100000;
    int best = 0;
    for (int i = 1; i <= n; ++i)
      if (g.radius(i / double(n)) < g.radius(best / double(n))) best = i;
    double lo = std::max(0.0, (best - 1) / double(n)), hi = std::min(1.0, (best + 1) / double(n));
    const double phi = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 100; ++it) {
      const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
      if (g.radius(a) < g.radius(b))
        hi = b;
      else
        lo = a;
    }
    const double grid_min = std::min(g.radius(0.5 * (lo + hi)), g.radius(best / double(n)));
    INFO("r0=" << r0 << " r1=" << r1 << " d=" << d);
    REQUIRE(std::abs(m.r_min - grid_min) <= 1e-8);
    REQUIRE_THAT(g.radius(m.t_min), WithinAbs(m.r_min, 1e-12));
    if (d <= pi / 2) REQUIRE(m.r_min >= std::min(r0, r1) / std::sqrt(2.0));
  }
}

TEST_CASE("discrete action", "[cone][action]") {
  auto X = line(1.0);
  const std::vector<ConePoint> constant(5, ConePoint(1, 0.9));
  REQUIRE(discrete_action(constant, X) == 0.0);
  // 2 ((1/2)^2 + (1/2)^2) = 1
  const std::vector<ConePoint> radial = {ConePoint::vertex(), ConePoint(1, 0.5), ConePoint(1, 1.0)};
  REQUIRE_THAT(discrete_action(radial, X), WithinAbs(1.0, 1e-15));
  REQUIRE_THROWS_AS(discrete_action(std::vector<ConePoint>{ConePoint(0, 1.0)}, X), std::invalid_argument);
  // Samples of any exact geodesic reproduce d_C^2 for every N.
  const auto g = cone_geodesic(ConePoint(0, 1.2), ConePoint(1, 0.5), X);
  for (int N : {1, 3, 17}) {
    std::vector<ConePoint> s;
    for (int i = 0; i <= N; ++i) s.push_back(g.at(double(i) / N, X));
    REQUIRE_THAT(discrete_action(s, X), WithinAbs(g.length() * g.length(), 1e-12));
  }
}
