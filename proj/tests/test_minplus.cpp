#include <catch_amalgamated.hpp>

#include <random>

#include "hkconv/minplus.hpp"

using namespace hkconv;
using Catch::Matchers::WithinAbs;

namespace {

// Squared path metric on n equally spaced points of [0, (n-1) h], scaled by w.
CostMatrix path_sq(Eigen::Index n, double h, double w = 1.0) {
  CostMatrix c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = w * h * static_cast<double>(std::abs(i - j));
      c(i, j) = d * d;
    }
  return c;
}

CostMatrix discrete(Eigen::Index n) {
  CostMatrix c = CostMatrix::Ones(n, n);
  c.diagonal().setZero();
  return c;
}

CostMatrix random_cost(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  CostMatrix c = CostMatrix::NullaryExpr(n, n, [&] { return U(rng); });
  c = (c + c.transpose()).eval();
  c.diagonal().setZero();
  return c;
}

}  // namespace

TEST_CASE("min-plus product", "[minplus]") {
  CostMatrix A(2, 2), B(2, 2);
  A << 0, 3, kInf, 1;
  B << 2, kInf, 0, 5;
  const CostMatrix C = minplus_multiply(A, B);
  REQUIRE(C(0, 0) == 2);
  REQUIRE(C(0, 1) == 8);
  REQUIRE(C(1, 0) == 1);
  REQUIRE(C(1, 1) == 6);
  REQUIRE_THROWS_AS(minplus_multiply(A, CostMatrix(3, 3)), std::invalid_argument);
}

TEST_CASE("diagonal endpoints cost nothing", "[minplus]") {
  std::mt19937_64 rng(41);
  const CostMatrix c1 = random_cost(rng, 7), c2 = random_cost(rng, 7);
  for (std::size_t N : {1, 2, 5, 13}) REQUIRE(minplus_infconv(c1, c2, 3, 3, N).value == 0.0);
}

TEST_CASE("discrete metric grows linearly in N", "[minplus]") {
  const CostMatrix c = discrete(6);
  for (std::size_t N = 1; N <= 32; ++N) REQUIRE(minplus_infconv(c, c, 0, 5, N).value >= static_cast<double>(N));
}

TEST_CASE("one step on the path graph finds the midpoint", "[minplus]") {
  const CostMatrix c = path_sq(101, 0.01);
  const auto r = minplus_infconv(c, c, 0, 100, 1);
  REQUIRE_THAT(r.value, WithinAbs(0.5, 1e-12));
  REQUIRE(r.chain == std::vector<std::size_t>{0, 50, 100});
  // 1 * z^2 + 4 (1 - z)^2 is minimal at z = 4/5 with value 4/5.
  const auto s = minplus_infconv(path_sq(101, 0.01), path_sq(101, 0.01, 2.0), 0, 100, 1);
  REQUIRE_THAT(s.value, WithinAbs(0.8, 1e-12));
  REQUIRE(s.chain[1] == 80);
}

TEST_CASE("chains are reproducible and carry the value", "[minplus]") {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 20; ++k) {
    const CostMatrix c1 = random_cost(rng, 8), c2 = random_cost(rng, 8);
    const std::size_t N = 1 + k % 6;
    const auto r = minplus_infconv(c1, c2, 1, 6, N);
    REQUIRE(r.chain.size() == 2 * N + 1);
    REQUIRE(r.chain.front() == 1);
    REQUIRE(r.chain.back() == 6);
    double e = 0.0;
    for (std::size_t s = 0; s + 1 < r.chain.size(); ++s) {
      const auto x = static_cast<Eigen::Index>(r.chain[s]), y = static_cast<Eigen::Index>(r.chain[s + 1]);
      e += s % 2 == 0 ? c1(x, y) : c2(x, y);
    }
    REQUIRE_THAT(static_cast<double>(N) * e, WithinAbs(r.value, 1e-12));
    REQUIRE(minplus_infconv(c1, c2, 1, 6, N).chain == r.chain);
  }
  // All-zero costs tie everywhere: the smallest index wins.
  const CostMatrix z = CostMatrix::Zero(4, 4);
  REQUIRE(minplus_infconv(z, z, 3, 2, 2).chain == std::vector<std::size_t>{3, 0, 0, 0, 2});
}

TEST_CASE("agreement with explicit matrix powers", "[minplus]") {
  std::mt19937_64 rng(43);
  const CostMatrix c1 = random_cost(rng, 6), c2 = random_cost(rng, 6);
  const CostMatrix M = minplus_multiply(c1, c2);
  CostMatrix P = M;
  for (std::size_t N = 1; N <= 5; ++N) {
    if (N > 1) P = minplus_multiply(P, M);
    REQUIRE_THAT(minplus_infconv(c1, c2, 0, 4, N).value, WithinAbs(static_cast<double>(N) * P(0, 4), 1e-12));
  }
}

TEST_CASE("argument validation", "[minplus]") {
  const CostMatrix c = discrete(3);
  REQUIRE_THROWS_AS(minplus_infconv(c, c, 0, 3, 1), std::out_of_range);
  REQUIRE_THROWS_AS(minplus_infconv(c, c, 0, 1, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(minplus_infconv(c, discrete(4), 0, 1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(minplus_infconv(CostMatrix(2, 3), CostMatrix(2, 3), 0, 1, 1), std::invalid_argument);
}

TEST_CASE("monotone in the costs", "[minplus][property]") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const CostMatrix c1 = random_cost(rng, 7), c2 = random_cost(rng, 7);
    const CostMatrix lower = c1.cwiseProduct(CostMatrix::NullaryExpr(7, 7, [&] { return U(rng); }));
    const std::size_t N = 1 + k % 7;
    REQUIRE(minplus_infconv(lower, c2, 0, 6, N).value <= minplus_infconv(c1, c2, 0, 6, N).value);
    REQUIRE(minplus_infconv(c2, lower, 0, 6, N).value <= minplus_infconv(c2, c1, 0, 6, N).value);
  }
}

TEST_CASE("finite-N symmetry in the two costs", "[minplus][property]") {
  std::mt19937_64 rng(45);
  for (int k = 0; k < 100; ++k) {
    const CostMatrix c1 = random_cost(rng, 6), c2 = random_cost(rng, 6);
    const std::size_t N = 1 + k % 8;
    const double n = static_cast<double>(N);
    REQUIRE(n / (n + 1) * minplus_infconv(c2, c1, 0, 5, N + 1).value <=
            minplus_infconv(c1, c2, 0, 5, N).value + 1e-12);
  }
}

TEST_CASE("length-distance upper bound on the refined path graph", "[minplus][property]") {
  // For c1 = a rho, c2 = b rho, parking at z0 for all but one step bounds the
  // value by N min(c1, c2)(z0, z1).
  for (double a : {0.5, 1.0, 1.5})
    for (double b : {1.0, 2.0}) {
      const CostMatrix c1 = path_sq(51, 0.02, a), c2 = path_sq(51, 0.02, b);
      for (std::size_t N : {1, 2, 3, 8}) {
        const double v = minplus_infconv(c1, c2, 0, 50, N).value;
        REQUIRE(v <= static_cast<double>(N) * std::min(c1(0, 50), c2(0, 50)) + 1e-12);
        // Continuum value a^2 b^2 / (a^2 + b^2); the grid only adds.
        REQUIRE(v >= a * a * b * b / (a * a + b * b) - 1e-12);
      }
    }
}

TEST_CASE("stability of the squared path metric", "[minplus][stability]") {
  const double h = 0.01;
  const Eigen::Index K = 100;
  const CostMatrix c = path_sq(K + 1, h);
  std::vector<std::size_t> Ns;
  for (std::size_t N = 1; N <= 40; ++N) Ns.push_back(N);
  StabilityOptions o;
  o.grid_step = h;
  const auto rep = stability_probe(c, 0, static_cast<std::size_t>(K), Ns, o);
  REQUIRE(rep.stable);
  for (const auto& e : rep.entries) {
    // Best split of K grid steps into N integer parts: K = qN + r.
    const std::size_t q = static_cast<std::size_t>(K) / e.N, r = static_cast<std::size_t>(K) % e.N;
    const double parts = static_cast<double>((e.N - r) * q * q + r * (q + 1) * (q + 1));
    REQUIRE_THAT(e.value, WithinAbs(static_cast<double>(e.N) * h * h * parts, 1e-12));
    REQUIRE_THAT(e.value - 1.0, WithinAbs(h * h * static_cast<double>(r * (e.N - r)), 1e-12));
    REQUIRE(e.reference == 1.0);
  }
}

TEST_CASE("unstable and trivial probes", "[minplus][stability]") {
  const CostMatrix d = discrete(5);
  const auto rep = stability_probe(d, 0, 4, {1, 2, 4, 8});
  for (const auto& e : rep.entries) REQUIRE(e.value >= static_cast<double>(e.N));
  REQUIRE_FALSE(rep.stable);
  const auto same = stability_probe(d, 2, 2, {1, 3, 9});
  REQUIRE(same.stable);
  for (const auto& e : same.entries) REQUIRE(e.value == 0.0);
  REQUIRE_THROWS_AS(stability_probe(d, 0, 9, {1}), std::out_of_range);
}
