#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hkconv/classical_distances.hpp"
#include "hkconv/cone_geometry.hpp"
#include "hkconv/hilbertian.hpp"
#include "hkconv/infconv.hpp"
#include "hkconv/io.hpp"
#include "hkconv/measure.hpp"
#include "hkconv/metric_space.hpp"
#include "hkconv/minplus.hpp"
#include "hkconv/uot_solver.hpp"

namespace hkconv {

enum class ExperimentKind { distance, infconv_dp, converge, fn_min, parallel_sum, validate };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::distance: return "distance";
    case ExperimentKind::infconv_dp: return "infconv-dp";
    case ExperimentKind::converge: return "converge";
    case ExperimentKind::fn_min: return "fn-min";
    case ExperimentKind::parallel_sum: return "parallel-sum";
    case ExperimentKind::validate: return "validate";
  }
  return "unknown";
}

/// Raised for missing or inconsistent experiment fields (exit status 2).
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::validate;
  // Inputs: file paths, or inline JSON where noted.
  std::optional<std::string> space, mu0, mu1;
  std::optional<std::string> c1, c2;      // squared cost matrices (infconv-dp)
  std::optional<std::string> A, B, v;     // parallel-sum operands
  std::string distance_kind = "hk";       // hellinger | wasserstein | hk | whe
  std::optional<double> p;                // He/W exponent
  std::vector<std::size_t> N_list;
  std::optional<std::string> out;
  std::uint64_t seed = 1;
  SolveOptions solve;
  // converge with built-in Dirac endpoints
  std::string endpoints = "dirac";
  double d = 1.0, m0 = 1.0, m1 = 1.0;
  // fn-min
  double r0 = 1.0, rN = 1.0;
  // infconv-dp
  std::optional<std::size_t> z0, z1;
  std::optional<double> reference;
  // parallel-sum grid check
  std::optional<double> grid_step;
};

/// Solver options with the tolerance taken from UOT_TOL when it is set.
inline SolveOptions default_solve_options() {
  SolveOptions o;
  if (const char* env = std::getenv("UOT_TOL")) {
    char* end = nullptr;
    const double t = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(t > 0.0)) throw ValidationError("UOT_TOL must be a positive number");
    o.tol = t;
  }
  return o;
}

/// Required fields per kind, checked before anything is loaded.
inline void validate_spec(const ExperimentSpec& s) {
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string(to_string(s.kind)) + ": " + what);
  };
  auto need_N = [&] {
    need(!s.N_list.empty(), "--N is required");
    for (std::size_t n : s.N_list) need(n >= 1, "--N entries must be positive");
  };
  need(s.solve.tol > 0.0, "--tol must be positive");
  switch (s.kind) {
    case ExperimentKind::distance:
      need(s.space && s.mu0 && s.mu1, "--space, --mu0 and --mu1 are required");
      need(s.distance_kind == "hellinger" || s.distance_kind == "wasserstein" || s.distance_kind == "hk" ||
               s.distance_kind == "whe",
           "--kind must be one of hellinger, wasserstein, hk, whe");
      need(!s.p || s.distance_kind == "hellinger" || s.distance_kind == "wasserstein",
           "--p applies to hellinger and wasserstein only");
      need(!s.p || *s.p >= 1.0, "--p must be >= 1");
      break;
    case ExperimentKind::infconv_dp:
      need(s.space || (s.c1 && s.c2), "--space or both --c1 and --c2 are required");
      need(s.z0 && s.z1, "--z0 and --z1 are required");
      need_N();
      break;
    case ExperimentKind::converge:
      need_N();
      if (s.mu0 || s.mu1 || s.space) {
        need(s.mu0 && s.mu1 && s.space, "--space, --mu0 and --mu1 go together");
      } else {
        need(s.endpoints == "dirac", "--endpoints must be dirac");
        need(s.d >= 0.0 && s.m0 >= 0.0 && s.m1 >= 0.0, "--d, --m0, --m1 must be nonnegative");
      }
      break;
    case ExperimentKind::fn_min:
      need_N();
      need(s.r0 > 0.0 && s.rN > 0.0, "--r0 and --rN must be positive");
      need(s.d >= 0.0, "--d must be nonnegative");
      break;
    case ExperimentKind::parallel_sum:
      need(s.A && s.B, "--A and --B are required");
      need(!s.grid_step || *s.grid_step > 0.0, "--grid-step must be positive");
      break;
    case ExperimentKind::validate: break;
  }
}

inline std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no infinities; non-finite numbers are written as strings.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(fmt17(x)); }

struct ReportRow {
  std::size_t N = 0;
  double value = 0.0, reference = 0.0, gap = 0.0;
};

/// CSV with header N,value,reference,gap,monotone_gap. The flag is 1 when
/// |gap| did not grow relative to the previous row.
inline std::string csv_body(const std::vector<ReportRow>& rows) {
  std::string s = "N,value,reference,gap,monotone_gap\n";
  double prev = kInf;
  for (const auto& r : rows) {
    const double g = std::abs(r.gap);
    const bool mono = std::isnan(g) ? false : g <= prev;
    if (!std::isnan(g)) prev = g;
    s += std::to_string(r.N) + "," + fmt17(r.value) + "," + fmt17(r.reference) + "," + fmt17(r.gap) + "," +
         (mono ? "1" : "0") + "\n";
  }
  return s;
}

inline std::string sidecar_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash) && csv_path.substr(dot) == ".csv")
    return csv_path.substr(0, dot) + ".json";
  return csv_path + ".json";
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << body;
  if (!f) throw std::runtime_error("write failed: " + path);
}

/// Writes the CSV and its JSON sidecar next to it.
inline void emit_report(const std::vector<ReportRow>& rows, const json& sidecar, const std::string& csv_path) {
  write_file(csv_path, csv_body(rows));
  write_file(sidecar_path(csv_path), sidecar.dump(2) + "\n");
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Sampled invariants of the whole library; run by the validate command.
inline std::vector<CheckResult> run_validation_suite(std::uint64_t seed, const SolveOptions& opts = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<CheckResult> out;
  auto record = [&](std::string name, double worst, double limit) {
    out.push_back({std::move(name), worst <= limit, "worst " + fmt17(worst) + " (limit " + fmt17(limit) + ")"});
  };

  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({1.5 * U(rng), 1.5 * U(rng)});
  auto X = std::make_shared<const FiniteMetricSpace>(FiniteMetricSpace::euclidean(pts));
  auto random_measure = [&](std::size_t k) {
    std::vector<std::size_t> idx(X->size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < k; ++i) atoms.push_back({idx[i], 0.1 + 1.9 * U(rng)});
    return DiscreteMeasure(X, atoms);
  };

  {
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double r = 3 * U(rng), s = 3 * U(rng), d = 4 * U(rng), a = std::numbers::pi * (0.01 + 0.99 * U(rng));
      worst = std::max(worst, std::abs(cone_distance(r, s, d, a) - cone_distance_sine_form(r, s, d, a)));
    }
    record("cone distance forms agree", worst, 1e-12);
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
      const auto y = [&] { return ConePoint(static_cast<std::size_t>(U(rng) * 8) % 8, 2 * U(rng)); };
      const ConePoint a = y(), b = y(), c = y();
      worst = std::max(worst, cone_distance(a, c, *X) - cone_distance(a, b, *X) - cone_distance(b, c, *X));
    }
    record("cone triangle inequality", worst, 1e-10);
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const auto a = random_measure(3);
      auto b = random_measure(4);
      b = scale(b, a.total_mass() / b.total_mass());
      const auto w = wasserstein_pow(2.0, a, b);
      if (w.finite()) worst = std::max(worst, std::abs(w.cost - dual_value(*w.plan, a, b)));
    }
    record("wasserstein duality gap", worst, 1e-8);
  }
  {
    double worst = -kInf, hom = 0.0, sub = -kInf;
    for (int k = 0; k < 15; ++k) {
      const auto a = random_measure(3), b = random_measure(3), a2 = random_measure(2), b2 = random_measure(2);
      const double hk = solve_uot(PairCost::hk(), a, b, opts).value;
      const double we = solve_uot(PairCost::whe(), a, b, opts).value;
      worst = std::max(worst, hk - 2.0 * we);
      const double lam = 0.5 + 3.0 * U(rng);
      const double hl = solve_uot(PairCost::hk(), scale(a, lam), scale(b, lam), opts).value;
      hom = std::max(hom, std::abs(hl - lam * hk) / std::max(lam * hk, 1e-300));
      const double split = hk + solve_uot(PairCost::hk(), a2, b2, opts).value;
      sub = std::max(sub, solve_uot(PairCost::hk(), a + a2, b + b2, opts).value - split);
    }
    record("HK^2 <= 2 WHe", worst, 1e-8);
    record("HK^2 is 1-homogeneous in mass", hom, 1e-8);
    record("UOT subadditivity", sub, 1e-8);
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 15; ++k) {
      const auto a = random_measure(3), b = random_measure(2);
      const auto w = whe_cost(a, b, opts);
      const double direct = hellinger_pow(2.0, a, w.nu_star) + wasserstein_pow(2.0, w.nu_star, b).cost;
      worst = std::max(worst, std::abs(direct - w.value) / std::max(w.value, 1e-300));
    }
    record("WHe intermediate measure reproduces the value", worst, 1e-6);
  }
  {
    double worst = -kInf;
    for (int k = 0; k < 50; ++k) {
      Eigen::MatrixXd q = Eigen::MatrixXd::NullaryExpr(3, 3, [&] { return U(rng) - 0.5; });
      Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(3, 3, [&] { return U(rng) - 0.5; });
      const SPDMatrix A(q * q.transpose() + 0.1 * Eigen::MatrixXd::Identity(3, 3));
      const SPDMatrix B(r * r.transpose() + 0.1 * Eigen::MatrixXd::Identity(3, 3));
      const Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(3, [&] { return U(rng) - 0.5; });
      const double pv = parallel_sum(A, B).quad(v);
      worst = std::max(worst, pv - std::min(A.quad(v), B.quad(v)));
    }
    record("parallel sum below both forms", worst, 1e-12);
  }
  {
    double worst = -kInf;
    for (int k = 0; k < 20; ++k) {
      const Eigen::Index n = 6;
      CostMatrix c1 = CostMatrix::NullaryExpr(n, n, [&] { return U(rng); });
      CostMatrix c2 = CostMatrix::NullaryExpr(n, n, [&] { return U(rng); });
      const CostMatrix c1s = c1.cwiseProduct(CostMatrix::NullaryExpr(n, n, [&] { return U(rng); }));
      const std::size_t N = 1 + k % 5;
      worst = std::max(worst, minplus_infconv(c1s, c2, 0, 5, N).value - minplus_infconv(c1, c2, 0, 5, N).value);
    }
    record("min-plus monotone in the costs", worst, 0.0);
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const auto r = dirac_fN_min(0.2 + 2 * U(rng), 0.2 + 2 * U(rng), 1.5 * U(rng), 2 + k * 7);
      worst = std::max(worst, r.residual);
    }
    record("f_N stationarity residual", worst, 1e-8);
  }
  return out;
}

struct RunOutcome {
  int exit_code = 0;
  json report;
  std::optional<std::string> csv;
};

namespace detail {

struct Loaded {
  SpacePtr space;
  std::optional<DiscreteMeasure> mu0, mu1;
};

inline Loaded load_inputs(const ExperimentSpec& s) {
  Loaded L;
  if (s.space) L.space = std::make_shared<const FiniteMetricSpace>(space_from_json(read_json_arg(*s.space)));
  if (s.mu0) L.mu0 = measure_from_json(read_json_arg(*s.mu0), L.space);
  if (s.mu1) L.mu1 = measure_from_json(read_json_arg(*s.mu1), L.space);
  return L;
}

inline json solve_options_json(const SolveOptions& o) {
  return {{"tol", o.tol},
          {"max_iter", o.max_iter},
          {"epsilon_schedule",
           {{"start", o.epsilon_schedule.start}, {"end", o.epsilon_schedule.end}, {"factor", o.epsilon_schedule.factor}}}};
}

inline json measure_json(const DiscreteMeasure& mu) { return measure_to_json(mu, "input")["atoms"]; }

inline std::vector<ReportRow> energy_rows(const std::vector<EnergyReport>& reps) {
  std::vector<ReportRow> rows;
  for (const auto& r : reps) rows.push_back({r.N, r.value, r.reference, r.gap});
  return rows;
}

inline RunOutcome run_distance(const ExperimentSpec& s, json& rep) {
  const Loaded L = load_inputs(s);
  const auto& a = *L.mu0;
  const auto& b = *L.mu1;
  rep["kind"] = s.distance_kind;
  if (s.distance_kind == "hellinger" || s.distance_kind == "wasserstein") {
    const double p = s.p.value_or(2.0);
    rep["p"] = p;
    if (s.distance_kind == "hellinger") {
      const double v = hellinger_pow(p, a, b);
      rep["value_pow"] = num(v);
      rep["value"] = num(std::pow(v, 1.0 / p));
    } else {
      const auto w = wasserstein_pow(p, a, b);
      rep["value_pow"] = num(w.cost);
      rep["value"] = num(w.distance);
      rep["finite"] = w.finite();
      rep["tolerances"] = {{"mass_balance", kMassBalanceTol}};
      if (w.plan && !w.plan->flow.empty()) rep["oracle"] = {{"dual_value", dual_value(*w.plan, a, b)}, {"primal", w.cost}};
    }
    return {0, rep, std::nullopt};
  }
  const PairCost cost = s.distance_kind == "hk" ? PairCost::hk() : PairCost::whe();
  const UOTResult r = solve_uot(cost, a, b, s.solve);
  rep["tolerances"] = solve_options_json(s.solve);
  rep["iterations"] = r.iterations;
  rep["gap_bound"] = r.gap_bound;
  if (s.distance_kind == "hk") {
    rep["value_squared"] = r.value;
    rep["value"] = std::sqrt(r.value);
  } else {
    rep["value"] = r.value;
    const DiscreteMeasure nu = a.is_null() ? b : reconstruct_nu(r.plan, a.space_ptr());
    // nu_star is the intermediate measure of the optimal semi-coupling.
    rep["nu_star"] = measure_json(nu);
    rep["consistency"] = {{"he2_plus_w2", num(hellinger_pow(2.0, a, nu) + wasserstein_pow(2.0, nu, b).cost)}};
  }
  if (a.support_size() <= 2 && b.support_size() <= 2) {
    const auto bf = brute_force_uot(cost, a, b);
    rep["oracle"] = {{"brute_force", bf.value}, {"abs_diff", std::abs(bf.value - r.value)}, {"modulus_bound", num(bf.modulus_bound)}};
  }
  return {0, rep, std::nullopt};
}

inline RunOutcome run_infconv_dp(const ExperimentSpec& s, json& rep) {
  CostMatrix c1, c2;
  if (s.c1 && s.c2) {
    c1 = matrix_from_json(read_json_arg(*s.c1), "c1");
    c2 = matrix_from_json(read_json_arg(*s.c2), "c2");
  } else {
    const Loaded L = load_inputs(s);
    const auto& D = L.space->distance_matrix();
    const auto n = static_cast<Eigen::Index>(D.size());
    c1.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) c1(i, j) = D[i][j] * D[i][j];
    c2 = c1;
  }
  if (c1.rows() != c1.cols() || c1.rows() != c2.rows() || c2.rows() != c2.cols())
    throw ValidationError("infconv-dp: cost matrices must be square and of equal size");
  if (*s.z0 >= static_cast<std::size_t>(c1.rows()) || *s.z1 >= static_cast<std::size_t>(c1.rows()))
    throw ValidationError("infconv-dp: --z0/--z1 out of range");
  std::vector<ReportRow> rows;
  json chains = json::array();
  const double ref = s.reference.value_or(std::numeric_limits<double>::quiet_NaN());
  for (std::size_t N : s.N_list) {
    const auto r = minplus_infconv(c1, c2, *s.z0, *s.z1, N);
    rows.push_back({N, r.value, ref, r.value - ref});
    chains.push_back(r.chain);
  }
  rep["chains"] = chains;
  rep["values"] = json::array();
  for (const auto& r : rows) rep["values"].push_back(num(r.value));
  return {0, rep, csv_body(rows)};
}

inline RunOutcome run_converge(const ExperimentSpec& s, json& rep) {
  std::vector<EnergyReport> reps;
  if (s.space) {
    const Loaded L = load_inputs(s);
    reps = geodesic_energy_experiment(*L.mu0, *L.mu1, s.N_list, s.solve);
  } else {
    auto X = std::make_shared<const FiniteMetricSpace>(
        s.d > 0.0 ? FiniteMetricSpace::euclidean({{0.0}, {s.d}}) : FiniteMetricSpace::euclidean({{0.0}}));
    const std::size_t y = s.d > 0.0 ? 1 : 0;
    reps = geodesic_energy_experiment(DiscreteMeasure(X, {{0, s.m0}}), DiscreteMeasure(X, {{y, s.m1}}), s.N_list, s.solve);
    rep["endpoints"] = {{"kind", s.endpoints}, {"d", s.d}, {"m0", s.m0}, {"m1", s.m1}};
  }
  rep["tolerances"] = solve_options_json(s.solve);
  json it = json::array();
  for (const auto& r : reps) it.push_back(r.iterations);
  rep["iterations"] = it;
  rep["values"] = json::array();
  for (const auto& r : reps) rep["values"].push_back(num(r.value));
  rep["reference"] = reps.empty() ? json() : num(reps.front().reference);
  return {0, rep, csv_body(energy_rows(reps))};
}

inline RunOutcome run_fn_min(const ExperimentSpec& s, json& rep) {
  const double dc = cone_distance(s.r0, s.rN, s.d);
  const double ref = dc * dc;
  std::vector<ReportRow> rows;
  json it = json::array(), res = json::array();
  for (std::size_t N : s.N_list) {
    const auto r = dirac_fN_min(s.r0, s.rN, s.d, N);
    rows.push_back({N, r.value, ref, r.value - ref});
    it.push_back(r.iterations);
    res.push_back(r.residual);
  }
  rep["parameters"] = {{"r0", s.r0}, {"rN", s.rN}, {"d", s.d}};
  rep["reference_asserted"] = s.d <= std::numbers::pi / 2;
  rep["iterations"] = it;
  rep["residuals"] = res;
  rep["tolerances"] = {{"stationarity", FNOptions{}.tol}};
  rep["values"] = json::array();
  for (const auto& r : rows) rep["values"].push_back(num(r.value));
  return {0, rep, csv_body(rows)};
}

inline RunOutcome run_parallel_sum(const ExperimentSpec& s, json& rep) {
  const SPDMatrix A(matrix_from_json(read_json_arg(*s.A), "A"));
  const SPDMatrix B(matrix_from_json(read_json_arg(*s.B), "B"));
  if (A.dim() != B.dim()) throw ValidationError("parallel-sum: A and B differ in dimension");
  const SPDMatrix P = parallel_sum(A, B);
  json m = json::array();
  for (Eigen::Index i = 0; i < P.dim(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < P.dim(); ++j) row.push_back(P.matrix()(i, j));
    m.push_back(row);
  }
  rep["parallel_sum"] = m;
  rep["form_gap"] = parallel_sum_form_gap(A, B);
  rep["tolerances"] = {{"form_gap", 1e-10}};
  if (s.v) {
    const Eigen::MatrixXd vm = matrix_from_json(json::array({read_json_arg(*s.v)}), "v");
    if (vm.cols() != A.dim()) throw ValidationError("parallel-sum: v has the wrong dimension");
    const Eigen::VectorXd v = vm.row(0).transpose();
    const auto o = one_step_quadratic(A, B, v);
    rep["value"] = o.value;
    rep["z_star"] = std::vector<double>(o.z_star.data(), o.z_star.data() + o.z_star.size());
    rep["closed_form"] = P.quad(v);
    if (A.dim() <= 2) {
      GridSpec g;
      if (s.grid_step) g.step = *s.grid_step;
      const auto c = grid_metric_check(A, B, v, g);
      rep["oracle"] = {{"grid_metric_value", c.metric_value},
                       {"gap", c.gap},
                       {"predicted_slack", c.predicted_slack},
                       {"coarse_warning", c.coarse_warning},
                       {"grid_step", g.step}};
    }
  }
  return {0, rep, std::nullopt};
}

inline RunOutcome run_validate(const ExperimentSpec& s, json& rep) {
  const auto checks = run_validation_suite(s.seed, s.solve);
  json arr = json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    all = all && c.passed;
  }
  rep["checks"] = arr;
  rep["value"] = all;
  rep["seed"] = s.seed;
  return {all ? 0 : 1, rep, std::nullopt};
}

}  // namespace detail

/// Validates the spec, dispatches, and assembles the JSON report. Solver
/// failures give exit status 1, input problems exit status 2; both carry an
/// "error" object.
inline RunOutcome run(const ExperimentSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  json rep;
  rep["experiment"] = to_string(spec.kind);
  RunOutcome out;
  auto fail = [&](int code, const char* type, const std::string& msg) {
    rep["error"] = {{"type", type}, {"message", msg}};
    out = {code, rep, std::nullopt};
  };
  try {
    validate_spec(spec);
    switch (spec.kind) {
      case ExperimentKind::distance: out = detail::run_distance(spec, rep); break;
      case ExperimentKind::infconv_dp: out = detail::run_infconv_dp(spec, rep); break;
      case ExperimentKind::converge: out = detail::run_converge(spec, rep); break;
      case ExperimentKind::fn_min: out = detail::run_fn_min(spec, rep); break;
      case ExperimentKind::parallel_sum: out = detail::run_parallel_sum(spec, rep); break;
      case ExperimentKind::validate: out = detail::run_validate(spec, rep); break;
    }
  } catch (const UOTNonConvergence& e) {
    fail(1, "solver", e.what());
    out.report["error"]["incumbent_value"] = num(e.incumbent.value);
  } catch (const FNNonConvergence& e) {
    fail(1, "solver", e.what());
    out.report["error"]["incumbent_value"] = num(e.incumbent.value);
  } catch (const InputError& e) {
    fail(2, "validation", e.what());
  } catch (const UnsupportedEndpoints& e) {
    fail(2, "validation", e.what());
  } catch (const BackendMissing& e) {
    fail(2, "validation", e.what());
  } catch (const std::invalid_argument& e) {
    fail(2, "validation", e.what());
  } catch (const std::domain_error& e) {
    fail(2, "validation", e.what());
  } catch (const std::exception& e) {
    fail(1, "solver", e.what());
  }
  out.report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace hkconv
