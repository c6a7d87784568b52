// hkconv: command-line front end for the distance solvers and the
// inf-convolution experiments. Prints the JSON report on stdout; --out
// writes either the CSV (with a .json sidecar) or, for experiments without
// tabular output, the JSON report itself.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "hkconv/harness.hpp"

namespace {

hkconv::ExperimentKind kind_of(const std::string& name) {
  using K = hkconv::ExperimentKind;
  if (name == "distance") return K::distance;
  if (name == "infconv-dp") return K::infconv_dp;
  if (name == "converge") return K::converge;
  if (name == "fn-min") return K::fn_min;
  if (name == "parallel-sum") return K::parallel_sum;
  return K::validate;
}

void print_error(int code, const std::string& type, const std::string& msg) {
  hkconv::json e = {{"error", {{"type", type}, {"message", msg}}}};
  std::cout << e.dump(2) << "\n";
  std::exit(code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unbalanced optimal transport distances and inf-convolution experiments"};
  app.require_subcommand(1, 1);

  hkconv::ExperimentSpec spec;
  try {
    spec.solve = hkconv::default_solve_options();
  } catch (const std::exception& e) {
    print_error(2, "validation", e.what());
  }

  std::string space, mu0, mu1, c1, c2, A, B, v, out;
  double p = 2.0, tol = spec.solve.tol, reference = 0.0, grid_step = 0.0;
  std::size_t z0 = 0, z1 = 0;

  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--tol", tol, "relative solver tolerance (default from UOT_TOL or 1e-7)");
    sc->add_option("--out", out, "output path (CSV with JSON sidecar, or JSON)");
    sc->add_option("--seed", spec.seed, "seed for randomized sampling");
    sc->add_option("--max-iter", spec.solve.max_iter, "Newton iteration budget of the transport solver");
  };
  auto add_measures = [&](CLI::App* sc) {
    sc->add_option("--space", space, "space file or inline JSON");
    sc->add_option("--mu0", mu0, "source measure file or inline JSON");
    sc->add_option("--mu1", mu1, "target measure file or inline JSON");
  };
  auto add_N = [&](CLI::App* sc) { sc->add_option("--N", spec.N_list, "comma-separated step counts")->delimiter(','); };

  CLI::App* dist = app.add_subcommand("distance", "distance between two measures");
  add_measures(dist);
  add_common(dist);
  dist->add_option("--kind", spec.distance_kind, "hellinger | wasserstein | hk | whe");
  dist->add_option("--p", p, "exponent for hellinger and wasserstein");

  CLI::App* dp = app.add_subcommand("infconv-dp", "min-plus N-path energy on a finite candidate set");
  dp->add_option("--space", space, "space file; squared distances are used for both costs");
  dp->add_option("--c1", c1, "squared cost matrix of the first distance");
  dp->add_option("--c2", c2, "squared cost matrix of the second distance");
  dp->add_option("--z0", z0, "start index")->required();
  dp->add_option("--z1", z1, "end index")->required();
  dp->add_option("--reference", reference, "reference value for the gap column");
  add_N(dp);
  add_common(dp);

  CLI::App* conv = app.add_subcommand("converge", "energy of the discretized HK geodesic versus HK^2");
  add_measures(conv);
  add_N(conv);
  add_common(conv);
  conv->add_option("--endpoints", spec.endpoints, "built-in endpoints (dirac)");
  conv->add_option("--d", spec.d, "distance between the Dirac endpoints");
  conv->add_option("--m0", spec.m0, "mass of the first Dirac");
  conv->add_option("--m1", spec.m1, "mass of the second Dirac");

  CLI::App* fn = app.add_subcommand("fn-min", "minimize the Dirac path energy f_N");
  add_N(fn);
  add_common(fn);
  fn->add_option("--r0", spec.r0, "initial radius");
  fn->add_option("--rN", spec.rN, "final radius");
  fn->add_option("--d", spec.d, "base distance");

  CLI::App* ps = app.add_subcommand("parallel-sum", "parallel sum of SPD forms and the one-step inf-convolution");
  ps->add_option("--A", A, "SPD matrix (file or inline JSON)");
  ps->add_option("--B", B, "SPD matrix (file or inline JSON)");
  ps->add_option("--v", v, "vector (file or inline JSON)");
  ps->add_option("--grid-step", grid_step, "lattice spacing of the grid check");
  add_common(ps);

  CLI::App* val = app.add_subcommand("validate", "run the invariant suite");
  add_common(val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(2, "validation", e.what());
  }

  CLI::App* sc = app.get_subcommands().front();
  spec.kind = kind_of(sc->get_name());
  spec.solve.tol = tol;
  auto set = [&](const char* flag, const std::string& val, std::optional<std::string>& dst) {
    if (sc->get_option_no_throw(flag) && sc->count(flag)) dst = val;
  };
  set("--space", space, spec.space);
  set("--mu0", mu0, spec.mu0);
  set("--mu1", mu1, spec.mu1);
  set("--c1", c1, spec.c1);
  set("--c2", c2, spec.c2);
  set("--A", A, spec.A);
  set("--B", B, spec.B);
  set("--v", v, spec.v);
  if (sc->get_option_no_throw("--p") && sc->count("--p")) spec.p = p;
  if (sc->get_option_no_throw("--reference") && sc->count("--reference")) spec.reference = reference;
  if (sc->get_option_no_throw("--grid-step") && sc->count("--grid-step")) spec.grid_step = grid_step;
  if (spec.kind == hkconv::ExperimentKind::infconv_dp) spec.z0 = z0, spec.z1 = z1;

  hkconv::RunOutcome res = hkconv::run(spec);
  if (!out.empty() && res.exit_code != 2) {
    try {
      if (res.csv)
        hkconv::write_file(out, *res.csv), hkconv::write_file(hkconv::sidecar_path(out), res.report.dump(2) + "\n");
      else
        hkconv::write_file(out, res.report.dump(2) + "\n");
    } catch (const std::exception& e) {
      print_error(1, "io", e.what());
    }
  }
  std::cout << res.report.dump(2) << "\n";
  return res.exit_code;
}
