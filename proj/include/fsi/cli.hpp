#pragma once

#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fsi/error.hpp"
#include "fsi/infsup.hpp"
#include "fsi/io.hpp"
#include "fsi/mesh.hpp"
#include "fsi/mms.hpp"
#include "fsi/solver.hpp"

namespace fsi::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,
  kNonconvergence = 3,
  kSolverFailure = 4,
  kInputError = 5,
};

struct RunConfig {
  std::string subcommand;
  int n = 16;
  std::vector<int> levels;
  SolverConfig solver;
  std::string bending = "one-over-lambda";
  std::string linear_solver = "direct";
  std::string format = "csv";
  int jobs = 1;
  std::string dump_fields;
  std::string dump_matrices;
  std::string dump_mesh;
  std::string log_json;
  std::string out;

  void validate() const {
    solver.validate();
    if (subcommand == "solve" && n < 2) throw ConfigError("--n must be >= 2");
    if (subcommand != "solve") {
      if (levels.empty()) throw ConfigError("--levels must not be empty");
      for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 2) throw ConfigError("--levels entries must be >= 2");
        if (i > 0 && levels[i] <= levels[i - 1]) {
          throw ConfigError("--levels must be strictly increasing");
        }
      }
    }
    if (subcommand == "infsup" && levels.back() > kMaxInfSupLevel) {
      throw ConfigError("infsup levels must be <= " + std::to_string(kMaxInfSupLevel));
    }
    if (jobs < 1) throw ConfigError("--jobs must be >= 1");
  }
};

namespace detail {

inline nlohmann::json solve_summary(const FsiSolver& solver, const PicardState& st,
                                    const ErrorRow& err) {
  const auto r = solver.nonlinear_residual(st);
  return {
      {"n", solver.fluid().n},
      {"iterations", st.iterations},
      {"converged", st.converged},
      {"history", st.history},
      {"mu", st.mu},
      {"s", st.s},
      {"nonlinear_residual", r.relative()},
      {"err_u1_H1", err.u1_h1},
      {"err_u2_H1", err.u2_h1},
      {"err_p_L2", err.p_l2},
      {"err_p_L2_mean_free", err.p_l2_mean_free},
      {"err_w1_H2", err.w1_h2},
  };
}

inline void dump_matrices(const fs::path& dir, const FsiSolver& solver, const PicardState& st) {
  const SparseSystem& s = solver.system();
  const std::map<std::string, const SparseMatrix*> mats = {
      {"Mf", &s.mf}, {"Kf", &s.kf}, {"Ms", &s.ms}, {"Ks", &s.ks},
      {"S", &s.s},   {"Bx", &s.bx}, {"By", &s.by}};
  for (const auto& [name, m] : mats) {
    write_atomic(dir / (name + ".mtx"), [&](std::ostream& os) { write_matrix_market(os, *m); });
  }
  write_atomic(dir / "Ep.mtx", [&](std::ostream& os) { write_vector_market(os, s.ep); });
  write_atomic(dir / "Es.mtx", [&](std::ostream& os) { write_vector_market(os, s.es); });
  const OseenMatrices oseen = assemble_oseen(solver.fluid(), st.u1, st.u2);
  write_atomic(dir / "Tx.mtx", [&](std::ostream& os) { write_matrix_market(os, oseen.tx); });
  write_atomic(dir / "Ty.mtx", [&](std::ostream& os) { write_matrix_market(os, oseen.ty); });
  const SparseMatrix bn = assemble_plate_picard(solver.plate(), st.w2);
  write_atomic(dir / "Bn.mtx", [&](std::ostream& os) { write_matrix_market(os, bn); });
}

inline int run_solve(const RunConfig& rc, std::ostream& out) {
  const ManufacturedProblem mp(params_from(rc.solver));
  FluidMesh fluid = build_fluid_mesh(rc.n);
  PlateMesh plate = build_plate_mesh(fluid);
  const FsiSolver solver(std::move(fluid), std::move(plate), rc.solver, mp.load_spec());

  std::ostringstream log;
  PicardState st;
  try {
    st = solver.run_picard(rc.log_json.empty() ? nullptr : &log);
  } catch (...) {
    if (!rc.log_json.empty()) write_atomic(rc.log_json, log.str());
    throw;
  }
  if (!rc.log_json.empty()) write_atomic(rc.log_json, log.str());
  if (!st.converged) {
    throw NonconvergenceError("no convergence within " +
                                  std::to_string(rc.solver.max_iterations) +
                                  " Picard iterations",
                              st.history);
  }
  const ErrorRow err = compute_errors(solver, st, mp);
  const std::string summary = solve_summary(solver, st, err).dump(2) + "\n";
  out << summary;
  if (!rc.out.empty()) write_atomic(rc.out, summary);
  if (!rc.dump_fields.empty()) {
    const fs::path dir(rc.dump_fields);
    write_atomic(dir / "fluid.csv",
                 [&](std::ostream& os) { write_fluid_csv(os, solver.fluid(), st); });
    write_atomic(dir / "plate.csv",
                 [&](std::ostream& os) { write_plate_csv(os, solver.plate(), st); });
  }
  if (!rc.dump_matrices.empty()) dump_matrices(rc.dump_matrices, solver, st);
  if (!rc.dump_mesh.empty()) {
    write_atomic(rc.dump_mesh, [&](std::ostream& os) { write_mesh(os, solver.fluid()); });
  }
  return kOk;
}

inline int run_study(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  std::ostringstream log;
  const ConvergenceReport rep = run_convergence_study(
      rc.levels, rc.solver, rc.log_json.empty() ? nullptr : &log, rc.jobs);
  if (!rc.log_json.empty()) write_atomic(rc.log_json, log.str());
  std::ostringstream csv;
  rep.write_csv(csv);
  if (!rc.out.empty()) write_atomic(rc.out, csv.str());
  if (rc.format == "text") {
    rep.write_text(out);
  } else {
    out << csv.str();
  }
  bool all_ok = true;
  for (const auto& r : rep.rows) {
    if (!r.ok) {
      err << "level n=" << r.n << " failed: " << r.failure << '\n';
      all_ok = false;
    }
  }
  return all_ok ? kOk : kNonconvergence;
}

inline int run_infsup(const RunConfig& rc, std::ostream& out) {
  const InfSupResult res = compute_discrete_infsup(rc.levels);
  std::ostringstream text;
  res.write_text(text);
  out << text.str();
  if (!rc.out.empty()) write_atomic(rc.out, text.str());
  return kOk;
}

}  // namespace detail

/// Parse and run; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Steady Navier-Stokes / plate coupled solver with manufactured-solution study"};
  app.require_subcommand(1);
  RunConfig rc;

  const std::map<std::string, BendingScaling> bending_map = {
      {"one-over-lambda", BendingScaling::one_over_lambda},
      {"unscaled", BendingScaling::unscaled}};
  const std::map<std::string, LinearSolverKind> solver_map = {
      {"direct", LinearSolverKind::direct_sparse}, {"iterative", LinearSolverKind::iterative}};

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--lambda", rc.solver.lambda, "Static parameter lambda")->capture_default_str();
    sub->add_option("--nu", rc.solver.nu, "Viscosity")->capture_default_str();
    sub->add_option("--rho", rc.solver.rho, "Rotational inertia")->capture_default_str();
    sub->add_option("--iters", rc.solver.max_iterations, "Maximum Picard iterations")
        ->capture_default_str();
    sub->add_option("--tol", rc.solver.picard_tol, "Picard relative change tolerance")
        ->capture_default_str();
    sub->add_option("--bending-scaling", rc.bending, "Bending block factor")
        ->check(CLI::IsMember({"one-over-lambda", "unscaled"}))
        ->capture_default_str();
    sub->add_option("--linear-solver", rc.linear_solver, "Linear solver")
        ->check(CLI::IsMember({"direct", "iterative"}))
        ->capture_default_str();
    sub->add_flag("--lagged-w1", rc.solver.lagged_w1, "Use the previous plate velocity in the w1 update");
    sub->add_option("--log-json", rc.log_json, "JSON-lines Picard log");
    sub->add_option("--out", rc.out, "Output file");
  };

  CLI::App* solve = app.add_subcommand("solve", "Solve one level of the manufactured problem");
  common(solve);
  solve->add_option("--n", rc.n, "Cells per side")->capture_default_str();
  solve->add_option("--dump-fields", rc.dump_fields, "Directory for fluid.csv and plate.csv");
  solve->add_option("--dump-matrices", rc.dump_matrices, "Directory for MatrixMarket files");
  solve->add_option("--dump-mesh", rc.dump_mesh, "Mesh file");

  std::vector<int> study_levels{4, 8, 16, 32, 64};
  CLI::App* study = app.add_subcommand("study", "Convergence study");
  common(study);
  study->add_option("--levels", study_levels, "Cells per side per level")
      ->delimiter(',')
      ->capture_default_str();
  study->add_option("--jobs", rc.jobs, "Concurrent levels")->capture_default_str();
  study->add_option("--format", rc.format, "Standard output format")
      ->check(CLI::IsMember({"csv", "text"}))
      ->capture_default_str();

  std::vector<int> infsup_levels{4, 8};
  CLI::App* infsup = app.add_subcommand("infsup", "Discrete inf-sup constants");
  infsup->add_option("--levels", infsup_levels, "Cells per side per level")
      ->delimiter(',')
      ->capture_default_str();
  infsup->add_option("--out", rc.out, "Output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kConfig;
  }

  try {
    rc.subcommand = app.get_subcommands().front()->get_name();
    rc.levels = rc.subcommand == "infsup" ? infsup_levels : study_levels;
    rc.solver.bending_scaling = bending_map.at(rc.bending);
    rc.solver.linear_solver = solver_map.at(rc.linear_solver);
    rc.validate();
    if (rc.subcommand == "solve") return detail::run_solve(rc, out);
    if (rc.subcommand == "study") return detail::run_study(rc, out, err);
    return detail::run_infsup(rc, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NonconvergenceError& e) {
    err << "nonconvergence: " << e.what() << '\n';
    return kNonconvergence;
  } catch (const SolverFailureError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace fsi::cli
