#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "json.hpp"

#include "fsi/assembly.hpp"
#include "fsi/coupling.hpp"
#include "fsi/error.hpp"
#include "fsi/fields.hpp"
#include "fsi/mesh.hpp"
#include "fsi/sparse.hpp"

namespace fsi {

enum class LinearSolverKind { direct_sparse, iterative };

/// How the bending block enters the plate operator: (1/lambda) S as in the
/// continuous static system, or S as written in the fully discrete system.
enum class BendingScaling { one_over_lambda, unscaled };

inline const char* to_string(BendingScaling b) {
  return b == BendingScaling::one_over_lambda ? "one-over-lambda" : "unscaled";
}

struct SolverConfig {
  double lambda = 1.0;
  double nu = 1.0;
  double rho = 1.0;
  int max_iterations = 20;
  double picard_tol = 1e-10;
  LinearSolverKind linear_solver = LinearSolverKind::direct_sparse;
  double iterative_tol = 1e-12;
  BendingScaling bending_scaling = BendingScaling::one_over_lambda;
  /// Use w2^n instead of w2^{n+1} in the w1 update.
  bool lagged_w1 = false;
  DirichletMode dirichlet = DirichletMode::symmetric_elimination;

  double bending_factor() const {
    return bending_scaling == BendingScaling::one_over_lambda ? 1.0 / lambda : 1.0;
  }

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be > 0");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be > 0");
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be >= 0");
    if (max_iterations < 1) throw ConfigError("iteration count must be >= 1");
    if (!(picard_tol > 0.0)) throw ConfigError("picard tolerance must be > 0");
  }
};

struct PicardState {
  Vector u1, u2, p, w1, w2;
  /// Plate velocity whose trace was imposed in the last fluid solve.
  Vector w2_trace;
  double mu = 0.0;
  double s = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Relative successive-iterate change per Picard iteration.
  std::vector<double> history;
};

struct FluidSolution {
  Vector u1, u2, p;
  double mu = 0.0;
};

struct PlateSolution {
  Vector w2;
  double s = 0.0;
};

struct NonlinearResidual {
  double fluid = 0.0;       // momentum + continuity rows, inf-norm
  double constraints = 0.0; // imposed velocity / clamped values
  double plate = 0.0;
  double w1 = 0.0;
  double load = 0.0;        // inf-norm of the right-hand sides
  double relative() const {
    const double r = std::max({fluid, constraints, plate, w1});
    return load > 0.0 ? r / load : r;
  }
};

struct CoercivityReport {
  bool fluid_ok = false;
  bool plate_ok = false;
  double fluid_min_pivot = 0.0;
  double plate_min_pivot = 0.0;
};

namespace detail {

inline double relative_change(const Vector& now, const Vector& before) {
  const double scale = std::max(now.norm(), before.norm());
  if (scale == 0.0) return 0.0;
  return (now - before).norm() / scale;
}

inline ColSparseMatrix restrict_to(const SparseMatrix& a, const std::vector<int>& keep) {
  std::vector<int> pos(a.rows(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) pos[keep[k]] = static_cast<int>(k);
  TripletBuffer t;
  for (int r = 0; r < a.outerSize(); ++r) {
    if (pos[r] < 0) continue;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      if (pos[it.col()] >= 0) t.add(pos[r], pos[it.col()], it.value());
    }
  }
  const int n = static_cast<int>(keep.size());
  return t.compress<ColSparseMatrix>(n, n);
}

/// Three consecutive increases, each above 1e3 times the first change.
inline bool diverging(const std::vector<double>& h) {
  const std::size_t n = h.size();
  if (n < 4) return false;
  const double limit = 1e3 * h.front();
  for (std::size_t k = n - 3; k < n; ++k) {
    if (!(h[k] > h[k - 1] && h[k] > limit)) return false;
  }
  return true;
}

}  // namespace detail

/// Picard solver for the coupled fluid/plate system on fixed meshes.
class FsiSolver {
public:
  FsiSolver(FluidMesh fluid, PlateMesh plate, SolverConfig config, const LoadSpec& loads)
      : fluid_(std::move(fluid)),
        plate_(std::move(plate)),
        config_(config) {
    config_.validate();
    system_ = assemble_constant_matrices(fluid_, plate_);
    loads_ = assemble_loads(fluid_, plate_, loads);
    trace_ = build_trace_constraint(fluid_, plate_);
    pressure_index_ = build_pressure_trace_index(fluid_);
    clamped_ = clamped_dofs(plate_);
  }

  const FluidMesh& fluid() const noexcept { return fluid_; }
  const PlateMesh& plate() const noexcept { return plate_; }
  const SolverConfig& config() const noexcept { return config_; }
  const SparseSystem& system() const noexcept { return system_; }
  const LoadVectors& loads() const noexcept { return loads_; }
  const TraceConstraint& trace() const noexcept { return trace_; }
  const PressureTraceIndex& pressure_index() const noexcept { return pressure_index_; }
  const std::vector<int>& clamped() const noexcept { return clamped_; }

  PicardState zero_state() const {
    PicardState st;
    st.u1 = Vector::Zero(system_.num_velocity);
    st.u2 = Vector::Zero(system_.num_velocity);
    st.p = Vector::Zero(system_.num_pressure);
    st.w1 = Vector::Zero(system_.num_plate);
    st.w2 = Vector::Zero(system_.num_plate);
    st.w2_trace = st.w2;
    return st;
  }

  /// Fluid saddle-point matrix and right-hand side before Dirichlet
  /// conditions. Unknown layout: [u1 (M) | u2 (M) | p (M_p) | mu].
  std::pair<ColSparseMatrix, Vector> fluid_system(const OseenMatrices* oseen) const {
    const int m = system_.num_velocity;
    const int mp = system_.num_pressure;
    const int n = 2 * m + mp + 1;
    SparseMatrix a = config_.lambda * system_.mf + config_.nu * system_.kf;
    if (oseen != nullptr) a += oseen->tx + oseen->ty;
    TripletBuffer t;
    t.reserve(2 * a.nonZeros() + 4 * system_.bx.nonZeros() + 2 * mp);
    t.add_block(a, 0, 0);
    t.add_block(a, m, m);
    t.add_block(system_.bx, 2 * m, 0);
    t.add_block(system_.by, 2 * m, m);
    t.add_block(system_.bx, 0, 2 * m, 1.0, true);
    t.add_block(system_.by, m, 2 * m, 1.0, true);
    for (int i = 0; i < mp; ++i) {
      t.add(2 * m + i, 2 * m + mp, system_.ep[i]);
      t.add(2 * m + mp, 2 * m + i, system_.ep[i]);
    }
    Vector rhs = Vector::Zero(n);
    rhs.head(m) = loads_.f1;
    rhs.segment(m, m) = loads_.f2;
    return {t.compress<ColSparseMatrix>(n, n), rhs};
  }

  /// Plate matrix and right-hand side before clamping. Unknown layout:
  /// [w2 (DOF_s) | s].
  std::pair<ColSparseMatrix, Vector> plate_system(const Vector& p_new,
                                                  const SparseMatrix* bn) const {
    const int ds = system_.num_plate;
    SparseMatrix a = config_.lambda * system_.ms +
                     config_.rho * config_.lambda * system_.ks +
                     config_.bending_factor() * system_.s;
    if (bn != nullptr) a -= *bn;
    TripletBuffer t;
    t.add_block(a, 0, 0);
    for (int i = 0; i < ds; ++i) {
      t.add(i, ds, -system_.es[i]);
      t.add(ds, i, -system_.es[i]);
    }
    Vector rhs = Vector::Zero(ds + 1);
    rhs.head(ds) = pressure_plate_load(pressure_index_, p_new, plate_) + loads_.f3;
    return {t.compress<ColSparseMatrix>(ds + 1, ds + 1), rhs};
  }

  FluidSolution solve_fluid_step(const Vector& w2n, const OseenMatrices* oseen,
                                 int iteration = 0) const {
    require_size(w2n, system_.num_plate, "solve_fluid_step(w2)");
    require_finite(w2n, "solve_fluid_step(w2)");
    auto [a, rhs] = fluid_system(oseen);
    const FixedValues fixed = velocity_constraints(trace_, system_.num_velocity, w2n);
    apply_dirichlet(a, rhs, fixed, config_.dirichlet);
    Vector x = solve(a, rhs, "fluid", iteration);
    impose(x, fixed);
    const int m = system_.num_velocity;
    const int mp = system_.num_pressure;
    return {x.head(m), x.segment(m, m), x.segment(2 * m, mp), x[2 * m + mp]};
  }

  PlateSolution solve_plate_step(const Vector& p_new, const SparseMatrix* bn,
                                 int iteration = 0) const {
    require_size(p_new, system_.num_pressure, "solve_plate_step(p)");
    require_finite(p_new, "solve_plate_step(p)");
    auto [a, rhs] = plate_system(p_new, bn);
    FixedValues fixed;
    for (int d : clamped_) fixed.emplace_back(d, 0.0);
    apply_dirichlet(a, rhs, fixed, config_.dirichlet);
    Vector x = solve(a, rhs, "plate", iteration);
    impose(x, fixed);
    const int ds = system_.num_plate;
    return {x.head(ds), x[ds]};
  }

  /// Solves lambda Ms w1 = Ms w2 + F4 with clamped DOFs pinned to zero.
  Vector update_w1(const Vector& w2) const {
    require_size(w2, system_.num_plate, "update_w1");
    ColSparseMatrix a = config_.lambda * system_.ms;
    Vector rhs = system_.ms * w2 + loads_.f4;
    FixedValues fixed;
    for (int d : clamped_) fixed.emplace_back(d, 0.0);
    apply_dirichlet(a, rhs, fixed);
    Eigen::SimplicialLDLT<ColSparseMatrix> ldlt(a);
    if (ldlt.info() != Eigen::Success) {
      throw SolverFailureError("w1 update: factorization failed", fluid_.n, 0);
    }
    Vector w1 = ldlt.solve(rhs);
    impose(w1, fixed);
    return w1;
  }

  /// Picard iteration. The initial iterate comes from the Stokes problem and
  /// the linear plate (no advection, no plate Picard term, zero plate trace).
  PicardState run_picard(std::ostream* log = nullptr) const {
    PicardState st = zero_state();
    {
      const FluidSolution f = solve_fluid_step(st.w2, nullptr, 0);
      const PlateSolution pl = solve_plate_step(f.p, nullptr, 0);
      st.w1 = update_w1(config_.lagged_w1 ? st.w2 : pl.w2);
      st.u1 = f.u1;
      st.u2 = f.u2;
      st.p = f.p;
      st.mu = f.mu;
      st.w2 = pl.w2;
      st.s = pl.s;
    }
    for (int it = 1; it <= config_.max_iterations; ++it) {
      const OseenMatrices oseen = assemble_oseen(fluid_, st.u1, st.u2);
      const FluidSolution f = solve_fluid_step(st.w2, &oseen, it);
      const SparseMatrix bn = assemble_plate_picard(plate_, st.w2);
      const PlateSolution pl = solve_plate_step(f.p, &bn, it);
      const Vector w1 = update_w1(config_.lagged_w1 ? st.w2 : pl.w2);

      const double du1 = detail::relative_change(f.u1, st.u1);
      const double du2 = detail::relative_change(f.u2, st.u2);
      const double dw2 = detail::relative_change(pl.w2, st.w2);
      const double change = std::max({du1, du2, dw2});

      st.w2_trace = st.w2;
      st.u1 = f.u1;
      st.u2 = f.u2;
      st.p = f.p;
      st.mu = f.mu;
      st.w2 = pl.w2;
      st.s = pl.s;
      st.w1 = w1;
      st.iterations = it;
      st.history.push_back(change);

      if (log != nullptr) {
        nlohmann::json rec = {{"n", fluid_.n},
                              {"iteration", it},
                              {"change", change},
                              {"du1", du1},
                              {"du2", du2},
                              {"dw2", dw2},
                              {"mu", st.mu},
                              {"s", st.s},
                              {"ep_dot_p", system_.ep.dot(st.p)},
                              {"es_dot_w2", system_.es.dot(st.w2)}};
        *log << rec.dump() << '\n';
      }

      if (!std::isfinite(change)) {
        throw NonconvergenceError("Picard iteration produced non-finite iterate",
                                  st.history);
      }
      if (change < config_.picard_tol) {
        st.converged = true;
        break;
      }
      if (detail::diverging(st.history)) {
        throw NonconvergenceError("Picard iteration diverging at n=" +
                                      std::to_string(fluid_.n),
                                  st.history);
      }
    }
    return st;
  }

  /// Residual of the fully nonlinear discrete system at `st`, with the Oseen
  /// and plate Picard matrices rebuilt from `st` itself.
  NonlinearResidual nonlinear_residual(const PicardState& st) const {
    NonlinearResidual r;
    const int m = system_.num_velocity;
    const int mp = system_.num_pressure;
    const int ds = system_.num_plate;

    const OseenMatrices oseen = assemble_oseen(fluid_, st.u1, st.u2);
    const auto [fa, frhs] = fluid_system(&oseen);
    Vector x(2 * m + mp + 1);
    x << st.u1, st.u2, st.p, st.mu;
    const FixedValues fixed = velocity_constraints(trace_, m, st.w2);
    std::vector<char> is_fixed(x.size(), 0);
    for (const auto& [dof, v] : fixed) {
      is_fixed[dof] = 1;
      r.constraints = std::max(r.constraints, std::abs(x[dof] - v));
    }
    const Vector fres = fa * x - frhs;
    for (Eigen::Index i = 0; i < fres.size(); ++i) {
      if (!is_fixed[i]) r.fluid = std::max(r.fluid, std::abs(fres[i]));
    }

    const SparseMatrix bn = assemble_plate_picard(plate_, st.w2);
    const auto [pa, prhs] = plate_system(st.p, &bn);
    Vector y(ds + 1);
    y << st.w2, st.s;
    const Vector pres = pa * y - prhs;
    std::vector<char> clamped(ds + 1, 0);
    for (int d : clamped_) {
      clamped[d] = 1;
      r.constraints = std::max({r.constraints, std::abs(st.w2[d]), std::abs(st.w1[d])});
    }
    for (Eigen::Index i = 0; i < pres.size(); ++i) {
      if (!clamped[i]) r.plate = std::max(r.plate, std::abs(pres[i]));
    }
    const Vector wres = config_.lambda * (system_.ms * st.w1) - system_.ms * st.w2 - loads_.f4;
    for (Eigen::Index i = 0; i < wres.size(); ++i) {
      if (!clamped[i]) r.w1 = std::max(r.w1, std::abs(wres[i]));
    }
    r.load = std::max({loads_.f1.lpNorm<Eigen::Infinity>(), loads_.f2.lpNorm<Eigen::Infinity>(),
                       loads_.f3.lpNorm<Eigen::Infinity>(), loads_.f4.lpNorm<Eigen::Infinity>()});
    return r;
  }

  /// Cholesky of the Dirichlet-reduced A0 blocks: lambda Mf + nu Kf on the
  /// free velocity nodes, and the plate operator on the unclamped DOFs.
  CoercivityReport coercivity_check() const {
    CoercivityReport rep;
    std::vector<int> free_fluid;
    for (int i = 0; i < fluid_.num_p2(); ++i) {
      if (fluid_.boundary_tag[i] == NodeTag::interior) free_fluid.push_back(i);
    }
    const SparseMatrix af = config_.lambda * system_.mf + config_.nu * system_.kf;
    const auto fluid_result = cholesky_min_pivot(detail::restrict_to(af, free_fluid));
    rep.fluid_ok = fluid_result.has_value();
    rep.fluid_min_pivot = fluid_result.value_or(0.0);

    std::vector<int> free_plate;
    for (int i = 0; i < system_.num_plate; ++i) {
      if (std::find(clamped_.begin(), clamped_.end(), i) == clamped_.end()) {
        free_plate.push_back(i);
      }
    }
    const SparseMatrix ap = config_.lambda * system_.ms +
                            config_.rho * config_.lambda * system_.ks +
                            config_.bending_factor() * system_.s;
    const auto plate_result = cholesky_min_pivot(detail::restrict_to(ap, free_plate));
    rep.plate_ok = plate_result.has_value();
    rep.plate_min_pivot = plate_result.value_or(0.0);
    return rep;
  }

private:
  static std::optional<double> cholesky_min_pivot(const ColSparseMatrix& a) {
    Eigen::SimplicialLLT<ColSparseMatrix> llt(a);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const ColSparseMatrix l = llt.matrixL();
    double min_pivot = std::numeric_limits<double>::infinity();
    for (int k = 0; k < l.outerSize(); ++k) {
      min_pivot = std::min(min_pivot, l.coeff(k, k) * l.coeff(k, k));
    }
    return min_pivot;
  }

  Vector solve(const ColSparseMatrix& a, const Vector& rhs, const char* what,
               int iteration) const {
    Vector x;
    if (config_.linear_solver == LinearSolverKind::direct_sparse) {
      Eigen::SparseLU<ColSparseMatrix, Eigen::COLAMDOrdering<int>> lu;
      lu.compute(a);
      if (lu.info() != Eigen::Success) {
        throw SolverFailureError(std::string(what) + " solve: singular factorization (" +
                                     lu.lastErrorMessage() + ")",
                                 fluid_.n, iteration);
      }
      x = lu.solve(rhs);
    } else {
      Eigen::BiCGSTAB<ColSparseMatrix, Eigen::IncompleteLUT<double>> it;
      it.setTolerance(config_.iterative_tol);
      it.setMaxIterations(20 * static_cast<int>(a.rows()));
      it.preconditioner().setDroptol(1e-6);
      it.preconditioner().setFillfactor(20);
      it.compute(a);
      x = it.solve(rhs);
      const double rel = (a * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
      if (it.info() != Eigen::Success || !(rel <= config_.iterative_tol)) {
        throw SolverFailureError(std::string(what) +
                                     " solve: iterative solver did not reach tolerance",
                                 fluid_.n, iteration);
      }
    }
    if (!x.allFinite()) {
      throw SolverFailureError(std::string(what) + " solve: non-finite solution",
                               fluid_.n, iteration);
    }
    return x;
  }

  FluidMesh fluid_;
  PlateMesh plate_;
  SolverConfig config_;
  SparseSystem system_;
  LoadVectors loads_;
  TraceConstraint trace_;
  PressureTraceIndex pressure_index_;
  std::vector<int> clamped_;
};

}  // namespace fsi
