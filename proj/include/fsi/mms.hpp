#pragma once

#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "fsi/assembly.hpp"
#include "fsi/basis.hpp"
#include "fsi/fields.hpp"
#include "fsi/mesh.hpp"
#include "fsi/quadrature.hpp"
#include "fsi/solver.hpp"

namespace fsi {

/// Dense univariate polynomial, coefficients in ascending powers.
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  double operator()(double x, int order = 0) const {
    double acc = 0.0;
    for (int k = static_cast<int>(c_.size()) - 1; k >= order; --k) {
      double f = 1.0;
      for (int j = 0; j < order; ++j) f *= (k - j);
      acc = acc * x + f * c_[k];
    }
    return acc;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c_.empty() || b.c_.empty()) return {};
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }

  int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }

private:
  std::vector<double> c_;
};

struct ProblemParams {
  double lambda = 1.0;
  double nu = 1.0;
  double rho = 1.0;
  BendingScaling bending_scaling = BendingScaling::one_over_lambda;

  double bending_factor() const {
    return bending_scaling == BendingScaling::one_over_lambda ? 1.0 / lambda : 1.0;
  }
};

/// Polynomial manufactured solution on the unit square with the plate on
/// y = 1:
///   u1 = 6 (y^2 - y) x^3 (x-1)^3
///   u2 = -3 (2y^3 - 3y^2) x^2 (x-1)^2 (2x-1)
///   w2 = 3 x^2 (x-1)^2 (2x-1),  w1 = -w2,  p = x - y + 1.
class ManufacturedProblem {
public:
  explicit ManufacturedProblem(ProblemParams params = {}) : params_(params) {
    const Polynomial x({0.0, 1.0});
    const Polynomial xm1({-1.0, 1.0});
    const Polynomial two_xm1({-1.0, 2.0});
    a_ = Polynomial({0.0, -1.0, 1.0});          // y^2 - y
    b_ = x * x * x * xm1 * xm1 * xm1;           // x^3 (x-1)^3
    c_ = Polynomial({0.0, 0.0, -3.0, 2.0});     // 2y^3 - 3y^2
    d_ = x * x * xm1 * xm1 * two_xm1;           // x^2 (x-1)^2 (2x-1)
  }

  const ProblemParams& params() const noexcept { return params_; }

  /// Partial derivative d^dx/dx d^dy/dy of the velocity components.
  double u1(double x, double y, int dx = 0, int dy = 0) const {
    return 6.0 * a_(y, dy) * b_(x, dx);
  }
  double u2(double x, double y, int dx = 0, int dy = 0) const {
    return -3.0 * c_(y, dy) * d_(x, dx);
  }
  double p(double x, double y) const { return x - y + 1.0; }
  double p_mean_free(double x, double y) const { return x - y; }
  static constexpr double p_x = 1.0;
  static constexpr double p_y = -1.0;

  double w2(double x, int order = 0) const { return 3.0 * d_(x, order); }
  double w1(double x, int order = 0) const { return -w2(x, order); }

  double laplace_u1(double x, double y) const { return u1(x, y, 2, 0) + u1(x, y, 0, 2); }
  double laplace_u2(double x, double y) const { return u2(x, y, 2, 0) + u2(x, y, 0, 2); }

  /// lambda u - nu Lap u + (u . grad) u + grad p, first component.
  double f1(double x, double y) const {
    const auto& q = params_;
    return q.lambda * u1(x, y) - q.nu * laplace_u1(x, y) +
           u1(x, y) * u1(x, y, 1, 0) + u2(x, y) * u1(x, y, 0, 1) + p_x;
  }

  double f2(double x, double y) const {
    const auto& q = params_;
    return q.lambda * u2(x, y) - q.nu * laplace_u2(x, y) +
           u1(x, y) * u2(x, y, 1, 0) + u2(x, y) * u2(x, y, 0, 1) + p_y;
  }

  /// Plate residual forcing: plate operator applied to w2, minus the
  /// pressure trace and the flux term 1/2 w2^2.
  double fp(double x) const {
    const auto& q = params_;
    const double w = w2(x);
    return q.lambda * w - q.rho * q.lambda * w2(x, 2) + q.bending_factor() * w2(x, 4) -
           p(x, 1.0) - 0.5 * w * w;
  }

  /// Data of the w1 equation: lambda w1 - w2.
  double g1(double x) const { return params_.lambda * w1(x) - w2(x); }

  LoadSpec load_spec() const {
    LoadSpec s;
    s.f1 = [this](double x, double y) { return f1(x, y); };
    s.f2 = [this](double x, double y) { return f2(x, y); };
    s.fp = [this](double x) { return fp(x); };
    s.g1 = [this](double x) { return g1(x); };
    return s;
  }

private:
  ProblemParams params_;
  Polynomial a_, b_, c_, d_;
};

inline ProblemParams params_from(const SolverConfig& cfg) {
  return {cfg.lambda, cfg.nu, cfg.rho, cfg.bending_scaling};
}

// ---------------------------------------------------------------------------
// Error norms
// ---------------------------------------------------------------------------

struct ErrorRow {
  int n = 0;
  double h = 0.0;
  double u1_h1 = 0.0;
  double u2_h1 = 0.0;
  double p_l2 = 0.0;            // (p_h + s) against x - y + 1
  double p_l2_mean_free = 0.0;  // p_h against x - y
  double w1_h2 = 0.0;
  // interpolant-vs-exact diagnostics
  double interp_u1_h1 = 0.0;
  double interp_u2_h1 = 0.0;
  double interp_p_l2 = 0.0;
  double interp_w1_h2 = 0.0;
  int iterations = 0;
  double s = 0.0;
  double mu = 0.0;
  bool ok = true;
  std::string failure;
};

namespace detail {

struct FluidErrors {
  double u1_h1 = 0.0, u2_h1 = 0.0, p_l2 = 0.0, p_l2_mean_free = 0.0;
};

inline FluidErrors fluid_errors(const FluidMesh& mesh, const ManufacturedProblem& mp,
                                const Vector& u1, const Vector& u2, const Vector& p,
                                double p_shift, int degree) {
  const TriangleRule rule = triangle_quadrature(degree);
  FluidErrors e;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const AffineTriangle geo = mesh.geometry(t);
    const auto& v = mesh.p2_connectivity[t];
    const auto& pv = mesh.p1_connectivity[t];
    const auto l1 = gather(u1, v);
    const auto l2 = gather(u2, v);
    const auto lp = gather(p, pv);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point2 x = geo.map(rule.points[q]);
      const auto ref = p2_grad(rule.points[q]);
      const auto psi = p1_shape(rule.points[q]);
      Point2 g1{0.0, 0.0};
      Point2 g2{0.0, 0.0};
      for (int k = 0; k < 6; ++k) {
        const Point2 g = geo.push_forward(ref[k]);
        g1[0] += l1[k] * g[0];
        g1[1] += l1[k] * g[1];
        g2[0] += l2[k] * g[0];
        g2[1] += l2[k] * g[1];
      }
      const double ph = lp[0] * psi[0] + lp[1] * psi[1] + lp[2] * psi[2];
      const double w = rule.weights[q] * geo.det();
      const double e1x = g1[0] - mp.u1(x[0], x[1], 1, 0);
      const double e1y = g1[1] - mp.u1(x[0], x[1], 0, 1);
      const double e2x = g2[0] - mp.u2(x[0], x[1], 1, 0);
      const double e2y = g2[1] - mp.u2(x[0], x[1], 0, 1);
      const double ep = ph + p_shift - mp.p(x[0], x[1]);
      const double epm = ph - mp.p_mean_free(x[0], x[1]);
      e.u1_h1 += w * (e1x * e1x + e1y * e1y);
      e.u2_h1 += w * (e2x * e2x + e2y * e2y);
      e.p_l2 += w * ep * ep;
      e.p_l2_mean_free += w * epm * epm;
    }
  }
  e.u1_h1 = std::sqrt(e.u1_h1);
  e.u2_h1 = std::sqrt(e.u2_h1);
  e.p_l2 = std::sqrt(e.p_l2);
  e.p_l2_mean_free = std::sqrt(e.p_l2_mean_free);
  return e;
}

inline double plate_h2_error(const PlateMesh& plate, const ManufacturedProblem& mp,
                             const Vector& w1) {
  static const IntervalRule rule = interval_quadrature(kPlateDegree);
  double acc = 0.0;
  for (int e = 0; e < plate.num_elements(); ++e) {
    const double ell = plate.length(e);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double t = rule.points[q][0];
      const double x = plate.origin(e) + ell * t;
      const double d = plate_eval_local(plate, e, t, w1, 2) - mp.w1(x, 2);
      acc += rule.weights[q] * ell * d * d;
    }
  }
  return std::sqrt(acc);
}

}  // namespace detail

/// Error norms of a converged state against the manufactured solution.
inline ErrorRow compute_errors(const FsiSolver& solver, const PicardState& st,
                               const ManufacturedProblem& mp, int degree = kLoadDegree) {
  if (!st.converged) {
    throw NonconvergenceError("compute_errors: state is not converged", st.history);
  }
  const FluidMesh& mesh = solver.fluid();
  const PlateMesh& plate = solver.plate();
  ErrorRow row;
  row.n = mesh.n;
  row.h = mesh.h;
  row.iterations = st.iterations;
  row.s = st.s;
  row.mu = st.mu;

  const auto fe = detail::fluid_errors(mesh, mp, st.u1, st.u2, st.p, st.s, degree);
  row.u1_h1 = fe.u1_h1;
  row.u2_h1 = fe.u2_h1;
  row.p_l2 = fe.p_l2;
  row.p_l2_mean_free = fe.p_l2_mean_free;
  row.w1_h2 = detail::plate_h2_error(plate, mp, st.w1);

  const Vector iu1 = p2_interpolate(mesh, [&](double x, double y) { return mp.u1(x, y); });
  const Vector iu2 = p2_interpolate(mesh, [&](double x, double y) { return mp.u2(x, y); });
  const Vector ip = p1_interpolate(mesh, [&](double x, double y) { return mp.p_mean_free(x, y); });
  const auto ie = detail::fluid_errors(mesh, mp, iu1, iu2, ip, 1.0, degree);
  row.interp_u1_h1 = ie.u1_h1;
  row.interp_u2_h1 = ie.u2_h1;
  row.interp_p_l2 = ie.p_l2;
  const Vector iw1 = plate_interpolate(
      plate, [&](double x) { return mp.w1(x); }, [&](double x) { return mp.w1(x, 1); });
  row.interp_w1_h2 = detail::plate_h2_error(plate, mp, iw1);
  return row;
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

struct ConvergenceReport {
  std::vector<ErrorRow> rows;  // ordered by decreasing h

  /// Observed order between row i-1 and row i for the given error column;
  /// NaN when unavailable. With halving h this is log2 of the error quotient.
  double rate(std::size_t i, double ErrorRow::*column) const {
    if (i == 0 || i >= rows.size()) return std::numeric_limits<double>::quiet_NaN();
    const ErrorRow& a = rows[i - 1];
    const ErrorRow& b = rows[i];
    if (!a.ok || !b.ok) return std::numeric_limits<double>::quiet_NaN();
    return std::log(a.*column / b.*column) / std::log(a.h / b.h);
  }

  void write_csv(std::ostream& os) const {
    os << "h,err_u1_H1,rate,err_u2_H1,rate,err_p_L2,rate,err_w1_H2,rate\n";
    char buf[64];
    const auto num = [&](double v) -> std::string {
      if (std::isnan(v)) return "";
      std::snprintf(buf, sizeof buf, "%.6e", v);
      return buf;
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const ErrorRow& r = rows[i];
      std::snprintf(buf, sizeof buf, "%.8g", r.h);
      os << buf;
      for (double ErrorRow::*col :
           {&ErrorRow::u1_h1, &ErrorRow::u2_h1, &ErrorRow::p_l2, &ErrorRow::w1_h2}) {
        os << ',' << (r.ok ? num(r.*col) : std::string("FAILED")) << ','
           << num(rate(i, col));
      }
      os << '\n';
    }
  }

  /// Two fixed-width tables: velocity gradients, then pressure and plate.
  void write_text(std::ostream& os) const {
    char buf[256];
    const auto cell = [&](double v) -> std::string {
      if (std::isnan(v)) return "";
      std::snprintf(buf, sizeof buf, "%.2E", v);
      return buf;
    };
    const auto table = [&](const char* t1, double ErrorRow::*c1, const char* r1,
                           const char* t2, double ErrorRow::*c2, const char* r2) {
      std::snprintf(buf, sizeof buf, "%-10s | %-24s | %-10s | %-24s | %-10s\n", "h", t1, r1,
                    t2, r2);
      os << buf << std::string(90, '-') << '\n';
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const ErrorRow& r = rows[i];
        const std::string e1 = r.ok ? cell(r.*c1) : "FAILED";
        const std::string e2 = r.ok ? cell(r.*c2) : "FAILED";
        const std::string q1 = cell(rate(i, c1));
        const std::string q2 = cell(rate(i, c2));
        std::snprintf(buf, sizeof buf, "%-10g | %-24s | %-10s | %-24s | %-10s\n", r.h,
                      e1.c_str(), q1.c_str(), e2.c_str(), q2.c_str());
        os << buf;
      }
      os << '\n';
    };
    table("|grad(u1 - u1h)|", &ErrorRow::u1_h1, "H1 rate", "|grad(u2 - u2h)|",
          &ErrorRow::u2_h1, "H1 rate");
    table("|p - ph|", &ErrorRow::p_l2, "L2 rate", "|w1'' - w1h''|", &ErrorRow::w1_h2,
          "H2 rate");
  }
};

/// Solve one refinement level and evaluate its errors.
inline std::pair<ErrorRow, PicardState> solve_level(int n, const SolverConfig& config,
                                                    std::ostream* log = nullptr) {
  const ManufacturedProblem mp(params_from(config));
  FluidMesh fluid = build_fluid_mesh(n);
  PlateMesh plate = build_plate_mesh(fluid);
  const FsiSolver solver(std::move(fluid), std::move(plate), config, mp.load_spec());
  PicardState st = solver.run_picard(log);
  if (!st.converged) {
    throw NonconvergenceError("no convergence within " +
                                  std::to_string(config.max_iterations) +
                                  " Picard iterations at n=" + std::to_string(n),
                              st.history);
  }
  return {compute_errors(solver, st, mp), std::move(st)};
}

/// Run every level; a level that fails to converge or solve yields a row
/// with ok = false rather than aborting the study. `jobs` > 1 solves levels
/// concurrently (the per-iteration log is then disabled).
inline ConvergenceReport run_convergence_study(const std::vector<int>& levels,
                                               const SolverConfig& config,
                                               std::ostream* log = nullptr, int jobs = 1) {
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) {
      throw ConfigError("run_convergence_study: levels must be strictly increasing");
    }
  }
  config.validate();
  const auto one = [&config](int n, std::ostream* lg) {
    try {
      return solve_level(n, config, lg).first;
    } catch (const Error& e) {
      ErrorRow r;
      r.n = n;
      r.h = 1.0 / n;
      r.ok = false;
      r.failure = e.what();
      return r;
    }
  };
  ConvergenceReport rep;
  if (jobs <= 1) {
    for (int n : levels) rep.rows.push_back(one(n, log));
  } else {
    std::vector<std::future<ErrorRow>> futures;
    for (int n : levels) futures.push_back(std::async(std::launch::async, one, n, nullptr));
    for (auto& f : futures) rep.rows.push_back(f.get());
  }
  return rep;
}

}  // namespace fsi
