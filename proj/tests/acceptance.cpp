// Acceptance checks for the coupled fluid/plate solver. Prints one PASS/FAIL
// line per criterion and exits nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fsi/cli.hpp"
#include "fsi/infsup.hpp"
#include "fsi/mms.hpp"
#include "oracle.hpp"

using namespace fsi;

namespace {

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  std::printf("%s  criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct StudyTable {
  std::vector<double> h;
  std::vector<std::vector<double>> err, rate;  // per level, 4 columns each
};

StudyTable parse_csv(const std::string& csv) {
  StudyTable t;
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    cells.resize(9);
    const auto num = [](const std::string& s) {
      return s.empty() || s == "FAILED" ? std::nan("") : std::stod(s);
    };
    t.h.push_back(num(cells[0]));
    std::vector<double> e, r;
    for (int k = 0; k < 4; ++k) {
      e.push_back(num(cells[1 + 2 * k]));
      r.push_back(num(cells[2 + 2 * k]));
    }
    t.err.push_back(e);
    t.rate.push_back(r);
  }
  return t;
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::array<oracle::P, 3> verts(const FluidMesh& m, int t) {
  const auto& c = m.triangles[t];
  return {m.vertices[c[0]], m.vertices[c[1]], m.vertices[c[2]]};
}

// ---------------------------------------------------------------------------

StudyTable criterion_convergence() {
  const char* argv[] = {"fsi_cli", "study", "--levels", "4,8,16,32,64"};
  std::ostringstream out, err;
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli::run(static_cast<int>(std::size(argv)), argv, out, err);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << out.str();
  const StudyTable t = parse_csv(out.str());
  if (code != 0 || t.h.size() != 5) {
    report(1, "convergence rates", false, "study exited " + std::to_string(code) + ": " + err.str());
    return t;
  }
  const double r_u1 = t.rate[4][0];
  const double r_u2 = t.rate[4][1];
  double p_min = std::numeric_limits<double>::infinity();
  for (int i = 2; i <= 4; ++i) p_min = std::min(p_min, t.rate[i][2]);
  const double w_a = t.rate[3][3];
  const double w_b = t.rate[4][3];
  const bool u1_ok = in(r_u1, 1.85, 2.15);
  const bool u2_ok = in(r_u2, 1.85, 2.15);
  const bool p_ok = p_min >= 1.9;
  const bool w_ok = in(w_a, 0.85, 1.15) && in(w_b, 0.85, 1.15);
  const bool time_ok = secs < 300.0;
  std::ostringstream d;
  d << "u1 H1 " << fmt("%.3f", r_u1) << (u1_ok ? "" : " out of [1.85,2.15]") << "; u2 H1 "
    << fmt("%.3f", r_u2) << (u2_ok ? "" : " out of [1.85,2.15]") << "; p L2 min "
    << fmt("%.3f", p_min) << (p_ok ? "" : " below 1.9") << "; w1 H2 " << fmt("%.3f", w_a)
    << ", " << fmt("%.3f", w_b) << (w_ok ? "" : " out of [0.85,1.15]") << "; "
    << fmt("%.1f", secs) << " s";
  report(1, "convergence rates", u1_ok && u2_ok && p_ok && w_ok && time_ok, d.str());
  return t;
}

void criterion_magnitudes(const StudyTable& t) {
  if (t.h.empty() || std::isnan(t.err[0][0])) {
    report(2, "error magnitudes at h=0.25", false, "no study row for h=0.25");
    return;
  }
  const double u1 = t.err[0][0];
  const double p = t.err[0][2];
  const auto within5 = [](double v, double ref) { return v >= ref / 5 && v <= ref * 5; };
  const bool ok = t.h[0] == 0.25 && within5(u1, 7.47e-3) && within5(p, 1.56e-2);
  report(2, "error magnitudes at h=0.25", ok,
         "u1 H1 " + fmt("%.3e", u1) + " vs 7.47e-03; p L2 " + fmt("%.3e", p) + " vs 1.56e-02");
}

void criterion_element_oracles() {
  double worst = 0.0;
  int checked = 0;
  for (int n : {4, 8}) {
    const FluidMesh m = build_fluid_mesh(n);
    const PlateMesh plate = build_plate_mesh(m);
    std::mt19937 rng(100 + n);
    std::uniform_int_distribution<int> tri(0, m.num_triangles() - 1);
    std::uniform_int_distribution<int> seg(0, plate.num_elements() - 1);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const auto coeffs = [&] {
      std::array<double, 6> c{};
      for (double& x : c) x = coef(rng);
      return c;
    };
    for (int k = 0; k < 4; ++k) {
      const int t = tri(rng);
      const auto geo = m.geometry(t);
      const auto v = verts(m, t);
      worst = std::max(worst, oracle::rel_diff(p2_mass_element(geo), oracle::p2_mass(v)));
      worst = std::max(worst, oracle::rel_diff(p2_stiffness_element(geo), oracle::p2_stiffness(v)));
      const auto [bx, by] = divergence_element(geo);
      const auto [obx, oby] = oracle::divergence(v);
      worst = std::max({worst, oracle::rel_diff(bx, obx), oracle::rel_diff(by, oby)});
      const auto u1 = coeffs();
      const auto u2 = coeffs();
      const auto [tx, ty] = oseen_element(geo, u1, u2);
      const auto [otx, oty] = oracle::oseen(v, u1, u2);
      worst = std::max({worst, oracle::rel_diff(tx, otx), oracle::rel_diff(ty, oty)});

      const int e = seg(rng);
      const double a = plate.elements[e][0];
      const double b = plate.elements[e][1];
      for (int order = 0; order <= 2; ++order) {
        worst = std::max(worst, oracle::rel_diff(hermite_element(b - a, order),
                                                 oracle::hermite_matrix(a, b, order)));
      }
      const auto w = coeffs();
      worst = std::max(worst,
                       oracle::rel_diff(plate_picard_element(b - a, w), oracle::plate_picard(a, b, w)));
      ++checked;
    }
  }
  report(3, "element matrices vs brute-force oracle", worst <= 1e-12,
         std::to_string(checked) + " fluid and plate elements, max rel diff " + fmt("%.2e", worst));
}

struct Solved {
  FsiSolver solver;
  PicardState state;
};

Solved solve(int n, const SolverConfig& cfg = {}) {
  static const ManufacturedProblem mp;
  FluidMesh fluid = build_fluid_mesh(n);
  PlateMesh plate = build_plate_mesh(fluid);
  FsiSolver s(std::move(fluid), std::move(plate), cfg, mp.load_spec());
  PicardState st = s.run_picard();
  return {std::move(s), std::move(st)};
}

void criterion_constraints(const std::vector<Solved>& runs) {
  bool ok = true;
  double ep = 0.0, es = 0.0, lag = 0.0;
  int unconverged = 0, clamped_bad = 0, wall_bad = 0, trace_bad = 0;
  for (const auto& [s, st] : runs) {
    if (!st.converged) {
      ++unconverged;
      continue;
    }
    const SparseSystem& a = s.system();
    const double rp = std::abs(a.ep.dot(st.p)) / (1.0 + st.p.norm());
    const double rw = std::abs(a.es.dot(st.w2)) / (1.0 + st.w2.norm());
    ep = std::max(ep, rp);
    es = std::max(es, rw);
    for (int d : s.clamped()) clamped_bad += st.w2[d] != 0.0 || st.w1[d] != 0.0;
    for (int node : s.trace().s_nodes) wall_bad += st.u1[node] != 0.0 || st.u2[node] != 0.0;
    for (const auto& e : s.trace().entries) {
      trace_bad += st.u1[e.fluid_node] != 0.0 || st.u2[e.fluid_node] != e.value(st.w2_trace);
      lag = std::max(lag, std::abs(st.u2[e.fluid_node] - e.value(st.w2)));
    }
  }
  ok = unconverged == 0 && ep <= 1e-10 && es <= 1e-10 && clamped_bad == 0 && wall_bad == 0 &&
       trace_bad == 0;
  report(4, "constraint residuals", ok,
         "n=4..32, max |Ep.p|/(1+|p|) " + fmt("%.1e", ep) + ", max |Es.w2|/(1+|w2|) " +
             fmt("%.1e", es) + "; inexact values: clamped " + std::to_string(clamped_bad) +
             ", wall " + std::to_string(wall_bad) + ", plate trace " + std::to_string(trace_bad) +
             "; unconverged levels " + std::to_string(unconverged) +
             "; trace vs final plate iterate " + fmt("%.1e", lag));
}

void criterion_coercivity() {
  bool ok = true;
  std::string d;
  for (int n : {4, 8, 16}) {
    const ManufacturedProblem mp;
    const FsiSolver s(build_fluid_mesh(n), build_plate_mesh(build_fluid_mesh(n)), SolverConfig{},
                      mp.load_spec());
    const CoercivityReport r = s.coercivity_check();
    ok = ok && r.fluid_ok && r.plate_ok;
    d += "n=" + std::to_string(n) + " min pivots " + fmt("%.2e", r.fluid_min_pivot) + "/" +
         fmt("%.2e", r.plate_min_pivot) + (r.fluid_ok && r.plate_ok ? "" : " FAILED") + "; ";
  }
  d.resize(d.size() - 2);
  report(5, "Cholesky of the reduced principal blocks", ok, d);
}

void criterion_picard(const Solved& run16) {
  const auto& h = run16.state.history;
  int first_below = -1;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k] < 1e-8) {
      first_below = static_cast<int>(k) + 1;
      break;
    }
  }
  bool monotone = true;
  for (std::size_t k = 3; k < h.size(); ++k) monotone = monotone && h[k] <= h[k - 1];
  const bool ok = run16.state.converged && first_below > 0 && first_below < 20 && monotone;
  std::ostringstream d;
  d << "n=16, change below 1e-8 at iteration " << first_below << ", history";
  for (double v : h) d << ' ' << fmt("%.1e", v);
  d << (monotone ? ", non-increasing after iteration 3" : ", increases after iteration 3");
  report(6, "Picard behaviour", ok, d.str());
}

void criterion_fixed_point(const Solved& run16) {
  const NonlinearResidual r = run16.solver.nonlinear_residual(run16.state);
  report(7, "fixed-point consistency", run16.state.converged && r.relative() <= 1e-8,
         "n=16 relative residual " + fmt("%.2e", r.relative()) + " (fluid " + fmt("%.1e", r.fluid) +
             ", plate " + fmt("%.1e", r.plate) + ", w1 " + fmt("%.1e", r.w1) + ", load " +
             fmt("%.2e", r.load) + ")");
}

void criterion_mms() {
  const ManufacturedProblem mp;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double div = 0.0, trace = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng);
    const double y = u(rng);
    div = std::max(div, std::abs(mp.u1(x, y, 1, 0) + mp.u2(x, y, 0, 1)));
    trace = std::max({trace, std::abs(mp.u1(x, 1.0)), std::abs(mp.u2(x, 1.0) - mp.w2(x))});
  }
  const double w_mean = oracle::integrate_interval(0, 1, [&](double x) { return mp.w2(x); });
  const std::array<oracle::P, 3> lower{oracle::P{0, 0}, oracle::P{1, 0}, oracle::P{1, 1}};
  const std::array<oracle::P, 3> upper{oracle::P{0, 0}, oracle::P{1, 1}, oracle::P{0, 1}};
  const auto q = [&](oracle::P p) { return mp.p_mean_free(p[0], p[1]); };
  const double p_mean = oracle::integrate_triangle(lower, q) + oracle::integrate_triangle(upper, q);
  double clamp = 0.0;
  for (double x : {0.0, 1.0}) clamp = std::max({clamp, std::abs(mp.w2(x)), std::abs(mp.w2(x, 1))});
  const double worst = std::max({div, trace, std::abs(w_mean), std::abs(p_mean), clamp});
  report(8, "manufactured solution invariants", worst <= 1e-13,
         "100 points: div " + fmt("%.1e", div) + ", trace " + fmt("%.1e", trace) + ", mean w2 " +
             fmt("%.1e", w_mean) + ", mean p " + fmt("%.1e", p_mean) + ", clamped " +
             fmt("%.1e", clamp));
}

void criterion_infsup() {
  const InfSupEntry a = compute_discrete_infsup(4);
  const InfSupEntry b = compute_discrete_infsup(8);
  double gap = 0.0;
  for (int n : {4, 8}) {
    const InfSupBlocks blk = infsup_blocks(build_fluid_mesh(n));
    const double ref = oracle::infsup_svd(blk.a, blk.b, blk.q, blk.mean);
    gap = std::max(gap, std::abs(ref - (n == 4 ? a.beta : b.beta)));
  }
  const bool ok = a.beta > 0.0 && b.beta > 0.0 && b.beta >= 0.9 * a.beta && gap <= 1e-10;
  report(9, "discrete inf-sup", ok,
         "beta(1/4) " + fmt("%.6f", a.beta) + ", beta(1/8) " + fmt("%.6f", b.beta) +
             ", SVD oracle gap " + fmt("%.1e", gap));
}

}  // namespace

int main() {
  try {
    const StudyTable t = criterion_convergence();
    criterion_magnitudes(t);
    criterion_element_oracles();
    std::vector<Solved> runs;
    for (int n : {4, 8, 16, 32}) runs.push_back(solve(n));  // default N = 20
    criterion_constraints(runs);
    criterion_coercivity();
    criterion_picard(runs[2]);
    criterion_fixed_point(runs[2]);
    criterion_mms();
    criterion_infsup();
  } catch (const std::exception& e) {
    std::printf("FAIL  unexpected error: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
