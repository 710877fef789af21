#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "gridsced/common.hpp"
#include "gridsced/lp.hpp"

using namespace gridsced;
using namespace gridsced::lp;

namespace {

// min 3x - 2y + z with one slack row, one binding inequality and one
// equality; the optimum (3, 7, 0) is a nondegenerate vertex so the duals
// (0, -2, +0.5) and the reduced cost of z (+0.5) are unique.
struct KktOracle {
  LinearProgram lp;
  int x, y, z, r1, r2, r3;
  KktOracle() {
    x = lp.add_variable("x", 0.0, 5.0, 3.0);
    y = lp.add_variable("y", 0.0, 8.0, -2.0);
    z = lp.add_variable("z", 0.0, 6.0, 1.0);
    r1 = lp.add_row("r1", Sense::LessEqual, 11.0);
    lp.add_term(r1, x, 1.0);
    lp.add_term(r1, y, 1.0);
    lp.add_term(r1, z, 1.0);
    r2 = lp.add_row("r2", Sense::LessEqual, 4.0);
    lp.add_term(r2, x, -1.0);
    lp.add_term(r2, y, 1.0);
    r3 = lp.add_row("r3", Sense::Equal, 6.0);
    lp.add_term(r3, x, 2.0);
    lp.add_term(r3, z, 1.0);
  }
};

void check_kkt(const LinearProgram& p, const LpSolution& s, double tol) {
  REQUIRE(s.status == LpStatus::Optimal);
  // Primal feasibility.
  for (int j = 0; j < p.num_variables(); ++j) {
    CHECK(s.x[j] >= p.lower_bound(j) - tol);
    CHECK(s.x[j] <= p.upper_bound(j) + tol);
  }
  for (int i = 0; i < p.num_rows(); ++i) {
    const double act = s.row_activity[i];
    switch (p.row_sense(i)) {
      case Sense::LessEqual: CHECK(act <= p.rhs(i) + tol); break;
      case Sense::GreaterEqual: CHECK(act >= p.rhs(i) - tol); break;
      case Sense::Equal: CHECK(std::abs(act - p.rhs(i)) <= tol); break;
    }
  }
  // Dual signs (d obj / d rhs of a minimization) and complementary
  // slackness.
  for (int i = 0; i < p.num_rows(); ++i) {
    const double d = s.row_duals[i];
    const double slack = p.rhs(i) - s.row_activity[i];
    if (p.row_sense(i) == Sense::LessEqual) CHECK(d <= tol);
    if (p.row_sense(i) == Sense::GreaterEqual) CHECK(d >= -tol);
    if (p.row_sense(i) != Sense::Equal) CHECK(std::abs(d * slack) <= tol * 100);
  }
  // Stationarity: cost = sum of dual * coefficient + reduced cost, with the
  // reduced-cost sign fixed by which bound the variable sits at.
  std::vector<double> dual_col(p.num_variables(), 0.0);
  for (int i = 0; i < p.num_rows(); ++i)
    for (const auto& [var, coef] : p.row_terms(i)) dual_col[var] += s.row_duals[i] * coef;
  for (int j = 0; j < p.num_variables(); ++j) {
    const double rc = p.cost(j) - dual_col[j];
    CHECK(std::abs(rc - s.reduced_costs[j]) <= tol * 100);
    const bool at_lower = s.x[j] <= p.lower_bound(j) + tol;
    const bool at_upper = s.x[j] >= p.upper_bound(j) - tol;
    if (!at_lower && !at_upper) CHECK(std::abs(rc) <= tol * 100);
    if (at_lower && !at_upper) CHECK(rc >= -tol * 100);
    if (at_upper && !at_lower) CHECK(rc <= tol * 100);
  }
  // Strong duality through the objective.
  double obj = 0.0;
  for (int j = 0; j < p.num_variables(); ++j) obj += p.cost(j) * s.x[j];
  CHECK(std::abs(obj - s.objective_value) <= tol * 100);
}

}  // namespace

TEST_SUITE("lp") {

TEST_CASE("nondegenerate vertex with frozen primal and dual values") {
  KktOracle o;
  const LpSolution s = solve_lp(o.lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective_value == doctest::Approx(-5.0).epsilon(1e-9));
  CHECK(s.x[o.x] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(s.x[o.y] == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(s.x[o.z] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s.row_duals[o.r1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s.row_duals[o.r2] == doctest::Approx(-2.0).epsilon(1e-9));
  CHECK(s.row_duals[o.r3] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(s.reduced_costs[o.z] == doctest::Approx(0.5).epsilon(1e-9));
  check_kkt(o.lp, s, 1e-9);
}

TEST_CASE("duals are finite-difference derivatives of the objective") {
  KktOracle o;
  const LpSolution s = solve_lp(o.lp);
  REQUIRE(s.status == LpStatus::Optimal);
  const double h = 1e-4;
  for (int i = 0; i < o.lp.num_rows(); ++i) {
    // Rebuild with a shifted rhs on row i only.
    LinearProgram shifted;
    for (int j = 0; j < o.lp.num_variables(); ++j)
      shifted.add_variable(o.lp.variable_name(j), o.lp.lower_bound(j), o.lp.upper_bound(j),
                           o.lp.cost(j));
    for (int r = 0; r < o.lp.num_rows(); ++r) {
      const int row = shifted.add_row(o.lp.row_name(r), o.lp.row_sense(r),
                                      o.lp.rhs(r) + (r == i ? h : 0.0));
      for (const auto& [var, coef] : o.lp.row_terms(r)) shifted.add_term(row, var, coef);
    }
    const LpSolution b = solve_lp(shifted);
    REQUIRE(b.status == LpStatus::Optimal);
    CHECK((b.objective_value - s.objective_value) / h ==
          doctest::Approx(s.row_duals[i]).epsilon(1e-6));
  }
}

TEST_CASE("binding >= row of a minimization has a positive dual") {
  LinearProgram p;
  const int x = p.add_variable("x", 0.0, 10.0, 1.0);
  const int r = p.add_row("floor", Sense::GreaterEqual, 2.5);
  p.add_term(r, x, 1.0);
  const LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.x[x] == doctest::Approx(2.5));
  CHECK(s.objective_value == doctest::Approx(2.5));
  CHECK(s.row_duals[r] == doctest::Approx(1.0));
}

TEST_CASE("infeasible systems name an unsatisfied row") {
  LinearProgram p;
  const int x = p.add_variable("x", 0.0, 10.0, 0.0);
  const int lo = p.add_row("hi", Sense::GreaterEqual, 7.0);
  p.add_term(lo, x, 1.0);
  const int up = p.add_row("lo", Sense::LessEqual, 3.0);
  p.add_term(up, x, 1.0);
  const LpSolution s = solve_lp(p);
  CHECK(s.status == LpStatus::Infeasible);
  CHECK_FALSE(s.infeasible_rows.empty());
}

TEST_CASE("unbounded problems report the driving variable") {
  LinearProgram p;
  p.add_variable("free_fall", 0.0, kInfinity, -1.0);
  const LpSolution s = solve_lp(p);
  CHECK(s.status == LpStatus::Unbounded);
  CHECK(s.unbounded_ray == "free_fall");
}

TEST_CASE("beale's cycling example terminates at the optimum") {
  // The classic degenerate tableau that cycles under naive Dantzig pricing;
  // Bland's fallback must bring it home at -0.05.
  LinearProgram p;
  const int x1 = p.add_variable("x1", 0.0, kInfinity, -0.75);
  const int x2 = p.add_variable("x2", 0.0, kInfinity, 150.0);
  const int x3 = p.add_variable("x3", 0.0, kInfinity, -0.02);
  const int x4 = p.add_variable("x4", 0.0, kInfinity, 6.0);
  const int r1 = p.add_row("r1", Sense::LessEqual, 0.0);
  p.add_term(r1, x1, 0.25);
  p.add_term(r1, x2, -60.0);
  p.add_term(r1, x3, -0.04);
  p.add_term(r1, x4, 9.0);
  const int r2 = p.add_row("r2", Sense::LessEqual, 0.0);
  p.add_term(r2, x1, 0.5);
  p.add_term(r2, x2, -90.0);
  p.add_term(r2, x3, -0.02);
  p.add_term(r2, x4, 3.0);
  const int r3 = p.add_row("r3", Sense::LessEqual, 1.0);
  p.add_term(r3, x3, 1.0);

  const LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective_value == doctest::Approx(-0.05).epsilon(1e-9));
  CHECK(s.x[x1] == doctest::Approx(0.04).epsilon(1e-9));
  CHECK(s.x[x3] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("row order does not change the optimum") {
  KktOracle fwd;
  LinearProgram rev;
  for (int j = 0; j < fwd.lp.num_variables(); ++j)
    rev.add_variable(fwd.lp.variable_name(j), fwd.lp.lower_bound(j), fwd.lp.upper_bound(j),
                     fwd.lp.cost(j));
  for (int r = fwd.lp.num_rows() - 1; r >= 0; --r) {
    const int row = rev.add_row(fwd.lp.row_name(r), fwd.lp.row_sense(r), fwd.lp.rhs(r));
    for (const auto& [var, coef] : fwd.lp.row_terms(r)) rev.add_term(row, var, coef);
  }
  const LpSolution a = solve_lp(fwd.lp);
  const LpSolution b = solve_lp(rev);
  REQUIRE(a.status == LpStatus::Optimal);
  REQUIRE(b.status == LpStatus::Optimal);
  CHECK(a.objective_value == doctest::Approx(b.objective_value).epsilon(1e-9));
  for (int r = 0; r < fwd.lp.num_rows(); ++r) {
    const int mirrored = rev.row_index(fwd.lp.row_name(r));
    REQUIRE(mirrored >= 0);
    CHECK(a.row_duals[r] == doctest::Approx(b.row_duals[mirrored]).epsilon(1e-9));
  }
}

TEST_CASE("repeated add_term accumulates coefficients") {
  LinearProgram p;
  const int x = p.add_variable("x", 0.0, 10.0, -1.0);
  const int r = p.add_row("cap", Sense::LessEqual, 6.0);
  p.add_term(r, x, 1.0);
  p.add_term(r, x, 2.0);  // net 3x <= 6
  const LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.x[x] == doctest::Approx(2.0));
}

TEST_CASE("random dense problems satisfy the kkt conditions") {
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> cost(-3.0, 3.0);
  std::uniform_real_distribution<double> width(0.5, 6.0);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    CAPTURE(trial);
    const int n = std::uniform_int_distribution<int>(2, 6)(rng);
    const int mrows = std::uniform_int_distribution<int>(1, 5)(rng);
    LinearProgram p;
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
      const double u = width(rng);
      p.add_variable("v" + std::to_string(j), 0.0, u, cost(rng));
      x0[j] = u * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }
    for (int i = 0; i < mrows; ++i) {
      // Anchor the rhs on a random interior point so most rows admit it.
      double act = 0.0;
      std::vector<double> a(n);
      for (int j = 0; j < n; ++j) {
        a[j] = coef(rng);
        act += a[j] * x0[j];
      }
      const int pickr = std::uniform_int_distribution<int>(0, 2)(rng);
      const Sense sense = pickr == 0   ? Sense::LessEqual
                          : pickr == 1 ? Sense::GreaterEqual
                                       : Sense::Equal;
      const double margin = pickr == 2 ? 0.0 : 0.3;
      const int row = p.add_row("r" + std::to_string(i), sense,
                                act + (sense == Sense::GreaterEqual ? -margin : margin));
      for (int j = 0; j < n; ++j) p.add_term(row, j, a[j]);
    }
    const LpSolution s = solve_lp(p);
    if (s.status != LpStatus::Optimal) continue;  // rare random infeasibility
    ++solved;
    check_kkt(p, s, 1e-7);
  }
  CHECK(solved > 150);
}

TEST_CASE("lp text export carries the structure") {
  KktOracle o;
  const std::string text = to_lp_format(o.lp, "oracle");
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("r2") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
}

}  // TEST_SUITE
