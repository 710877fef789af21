#include <cmath>
#include <set>

#include "doctest.h"
#include "gridsced/model.hpp"
#include "gridsced/power_flow.hpp"
#include "test_util.hpp"

using namespace gridsced;
using testutil::load_fixture;

namespace {

// Verifies the P/Q balance of a solved state from scratch: at every bus the
// branch-flow sums must equal generation minus load. This re-derives the
// mismatch from the reported branch flows rather than trusting the solver's
// own residual.
void check_bus_balance(const NetworkModel& m, const PowerFlowSolution& s, double tol_mw) {
  std::vector<double> p(m.num_buses(), 0.0), q(m.num_buses(), 0.0);
  for (std::size_t b = 0; b < m.num_branches(); ++b) {
    const Branch& br = m.branches[b];
    if (!br.in_service || s.out_of_service.count(br.id)) continue;
    p[m.bus_offset(br.from_bus)] += s.p_from[b];
    q[m.bus_offset(br.from_bus)] += s.q_from[b];
    p[m.bus_offset(br.to_bus)] += s.p_to[b];
    q[m.bus_offset(br.to_bus)] += s.q_to[b];
  }
  std::vector<double> pg(m.num_buses(), 0.0);
  for (std::size_t g = 0; g < m.num_generators(); ++g)
    pg[m.bus_offset(m.generators[g].bus)] += s.p_gen[g];
  for (std::size_t i = 0; i < m.num_buses(); ++i) {
    const Bus& bus = m.buses[i];
    CAPTURE(bus.id);
    const double v2 = s.v_mag[i] * s.v_mag[i];
    const double shunt_p = bus.shunt_g * v2, shunt_q = -bus.shunt_b * v2;
    CHECK(std::abs(p[i] + bus.p_load + shunt_p - pg[i]) < tol_mw);
    // Reactive balance is only fully modeled at PQ buses without a unit.
    if (bus.kind == BusKind::PQ && m.generators_at_bus((int)i).empty()) {
      CHECK(std::abs(q[i] + bus.q_load + shunt_q) < tol_mw);
    }
  }
}

NetworkModel q_limit_model(double q_max) {
  // Slack -- PV -- PQ chain; the PV unit's ceiling decides whether it can
  // hold its setpoint.
  NetworkModel m;
  m.buses = {{.id = 1, .kind = BusKind::Slack, .v_setpoint = 1.0, .base_kv = 230.0},
             {.id = 2, .kind = BusKind::PV, .v_setpoint = 1.02, .base_kv = 230.0},
             {.id = 3, .kind = BusKind::PQ, .p_load = 80.0, .q_load = 40.0, .base_kv = 230.0}};
  m.branches = {{.id = 1, .from_bus = 1, .to_bus = 2, .r = 0.01, .x = 0.08},
                {.id = 2, .from_bus = 2, .to_bus = 3, .r = 0.01, .x = 0.08}};
  m.generators = {{.id = 1, .bus = 1, .p_max = 200.0, .q_min = -150.0, .q_max = 150.0},
                  {.id = 2, .bus = 2, .p_max = 100.0, .q_min = -q_max, .q_max = q_max,
                   .p_initial = 40.0}};
  m.cost_curves = {{.owner = 1, .segments = {{200.0, 10.0}}},
                   {.owner = 2, .segments = {{100.0, 20.0}}}};
  return make_network_model(std::move(m));
}

}  // namespace

TEST_SUITE("power_flow") {

TEST_CASE("two-bus case matches the closed-form solution") {
  // Frozen from an independent 40-digit solve of the 2x2 complex power
  // balance: V2 = 0.96468311 pu at -5.8361643 degrees.
  const NetworkModel m = load_fixture("two_bus.m");
  const PowerFlowSolution s = solve_ac(m);

  REQUIRE(s.converged);
  CHECK(s.max_mismatch_pu < 1e-6);
  CHECK(s.v_mag[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.v_ang[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.v_mag[1] == doctest::Approx(0.964683113490806).epsilon(1e-7));
  CHECK(rad_to_deg(s.v_ang[1]) == doctest::Approx(-5.83616429619092).epsilon(1e-6));

  CHECK(s.p_from[0] == doctest::Approx(101.113635402435).epsilon(1e-6));
  CHECK(s.q_from[0] == doctest::Approx(29.2057405148954).epsilon(1e-6));
  CHECK(s.p_to[0] == doctest::Approx(-100.0).epsilon(1e-6));
  CHECK(s.q_to[0] == doctest::Approx(-20.0).epsilon(1e-5));
  CHECK(s.s_flow[0] == doctest::Approx(105.247054796417).epsilon(1e-6));
  CHECK(s.monitored_end[0] == 0);  // sending end carries the larger MVA

  CHECK(s.slack_p_mw == doctest::Approx(101.113635402435).epsilon(1e-6));
  CHECK(s.slack_q_mvar == doctest::Approx(29.2057405148954).epsilon(1e-6));
  CHECK(s.p_gen[0] == doctest::Approx(101.113635402435).epsilon(1e-6));
}

TEST_CASE("every fixture converges from flat start within the iteration cap") {
  for (const std::string& name : testutil::small_fixtures()) {
    CAPTURE(name);
    const NetworkModel m = load_fixture(name);
    const PowerFlowSolution s = solve_ac(m);
    REQUIRE(s.converged);
    CHECK(s.iterations <= 30);
    CHECK(s.max_mismatch_pu < 1e-6);
    check_bus_balance(m, s, 1e-3);
  }
}

TEST_CASE("branch flow arrays are self-consistent") {
  const NetworkModel m = load_fixture("parallel_pair.m");
  const PowerFlowSolution s = solve_ac(m);
  REQUIRE(s.converged);
  for (std::size_t b = 0; b < m.num_branches(); ++b) {
    const double s_from = std::hypot(s.p_from[b], s.q_from[b]);
    const double s_to = std::hypot(s.p_to[b], s.q_to[b]);
    CHECK(s.s_flow[b] == doctest::Approx(std::max(s_from, s_to)).epsilon(1e-12));
    CHECK(s.monitored_end[b] == (s_from >= s_to ? 0 : 1));
    // Series loss must be dissipative.
    CHECK(s.p_from[b] + s.p_to[b] >= -1e-9);
  }
}

TEST_CASE("q-limit enforcement demotes an exhausted PV bus") {
  // With a generous ceiling the PV bus holds its setpoint.
  const NetworkModel wide = q_limit_model(200.0);
  const PowerFlowSolution held = solve_ac(wide);
  REQUIRE(held.converged);
  CHECK(held.v_mag[1] == doctest::Approx(1.02).epsilon(1e-9));

  // With a tight ceiling it cannot: the bus rides at a lower magnitude.
  const NetworkModel tight = q_limit_model(5.0);
  const PowerFlowSolution clipped = solve_ac(tight);
  REQUIRE(clipped.converged);
  CHECK(clipped.v_mag[1] < 1.02 - 1e-4);
  check_bus_balance(tight, clipped, 1e-3);

  // Disabling enforcement restores the setpoint regardless of the limit.
  PowerFlowOptions no_limits;
  no_limits.enforce_q_limits = false;
  const PowerFlowSolution free = solve_ac(tight, {}, nullptr, no_limits);
  REQUIRE(free.converged);
  CHECK(free.v_mag[1] == doctest::Approx(1.02).epsilon(1e-9));
}

TEST_CASE("out-of-service branches carry no flow and reroute power") {
  const NetworkModel m = load_fixture("ring4.json");
  const PowerFlowSolution s = solve_ac(m, {1});
  REQUIRE(s.converged);
  CHECK(s.p_from[0] == 0.0);
  CHECK(s.q_from[0] == 0.0);
  CHECK(s.s_flow[0] == 0.0);
  CHECK(s.out_of_service == std::set<int>{1});
  // All load now arrives over the surviving path.
  check_bus_balance(m, s, 1e-3);
}

TEST_CASE("warm start reproduces the flat-start state") {
  const NetworkModel m = load_fixture("parallel_pair.m");
  const PowerFlowSolution base = solve_ac(m);
  const PowerFlowSolution warm = solve_ac(m, {5}, &base);
  const PowerFlowSolution cold = solve_ac(m, {5});
  REQUIRE(warm.converged);
  REQUIRE(cold.converged);
  for (std::size_t i = 0; i < m.num_buses(); ++i) {
    CHECK(warm.v_mag[i] == doctest::Approx(cold.v_mag[i]).epsilon(1e-6));
    CHECK(warm.v_ang[i] == doctest::Approx(cold.v_ang[i]).epsilon(1e-6));
  }
  for (std::size_t b = 0; b < m.num_branches(); ++b)
    CHECK(std::abs(warm.s_flow[b] - cold.s_flow[b]) < 1e-3);
}

TEST_CASE("islanded live buses are rejected with a clear error") {
  const NetworkModel m = load_fixture("path3.json");
  // Branch 1 bridges bus 1 to the rest; cutting it strands live load.
  CHECK_THROWS_AS(solve_ac(m, {1}), Error);
}

TEST_CASE("nonconvergence raises NumericError") {
  // parallel_pair with the main feed out is beyond the solvable region.
  const NetworkModel m = load_fixture("parallel_pair.m");
  const PowerFlowSolution base = solve_ac(m);
  CHECK_THROWS_AS(solve_ac(m, {1}, &base), NumericError);
  CHECK_THROWS_AS(solve_ac(m, {1}), NumericError);
}

TEST_CASE("violation checks compare the monitored end against each rating") {
  NetworkModel m = load_fixture("two_bus.m");
  const PowerFlowSolution s = solve_ac(m);
  REQUIRE(s.converged);
  // 105.25 MVA against normal 150 / emergency 170: no violation either way.
  CHECK(check_violations(s, m, RatingKind::Normal).empty());
  CHECK(check_violations(s, m, RatingKind::Emergency).empty());

  // Squeeze the normal rating below the flow and the violation appears with
  // consistent arithmetic.
  m.branches[0].rate_normal = 100.0;
  m = make_network_model(std::move(m));
  const auto v = check_violations(solve_ac(m), m, RatingKind::Normal);
  REQUIRE(v.size() == 1);
  CHECK(v[0].branch_id == 1);
  CHECK(v[0].rating_mva == 100.0);
  CHECK(v[0].flow_mva == doctest::Approx(105.247054796417).epsilon(1e-6));
  CHECK(v[0].overload_mva == doctest::Approx(v[0].flow_mva - 100.0));
  CHECK(v[0].overload_pct == doctest::Approx(100.0 * v[0].overload_mva / 100.0));

  // A branch exactly at its rating is not in violation.
  m.branches[0].rate_normal = v[0].flow_mva;
  m = make_network_model(std::move(m));
  CHECK(check_violations(solve_ac(m), m, RatingKind::Normal).empty());
}

TEST_CASE("zero-load network solves flat") {
  NetworkModel m = load_fixture("zero_load.json");
  for (Bus& b : m.buses) {
    b.p_load = 0.0;
    b.q_load = 0.0;
    b.v_setpoint = 1.0;
  }
  for (Generator& g : m.generators) g.p_initial = 0.0;
  m = make_network_model(std::move(m));
  const PowerFlowSolution s = solve_ac(m);
  REQUIRE(s.converged);
  CHECK(std::abs(s.slack_p_mw) < 1e-3);
  for (std::size_t b = 0; b < m.num_branches(); ++b) CHECK(std::abs(s.p_from[b]) < 1e-3);
}

}  // TEST_SUITE
