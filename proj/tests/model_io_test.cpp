#include <stdexcept>

#include "doctest.h"
#include "gridsced/case_io.hpp"
#include "gridsced/matpower.hpp"
#include "gridsced/model.hpp"
#include "test_util.hpp"

using namespace gridsced;
using testutil::load_fixture;

namespace {

NetworkModel tiny_model() {
  NetworkModel m;
  m.buses = {{.id = 1, .kind = BusKind::Slack, .base_kv = 230.0},
             {.id = 2, .kind = BusKind::PQ, .p_load = 50.0, .q_load = 10.0, .base_kv = 230.0}};
  m.branches = {{.id = 1, .from_bus = 1, .to_bus = 2, .r = 0.01, .x = 0.1,
                 .rate_normal = 100.0, .rate_emergency = 110.0}};
  m.generators = {{.id = 1, .bus = 1, .p_max = 100.0, .q_min = -50.0, .q_max = 50.0}};
  m.cost_curves = {{.owner = 1, .segments = {{100.0, 20.0}}}};
  return make_network_model(std::move(m));
}

}  // namespace

TEST_SUITE("model_io") {

TEST_CASE("id lookups resolve to the defining records") {
  const NetworkModel m = tiny_model();
  CHECK(m.bus(2).p_load == 50.0);
  CHECK(m.branch(1).x == 0.1);
  CHECK(m.generator(1).p_max == 100.0);
  CHECK(m.bus_offset(1) == 0);
  CHECK(m.bus_offset(2) == 1);
  CHECK(m.total_load_mw() == 50.0);
  CHECK(m.cost_curve_for(1) != nullptr);
  CHECK(m.cost_curve_for(99) == nullptr);
}

TEST_CASE("validation rejects broken references and shapes") {
  SUBCASE("branch to unknown bus") {
    NetworkModel m = tiny_model();
    m.branches[0].to_bus = 7;
    CHECK_THROWS_AS(make_network_model(std::move(m)), DataError);
  }
  SUBCASE("duplicate bus id") {
    NetworkModel m = tiny_model();
    m.buses.push_back(m.buses[0]);
    CHECK_THROWS_AS(make_network_model(std::move(m)), DataError);
  }
  SUBCASE("no slack bus") {
    NetworkModel m = tiny_model();
    m.buses[0].kind = BusKind::PV;
    CHECK_THROWS_AS(make_network_model(std::move(m)), DataError);
  }
  SUBCASE("zero reactance") {
    NetworkModel m = tiny_model();
    m.branches[0].x = 0.0;
    CHECK_THROWS_AS(make_network_model(std::move(m)), DataError);
  }
  SUBCASE("non-convex cost curve") {
    NetworkModel m = tiny_model();
    m.cost_curves[0].segments = {{50.0, 30.0}, {100.0, 20.0}};  // price drops
    CHECK_THROWS_AS(make_network_model(std::move(m)), DataError);
  }
  SUBCASE("non-increasing breakpoints") {
    NetworkModel m = tiny_model();
    m.cost_curves[0].segments = {{80.0, 10.0}, {80.0, 20.0}};
    CHECK_THROWS_AS(make_network_model(std::move(m)), DataError);
  }
}

TEST_CASE("cost curves evaluate piecewise and clamp at the domain ends") {
  CostCurve c;
  c.owner = 1;
  c.start_mw = 10.0;
  c.start_cost = 100.0;
  c.segments = {{50.0, 20.0}, {80.0, 35.0}};

  CHECK(c.domain_end() == 80.0);
  CHECK(c.cost_at(10.0) == doctest::Approx(100.0));
  CHECK(c.cost_at(50.0) == doctest::Approx(100.0 + 40.0 * 20.0));
  CHECK(c.cost_at(65.0) == doctest::Approx(100.0 + 40.0 * 20.0 + 15.0 * 35.0));
  CHECK(c.cost_at(80.0) == doctest::Approx(100.0 + 40.0 * 20.0 + 30.0 * 35.0));
  // Clamped outside the domain.
  CHECK(c.cost_at(0.0) == doctest::Approx(100.0));
  CHECK(c.cost_at(500.0) == doctest::Approx(c.cost_at(80.0)));

  CHECK(c.marginal_at(30.0) == doctest::Approx(20.0));
  CHECK(c.marginal_at(60.0) == doctest::Approx(35.0));
}

TEST_CASE("json round-trip preserves the model exactly") {
  for (const std::string& name : testutil::small_fixtures()) {
    CAPTURE(name);
    const NetworkModel m = load_fixture(name);
    const NetworkModel back = parse_case_json(write_case_json(m));
    CHECK(back == m);
  }
}

TEST_CASE("matpower parser reads the two-bus case faithfully") {
  const NetworkModel m = load_fixture("two_bus.m");
  REQUIRE(m.num_buses() == 2);
  REQUIRE(m.num_branches() == 1);
  REQUIRE(m.num_generators() == 1);
  CHECK(m.base_mva == 100.0);
  CHECK(m.bus(1).kind == BusKind::Slack);
  CHECK(m.bus(2).kind == BusKind::PQ);
  CHECK(m.bus(2).p_load == 100.0);
  CHECK(m.bus(2).q_load == 20.0);
  CHECK(m.branch(1).r == 0.01);
  CHECK(m.branch(1).x == 0.10);
  CHECK(m.branch(1).b_charging == 0.02);
  CHECK(m.branch(1).rate_normal == 150.0);
  CHECK(m.branch(1).rate_emergency == 170.0);
  CHECK(m.generator(1).p_max == 220.0);
  CHECK(m.generator(1).q_max == 120.0);
  CHECK(m.generator(1).q_min == -120.0);

  // Piecewise gencost (0,0) (120,1800) (220,3800) -> 15 then 20 $/MWh.
  const CostCurve* c = m.cost_curve_for(1);
  REQUIRE(c != nullptr);
  REQUIRE(c->segments.size() == 2);
  CHECK(c->segments[0].end_mw == 120.0);
  CHECK(c->segments[0].price == doctest::Approx(15.0));
  CHECK(c->segments[1].end_mw == 220.0);
  CHECK(c->segments[1].price == doctest::Approx(20.0));
}

TEST_CASE("matpower cases survive a json round-trip") {
  for (const std::string name : {"two_bus.m", "parallel_pair.m", "synth300.m"}) {
    CAPTURE(name);
    const NetworkModel m = load_fixture(name);
    CHECK(parse_case_json(write_case_json(m)) == m);
  }
}

TEST_CASE("matpower writer round-trips through the parser") {
  for (const std::string name : {"two_bus.m", "ring4.json", "parallel_pair.m"}) {
    CAPTURE(name);
    const NetworkModel m = load_fixture(name);
    CHECK(parse_matpower_case(write_matpower_case(m)) == m);
  }
}

TEST_CASE("matpower bus types map onto bus kinds") {
  const NetworkModel m = load_fixture("parallel_pair.m");
  CHECK(m.bus(1).kind == BusKind::Slack);
  CHECK(m.bus(4).kind == BusKind::PV);
  CHECK(m.bus(2).kind == BusKind::PQ);
}

TEST_CASE("unknown top-level json keys are ignored") {
  const NetworkModel m = load_fixture("ring3.json");  // carries a "comment"
  CHECK(m.num_buses() == 3);
}

TEST_CASE("malformed input raises DataError, not a crash") {
  CHECK_THROWS_AS(parse_case_json("{"), DataError);
  CHECK_THROWS_AS(parse_case_json("[]"), DataError);
  CHECK_THROWS_AS(parse_case_json(R"({"base_mva": 100})"), DataError);
  CHECK_THROWS_AS(parse_matpower_case("function mpc = x\nmpc.bus = ["), DataError);
  CHECK_THROWS_AS(load_case("/nonexistent/case.json"), Error);
  CHECK_THROWS_AS(load_case(testutil::data_path("two_bus.m") + ".bogus"), Error);
}

}  // TEST_SUITE
