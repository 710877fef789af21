#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "doctest.h"
#include "gridsced/model.hpp"
#include "gridsced/sensitivity.hpp"
#include "test_util.hpp"

using namespace gridsced;
using testutil::load_fixture;

namespace {

// Net MW injection per bus offset from initial dispatch minus load; the
// conventional DC operating point.
Eigen::VectorXd initial_injections(const NetworkModel& m) {
  Eigen::VectorXd inj = Eigen::VectorXd::Zero((Eigen::Index)m.num_buses());
  for (const Generator& g : m.generators)
    if (g.online) inj[m.bus_offset(g.bus)] += g.p_initial;
  for (std::size_t i = 0; i < m.num_buses(); ++i) inj[(Eigen::Index)i] -= m.buses[i].p_load;
  return inj;
}

// Balances the injection vector onto the slack bus so the DC system is
// consistent regardless of initial-dispatch imbalance.
Eigen::VectorXd balanced_injections(const NetworkModel& m, int slack_id) {
  Eigen::VectorXd inj = initial_injections(m);
  inj[m.bus_offset(slack_id)] -= inj.sum();
  return inj;
}

int model_slack_id(const NetworkModel& m) {
  for (const Bus& b : m.buses)
    if (b.kind == BusKind::Slack) return b.id;
  return -1;
}

}  // namespace

TEST_SUITE("sensitivity") {

TEST_CASE("equal-reactance ring has the textbook one-third split") {
  // Three identical branches 1-2, 2-3, 1-3 with slack at bus 1: a MW
  // injected at bus 2 leaves over the short path (2/3) and the long path
  // (1/3); at bus 3 symmetrically.
  const NetworkModel m = load_fixture("ring3.json");
  const PtdfMatrix ptdf = build_ptdf(m);

  CHECK(ptdf.slack == 1);
  const int b2 = m.bus_offset(2), b3 = m.bus_offset(3);
  CHECK(ptdf.entries(0, b2) == doctest::Approx(-2.0 / 3.0).epsilon(1e-9));
  CHECK(ptdf.entries(1, b2) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(ptdf.entries(2, b2) == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
  CHECK(ptdf.entries(0, b3) == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
  CHECK(ptdf.entries(1, b3) == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
  CHECK(ptdf.entries(2, b3) == doctest::Approx(-2.0 / 3.0).epsilon(1e-9));

  // The slack column is identically zero.
  const int s = m.bus_offset(1);
  for (int e = 0; e < 3; ++e) CHECK(ptdf.entries(e, s) == 0.0);
}

TEST_CASE("transfer factors are slack-invariant") {
  // A from->to transfer is physical; the slack choice is bookkeeping.
  for (const std::string& name : testutil::small_fixtures()) {
    CAPTURE(name);
    const NetworkModel m = load_fixture(name);
    if (m.num_buses() < 3) continue;
    const PtdfMatrix a = build_ptdf(m, m.buses[0].id);
    const PtdfMatrix b = build_ptdf(m, m.buses.back().id);
    for (std::size_t e = 0; e < m.num_branches(); ++e)
      for (std::size_t i = 1; i < m.num_buses(); ++i)
        CHECK(a.transfer((int)e, (int)i, 0) ==
              doctest::Approx(b.transfer((int)e, (int)i, 0)).epsilon(1e-8));
  }
}

TEST_CASE("dc flows reproduce a direct B-theta solve") {
  for (const std::string& name : testutil::small_fixtures()) {
    CAPTURE(name);
    const NetworkModel m = load_fixture(name);
    const int slack = model_slack_id(m);
    const PtdfMatrix ptdf = build_ptdf(m);
    const Eigen::VectorXd inj = balanced_injections(m, slack);
    const Eigen::VectorXd flows = dc_flows(ptdf, m, inj);

    // Independent check: assemble B, solve for angles, read branch flows.
    const int n = (int)m.num_buses();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    for (const Branch& br : m.branches) {
      if (!br.in_service) continue;
      const int i = m.bus_offset(br.from_bus), j = m.bus_offset(br.to_bus);
      const double b = dc_susceptance(br);
      B(i, i) += b;
      B(j, j) += b;
      B(i, j) -= b;
      B(j, i) -= b;
    }
    const int s = m.bus_offset(slack);
    Eigen::MatrixXd Br = B;
    Br.row(s).setZero();
    Br.col(s).setZero();
    Br(s, s) = 1.0;
    Eigen::VectorXd rhs = inj / m.base_mva;
    rhs[s] = 0.0;
    const Eigen::VectorXd theta = Br.fullPivLu().solve(rhs);
    for (std::size_t e = 0; e < m.num_branches(); ++e) {
      const Branch& br = m.branches[e];
      if (!br.in_service) continue;
      const double f = dc_susceptance(br) *
                       (theta[m.bus_offset(br.from_bus)] - theta[m.bus_offset(br.to_bus)] -
                        deg_to_rad(br.phase_shift)) *
                       m.base_mva;
      CHECK(flows[(Eigen::Index)e] == doctest::Approx(f).epsilon(1e-9));
    }
  }
}

TEST_CASE("lodf matches outage re-solves to 1e-8 pu on every small network") {
  // For each non-islanding outage, the post-outage flow predicted by LODF
  // must equal the flow of a from-scratch DC solve on the reduced network.
  for (const std::string& name : testutil::small_fixtures()) {
    CAPTURE(name);
    const NetworkModel m = load_fixture(name);
    const int slack = model_slack_id(m);
    const PtdfMatrix ptdf = build_ptdf(m);
    const LodfMatrix lodf = build_lodf(ptdf, m);
    const Eigen::VectorXd inj = balanced_injections(m, slack);
    const Eigen::VectorXd base = dc_flows(ptdf, m, inj);

    for (std::size_t c = 0; c < m.num_branches(); ++c) {
      if (!m.branches[c].in_service) continue;
      if (lodf.islanding[c]) continue;
      CAPTURE(m.branches[c].id);
      const PtdfMatrix reduced = build_ptdf(m, slack, {m.branches[c].id});
      const Eigen::VectorXd after = dc_flows(reduced, m, inj);
      for (std::size_t k = 0; k < m.num_branches(); ++k) {
        if (k == c || !m.branches[k].in_service) continue;
        const double predicted = base[(Eigen::Index)k] +
                                 lodf.entries((Eigen::Index)k, (Eigen::Index)c) *
                                     base[(Eigen::Index)c];
        CHECK(std::abs(predicted - after[(Eigen::Index)k]) / m.base_mva < 1e-8);
      }
      // The outaged branch itself carries nothing afterwards.
      CHECK(std::abs(after[(Eigen::Index)c]) / m.base_mva < 1e-8);
    }
  }
}

TEST_CASE("lodf diagonal is -1 and islanding columns are flagged") {
  const NetworkModel m = load_fixture("ring_spur.json");
  const PtdfMatrix ptdf = build_ptdf(m);
  const LodfMatrix lodf = build_lodf(ptdf, m);
  for (std::size_t e = 0; e < m.num_branches(); ++e) {
    if (lodf.islanding[e]) continue;
    CHECK(lodf.entries((Eigen::Index)e, (Eigen::Index)e) == doctest::Approx(-1.0).epsilon(1e-9));
  }
  // The spur branch is the only bridge of this topology.
  int flagged = 0, spur = -1;
  for (std::size_t e = 0; e < m.num_branches(); ++e)
    if (lodf.islanding[e]) {
      ++flagged;
      spur = (int)e;
    }
  CHECK(flagged == 1);
  CHECK(m.branches[spur].to_bus == 4);
  CHECK(lodf.entries.col(spur).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("twin pair with no third path transfers its outage one-to-one") {
  NetworkModel m;
  m.buses = {{.id = 1, .kind = BusKind::Slack, .base_kv = 230.0},
             {.id = 2, .kind = BusKind::PQ, .p_load = 60.0, .base_kv = 230.0}};
  m.branches = {{.id = 1, .from_bus = 1, .to_bus = 2, .x = 0.1},
                {.id = 2, .from_bus = 1, .to_bus = 2, .x = 0.1}};
  m.generators = {{.id = 1, .bus = 1, .p_max = 100.0, .q_min = -50.0, .q_max = 50.0}};
  m.cost_curves = {{.owner = 1, .segments = {{100.0, 10.0}}}};
  m = make_network_model(std::move(m));

  const LodfMatrix lodf = build_lodf(build_ptdf(m), m);
  CHECK(lodf.entries(1, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(lodf.entries(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("parallel_pair twins shed symmetrically into the ring") {
  // The corridor has ring alternatives, so a twin outage lands only partly
  // on its sibling; the split must still be symmetric and sub-unity.
  const NetworkModel m = load_fixture("parallel_pair.m");
  const LodfMatrix lodf = build_lodf(build_ptdf(m), m);
  const int t1 = m.branch_offset(2), t2 = m.branch_offset(3);
  CHECK(lodf.entries(t2, t1) == doctest::Approx(lodf.entries(t1, t2)).epsilon(1e-9));
  CHECK(lodf.entries(t2, t1) > 0.5);
  CHECK(lodf.entries(t2, t1) < 1.0);
}

TEST_CASE("ptdf composition reproduces a double-outage network") {
  // Removing branch c from the PTDF model must equal building the PTDF on
  // the reduced topology directly.
  const NetworkModel m = load_fixture("parallel_pair.m");
  const int slack = model_slack_id(m);
  const std::set<int> out = {5};
  const PtdfMatrix direct = build_ptdf(m, slack, out);
  CHECK(direct.out_of_service == out);

  const Eigen::VectorXd inj = balanced_injections(m, slack);
  const PtdfMatrix full = build_ptdf(m, slack);
  const LodfMatrix lodf = build_lodf(full, m);
  const Eigen::VectorXd base = dc_flows(full, m, inj);
  const Eigen::VectorXd reduced = dc_flows(direct, m, inj);
  const int c = m.branch_offset(5);
  for (std::size_t k = 0; k < m.num_branches(); ++k) {
    if ((int)k == c) continue;
    const double predicted =
        base[(Eigen::Index)k] + lodf.entries((Eigen::Index)k, c) * base[c];
    CHECK(predicted == doctest::Approx(reduced[(Eigen::Index)k]).epsilon(1e-9));
  }
}

TEST_CASE("disconnected topology is rejected") {
  const NetworkModel m = load_fixture("path3.json");
  CHECK_THROWS_AS(build_ptdf(m, -1, {1}), Error);
}

}  // TEST_SUITE
