#include <algorithm>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "gridsced/graph.hpp"
#include "test_util.hpp"

using namespace gridsced;

namespace {

int count_components(int n, const std::vector<std::pair<int, int>>& edges) {
  const std::vector<int> comp = connected_components(n, edges);
  return comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
}

// Quadratic reference: an edge is a bridge iff removing it increases the
// component count.
std::vector<int> brute_force_bridges(int n, const std::vector<std::pair<int, int>>& edges) {
  const int before = count_components(n, edges);
  std::vector<int> bridges;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    std::vector<std::pair<int, int>> rest = edges;
    rest.erase(rest.begin() + (std::ptrdiff_t)e);
    if (count_components(n, rest) > before) bridges.push_back((int)e);
  }
  return bridges;
}

std::vector<std::pair<int, int>> in_service_edges(const NetworkModel& m) {
  std::vector<std::pair<int, int>> edges;
  for (const Branch& br : m.branches)
    if (br.in_service) edges.emplace_back(m.bus_offset(br.from_bus), m.bus_offset(br.to_bus));
  return edges;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("components are labeled by first appearance") {
  // Two components: {0,1,2} and {3,4}; node 5 isolated.
  const std::vector<std::pair<int, int>> edges = {{0, 1}, {1, 2}, {3, 4}};
  const std::vector<int> comp = connected_components(6, edges);
  CHECK(comp == std::vector<int>{0, 0, 0, 1, 1, 2});
}

TEST_CASE("bridge finder agrees with brute force on the fixtures") {
  for (const std::string& name : testutil::small_fixtures()) {
    CAPTURE(name);
    const NetworkModel m = testutil::load_fixture(name);
    const auto edges = in_service_edges(m);
    std::vector<int> fast = find_bridges((int)m.num_buses(), edges);
    std::vector<int> slow = brute_force_bridges((int)m.num_buses(), edges);
    std::sort(fast.begin(), fast.end());
    CHECK(fast == slow);
  }
}

TEST_CASE("bridge finder agrees with brute force on random multigraphs") {
  std::mt19937 rng(20260823);
  for (int trial = 0; trial < 60; ++trial) {
    CAPTURE(trial);
    const int n = std::uniform_int_distribution<int>(2, 14)(rng);
    const int ne = std::uniform_int_distribution<int>(1, 2 * n)(rng);
    std::vector<std::pair<int, int>> edges;
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int e = 0; e < ne; ++e) {
      int a = pick(rng), b = pick(rng);
      if (a == b) b = (b + 1) % n;  // no self-loops in a power network
      edges.emplace_back(a, b);
    }
    std::vector<int> fast = find_bridges(n, edges);
    std::sort(fast.begin(), fast.end());
    CHECK(fast == brute_force_bridges(n, edges));
  }
}

TEST_CASE("parallel edges are never bridges") {
  const std::vector<std::pair<int, int>> edges = {{0, 1}, {0, 1}, {1, 2}};
  const std::vector<int> bridges = find_bridges(3, edges);
  CHECK(bridges == std::vector<int>{2});
}

TEST_CASE("radial branches of the fixtures") {
  const NetworkModel spur = testutil::load_fixture("ring_spur.json");
  CHECK(find_radial_branches(spur) == std::set<int>{4});

  const NetworkModel path = testutil::load_fixture("path3.json");
  CHECK(find_radial_branches(path) == std::set<int>{1, 2});

  const NetworkModel ring = testutil::load_fixture("ring4.json");
  CHECK(find_radial_branches(ring).empty());
  // With one ring segment already out, every survivor is radial.
  CHECK(find_radial_branches(ring, {2}) == std::set<int>{1, 3, 4});
}

TEST_CASE("keeps_connectivity matches the bridge set") {
  for (const std::string& name : testutil::small_fixtures()) {
    CAPTURE(name);
    const NetworkModel m = testutil::load_fixture(name);
    const std::set<int> radial = find_radial_branches(m);
    for (const Branch& br : m.branches) {
      CAPTURE(br.id);
      CHECK(keeps_connectivity(m, {}, br.id) == !radial.count(br.id));
    }
  }
}

TEST_CASE("island membership tracks removed branches") {
  const NetworkModel m = testutil::load_fixture("ring_spur.json");
  const std::vector<int> joined = island_membership(m, {});
  CHECK(*std::max_element(joined.begin(), joined.end()) == 0);

  const std::vector<int> split = island_membership(m, {4});
  CHECK(split[m.bus_offset(4)] != split[m.bus_offset(1)]);
  CHECK(split[m.bus_offset(2)] == split[m.bus_offset(1)]);
}

}  // TEST_SUITE
