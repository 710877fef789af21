#include "gridsced/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gridsced/graph.hpp"

namespace gridsced {

std::string to_string(BusKind kind) {
  switch (kind) {
    case BusKind::Slack: return "slack";
    case BusKind::PV: return "PV";
    case BusKind::PQ: return "PQ";
  }
  return "?";
}

BusKind bus_kind_from_string(const std::string& s) {
  if (s == "slack") return BusKind::Slack;
  if (s == "PV" || s == "pv") return BusKind::PV;
  if (s == "PQ" || s == "pq") return BusKind::PQ;
  throw DataError("unknown bus kind '" + s + "'");
}

double CostCurve::cost_at(double p) const {
  double clamped = std::clamp(p, start_mw, domain_end());
  double cost = start_cost;
  double prev = start_mw;
  for (const auto& seg : segments) {
    double taken = std::clamp(clamped, prev, seg.end_mw) - prev;
    cost += taken * seg.price;
    prev = seg.end_mw;
  }
  return cost;
}

double CostCurve::marginal_at(double p) const {
  if (segments.empty()) return 0.0;
  for (const auto& seg : segments) {
    if (p <= seg.end_mw) return seg.price;
  }
  return segments.back().price;
}

int NetworkModel::bus_offset(int bus_id) const {
  auto it = bus_index_.find(bus_id);
  if (it == bus_index_.end()) throw DataError("unknown bus id " + std::to_string(bus_id));
  return it->second;
}

int NetworkModel::branch_offset(int branch_id) const {
  auto it = branch_index_.find(branch_id);
  if (it == branch_index_.end()) throw DataError("unknown branch id " + std::to_string(branch_id));
  return it->second;
}

int NetworkModel::generator_offset(int gen_id) const {
  auto it = gen_index_.find(gen_id);
  if (it == gen_index_.end()) throw DataError("unknown generator id " + std::to_string(gen_id));
  return it->second;
}

const CostCurve* NetworkModel::cost_curve_for(int gen_id) const {
  auto it = cost_index_.find(gen_id);
  if (it == cost_index_.end()) return nullptr;
  return &cost_curves[it->second];
}

const std::vector<int>& NetworkModel::generators_at_bus(int bus_offset) const {
  return gens_at_bus_.at(static_cast<std::size_t>(bus_offset));
}

double NetworkModel::total_load_mw() const {
  double total = 0.0;
  for (const auto& b : buses) total += b.p_load;
  return total;
}

bool NetworkModel::operator==(const NetworkModel& other) const {
  return base_mva == other.base_mva && buses == other.buses && branches == other.branches &&
         generators == other.generators && cost_curves == other.cost_curves;
}

namespace {

void require(bool cond, const std::string& message) {
  if (!cond) throw DataError(message);
}

void require_finite(double v, const std::string& what) {
  require(std::isfinite(v), what + " is not finite");
}

}  // namespace

void NetworkModel::finalize() {
  require(base_mva > 0, "base_mva must be positive");
  require(!buses.empty(), "model has no buses");

  bus_index_.clear();
  branch_index_.clear();
  gen_index_.clear();
  cost_index_.clear();

  for (std::size_t i = 0; i < buses.size(); ++i) {
    const Bus& b = buses[i];
    require(bus_index_.emplace(b.id, static_cast<int>(i)).second,
            "duplicate bus id " + std::to_string(b.id));
    require_finite(b.p_load, "p_load of bus " + std::to_string(b.id));
    require_finite(b.q_load, "q_load of bus " + std::to_string(b.id));
    require(b.v_min <= b.v_max, "bus " + std::to_string(b.id) + " has v_min > v_max");
    require(b.v_setpoint > 0, "bus " + std::to_string(b.id) + " has non-positive v_setpoint");
  }

  for (std::size_t i = 0; i < branches.size(); ++i) {
    const Branch& br = branches[i];
    require(branch_index_.emplace(br.id, static_cast<int>(i)).second,
            "duplicate branch id " + std::to_string(br.id));
    require(br.x != 0.0, "branch " + std::to_string(br.id) + " has zero reactance");
    require(br.from_bus != br.to_bus,
            "branch " + std::to_string(br.id) + " connects a bus to itself");
    require(bus_index_.count(br.from_bus) != 0,
            "branch " + std::to_string(br.id) + " references unknown bus " +
                std::to_string(br.from_bus));
    require(bus_index_.count(br.to_bus) != 0,
            "branch " + std::to_string(br.id) + " references unknown bus " +
                std::to_string(br.to_bus));
    require(br.tap_ratio > 0, "branch " + std::to_string(br.id) + " has non-positive tap ratio");
    require(br.rate_normal >= 0 && br.rate_emergency >= 0,
            "branch " + std::to_string(br.id) + " has a negative rating");
    if (br.rate_normal > 0 && br.rate_emergency > 0) {
      require(br.rate_emergency >= br.rate_normal,
              "branch " + std::to_string(br.id) + " has emergency rating below normal rating");
    }
  }

  gens_at_bus_.assign(buses.size(), {});
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const Generator& g = generators[i];
    require(gen_index_.emplace(g.id, static_cast<int>(i)).second,
            "duplicate generator id " + std::to_string(g.id));
    auto bus_it = bus_index_.find(g.bus);
    require(bus_it != bus_index_.end(), "generator " + std::to_string(g.id) +
                                            " references unknown bus " + std::to_string(g.bus));
    require(g.p_min <= g.p_max, "generator " + std::to_string(g.id) + " has p_min > p_max");
    require(g.ramp_rate >= 0, "generator " + std::to_string(g.id) + " has negative ramp rate");
    if (g.online) {
      require(g.p_min <= g.p_initial && g.p_initial <= g.p_max,
              "generator " + std::to_string(g.id) + " initial dispatch " +
                  std::to_string(g.p_initial) + " outside [p_min, p_max]");
      gens_at_bus_[bus_it->second].push_back(static_cast<int>(i));
    }
  }

  for (std::size_t i = 0; i < cost_curves.size(); ++i) {
    const CostCurve& c = cost_curves[i];
    require(gen_index_.count(c.owner) != 0,
            "cost curve references unknown generator " + std::to_string(c.owner));
    require(cost_index_.emplace(c.owner, static_cast<int>(i)).second,
            "generator " + std::to_string(c.owner) + " has more than one cost curve");
    double prev = c.start_mw;
    double prev_price = -kInfinity;
    for (const auto& seg : c.segments) {
      require(seg.end_mw > prev, "cost curve of generator " + std::to_string(c.owner) +
                                     " has non-increasing breakpoints");
      require(seg.price >= prev_price, "cost curve of generator " + std::to_string(c.owner) +
                                           " is non-convex (marginal price decreases)");
      prev = seg.end_mw;
      prev_price = seg.price;
    }
  }

  // Every island of the full in-service topology needs exactly one slack bus.
  auto membership = island_membership(*this, {});
  int num_islands = membership.empty() ? 0 : *std::max_element(membership.begin(), membership.end()) + 1;
  std::vector<int> slack_count(static_cast<std::size_t>(num_islands), 0);
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].kind == BusKind::Slack) slack_count[static_cast<std::size_t>(membership[i])]++;
  }
  for (int island = 0; island < num_islands; ++island) {
    require(slack_count[static_cast<std::size_t>(island)] == 1,
            "island " + std::to_string(island) + " has " +
                std::to_string(slack_count[static_cast<std::size_t>(island)]) +
                " slack buses (expected exactly 1)");
  }
}

NetworkModel make_network_model(NetworkModel model) {
  model.finalize();
  return model;
}

}  // namespace gridsced
