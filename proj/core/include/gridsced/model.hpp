#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "gridsced/common.hpp"

namespace gridsced {

enum class BusKind { Slack, PV, PQ };

std::string to_string(BusKind kind);
BusKind bus_kind_from_string(const std::string& s);

struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double p_load = 0.0;      ///< MW
  double q_load = 0.0;      ///< MVar
  double shunt_g = 0.0;     ///< MW consumed at V = 1 pu
  double shunt_b = 0.0;     ///< MVar injected at V = 1 pu
  double v_setpoint = 1.0;  ///< pu, regulated magnitude for PV/slack buses
  double v_min = 0.9;       ///< pu
  double v_max = 1.1;       ///< pu
  double base_kv = 0.0;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;              ///< pu series resistance
  double x = 0.0;              ///< pu series reactance, never zero
  double b_charging = 0.0;     ///< pu total line charging
  double tap_ratio = 1.0;      ///< off-nominal turns ratio, 1.0 = none
  double phase_shift = 0.0;    ///< degrees
  double rate_normal = 0.0;    ///< MVA; 0 = unmonitored
  double rate_emergency = 0.0; ///< MVA; 0 = unmonitored
  bool in_service = true;

  bool operator==(const Branch&) const = default;
};

/// Generators with ramp_rate == kInfinity are treated as ramp-unconstrained.
struct Generator {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;         ///< MW
  double p_max = 0.0;         ///< MW
  double q_min = 0.0;         ///< MVar
  double q_max = 0.0;         ///< MVar
  double p_initial = 0.0;     ///< MW, dispatch point entering SCED
  double ramp_rate = 0.0;     ///< MW/min
  double reserve_price = 0.0; ///< $/MWh
  bool online = true;

  bool operator==(const Generator&) const = default;
};

struct CostSegment {
  double end_mw = 0.0;  ///< upper MW breakpoint of this segment
  double price = 0.0;   ///< $/MWh marginal price on the segment
  bool operator==(const CostSegment&) const = default;
};

/// Convex piecewise-linear energy cost. The curve starts at (start_mw,
/// start_cost) and each segment extends to its end_mw at a constant
/// marginal price. Breakpoints are strictly increasing and prices
/// non-decreasing; both are enforced by NetworkModel validation.
struct CostCurve {
  int owner = 0;  ///< generator id
  double start_mw = 0.0;
  double start_cost = 0.0;  ///< $/h at start_mw
  std::vector<CostSegment> segments;

  double domain_end() const { return segments.empty() ? start_mw : segments.back().end_mw; }

  /// $/h at dispatch p; p is clamped into [start_mw, domain_end].
  double cost_at(double p) const;
  /// Marginal $/MWh of the segment containing p.
  double marginal_at(double p) const;

  bool operator==(const CostCurve&) const = default;
};

/// Immutable grid description. Construct via make_network_model() (or the
/// case parsers), which validates invariants and freezes the id lookup
/// tables. Safe to share across threads afterwards.
class NetworkModel {
 public:
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::vector<CostCurve> cost_curves;

  std::size_t num_buses() const { return buses.size(); }
  std::size_t num_branches() const { return branches.size(); }
  std::size_t num_generators() const { return generators.size(); }

  /// Dense 0-based offsets for the external integer ids.
  int bus_offset(int bus_id) const;
  int branch_offset(int branch_id) const;
  int generator_offset(int gen_id) const;

  const Bus& bus(int bus_id) const { return buses[bus_offset(bus_id)]; }
  const Branch& branch(int branch_id) const { return branches[branch_offset(branch_id)]; }
  const Generator& generator(int gen_id) const { return generators[generator_offset(gen_id)]; }

  /// Cost curve of a generator, or nullptr when none was supplied.
  const CostCurve* cost_curve_for(int gen_id) const;

  /// Online generators at a bus (offsets into generators).
  const std::vector<int>& generators_at_bus(int bus_offset) const;

  double total_load_mw() const;

  /// Validates invariants and (re)builds the lookup tables. Throws
  /// DataError on unresolved references, duplicate ids, missing slack,
  /// non-convex cost curves, or out-of-range fields.
  void finalize();

  bool operator==(const NetworkModel& other) const;

 private:
  std::unordered_map<int, int> bus_index_;
  std::unordered_map<int, int> branch_index_;
  std::unordered_map<int, int> gen_index_;
  std::unordered_map<int, int> cost_index_;  // gen id -> cost curve offset
  std::vector<std::vector<int>> gens_at_bus_;
};

/// Validates and freezes a model assembled field by field.
NetworkModel make_network_model(NetworkModel model);

}  // namespace gridsced
