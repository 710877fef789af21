#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "gridsced/lp.hpp"
#include "gridsced/model.hpp"
#include "gridsced/power_flow.hpp"
#include "gridsced/rtca.hpp"
#include "gridsced/cts.hpp"
#include "gridsced/sensitivity.hpp"

namespace gridsced {

/// The five network-model variants. M1/M2 are incremental around the AC
/// state (deviation balance), M3 is a cold-start PTDF injection model,
/// M4/M5 carry explicit B-theta angle sets per topology. M1/M4 convert MVA
/// ratings with post-contingency reactive flows, the rest with base-case
/// reactive flows.
enum class ScedVariant { M1, M2, M3, M4, M5 };

ScedVariant sced_variant_from_string(const std::string& s);
std::string to_string(ScedVariant variant);

enum class ReserveRule { LargestUnit, FixedMw, FractionOfLoad };

struct ScedConfig {
  ScedVariant variant = ScedVariant::M1;
  double pct = 50.0;   ///< base-case constraint threshold, % of normal rating
  double pctc = 90.0;  ///< contingency constraint threshold, % of emergency rating
  double interval_minutes = 15.0;
  ReserveRule reserve_rule = ReserveRule::LargestUnit;
  double reserve_value = 0.0;  ///< MW (FixedMw) or percent of load (FractionOfLoad)
  /// Relax contingency limits to switching-backed pseudo limits (procedure
  /// B only; with this off, procedure B is procedure A plus an
  /// informational switching report).
  bool use_pseudo_limits = true;
  int cts_rank = 3;
  int top_k = 5;
  int jobs = 1;

  void validate() const;
  double reserve_requirement_mw(const NetworkModel& model) const;
};

struct NetworkConstraint {
  enum class Kind { Base, Contingency };
  Kind kind = Kind::Base;
  int branch_id = 0;
  int contingency_id = -1;  ///< Contingency kind only
  double limit_mw = 0.0;
  bool is_pseudo = false;
  int direction = +1;       ///< prevailing sign of the from-end MW flow
  double anchor_mw = 0.0;   ///< AC from-end MW flow of the constrained state
  double q_mvar = 0.0;      ///< reactive flow behind limit_mw (reporting)

  std::string name() const;
};

/// Base rows: branches at or above pct% of normal rating (or base-violated).
/// Contingency rows: (branch, contingency) pairs at or above pctc% of
/// emergency rating (or CA-violated), with limits per the variant's MVA-to-MW
/// conversion. The CA report must retain loadings down to the pctc threshold.
std::vector<NetworkConstraint> select_network_constraints(const NetworkModel& model,
                                                          const PowerFlowSolution& base,
                                                          const CaReport& ca,
                                                          const ScedConfig& config);

/// Swap matched contingency limits for pseudo limits; unmatched pseudo
/// entries are reported in `warnings` and ignored.
std::vector<NetworkConstraint> apply_pseudo_limits(std::vector<NetworkConstraint> constraints,
                                                   const std::vector<PseudoLimit>& pseudo,
                                                   std::vector<std::string>* warnings = nullptr);

/// A built SCED instance: the LP plus the bookkeeping needed to read a
/// solution back out of it.
struct ScedProblem {
  lp::LinearProgram lp;
  ScedConfig config;
  std::vector<NetworkConstraint> constraints;

  std::vector<int> online_gens;            ///< model generator offsets, block order
  std::vector<std::vector<int>> seg_vars;  ///< per online gen
  std::vector<double> dispatch_floor_mw;   ///< per online gen: var-free base dispatch
  std::vector<int> reserve_vars;           ///< per online gen
  double fixed_cost = 0.0;                 ///< cost of running every unit at its floor
  int balance_row = -1;                    ///< system balance; slack nodal row for B-theta
  std::vector<int> constraint_rows;        ///< aligned with `constraints`
  std::vector<double> constraint_flow_offsets;  ///< modeled flow = dir * activity + offset
  std::vector<int> nodal_rows;             ///< B-theta: per bus offset (base topology)
  /// B-theta: contingency id -> per-bus nodal rows (-1 at the slack bus,
  /// whose balance is implied and carries no dual).
  std::map<int, std::vector<int>> ctg_nodal_rows;
  std::shared_ptr<PtdfMatrix> ptdf;        ///< built for PTDF variants, shared onward
  std::shared_ptr<LodfMatrix> lodf;
};

ScedProblem build_sced(const NetworkModel& model, const PowerFlowSolution& base,
                       const std::vector<NetworkConstraint>& constraints,
                       const ScedConfig& config);

struct ScedSolution {
  lp::LpStatus status = lp::LpStatus::Optimal;
  std::map<int, double> dispatch;  ///< gen id -> MW (offline units at 0)
  std::map<int, double> reserve;   ///< gen id -> MW
  double total_cost = 0.0;    ///< $/h, energy + reserve
  double energy_cost = 0.0;
  double reserve_cost = 0.0;
  double congestion_cost = 0.0;  ///< total minus the relaxed (network-free) total
  double relaxed_total_cost = 0.0;
  double energy_price = 0.0;  ///< $/MWh, power-balance dual
  std::vector<double> constraint_duals;  ///< d(cost)/d(limit), aligned with constraints
  std::vector<double> constraint_flows;  ///< modeled MW flow per constraint
  std::vector<std::string> binding;      ///< names of binding network constraints
  /// Per bus offset, B-theta variants only: nodal-balance duals summed over
  /// topologies — the price of an extra MW of load at the bus.
  std::vector<double> nodal_price;
  std::vector<std::string> infeasible_rows;
  int lp_rows = 0, lp_cols = 0, lp_nonzeros = 0, lp_iterations = 0;
};

/// Solve a built SCED and the relaxed (no network rows) benchmark that
/// defines its congestion cost.
ScedSolution solve_sced(const NetworkModel& model, const PowerFlowSolution& base,
                        const ScedProblem& problem);

std::string sced_dispatch_csv(const ScedSolution& solution, const NetworkModel& model);
std::string sced_duals_csv(const ScedSolution& solution, const ScedProblem& problem);
std::string sced_solution_json(const ScedSolution& solution, const ScedProblem& problem,
                               const NetworkModel& model);

}  // namespace gridsced
