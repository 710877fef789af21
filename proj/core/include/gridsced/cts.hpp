#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gridsced/model.hpp"
#include "gridsced/power_flow.hpp"
#include "gridsced/rtca.hpp"
#include "gridsced/sensitivity.hpp"

namespace gridsced {

struct CtsCandidate {
  int contingency_id = 0;
  int switch_branch = 0;
  double violation_reduction_mva = 0.0;  ///< summed over originally violated branches
  double reduction_pct = 0.0;            ///< of the contingency's original violation
  bool pareto = false;
  /// Post-switch MVA on each originally violated branch, by branch id.
  std::vector<std::pair<int, double>> post_switch_flows;
};

struct PseudoLimit {
  int contingency_id = 0;
  int branch_id = 0;            ///< monitored branch
  double actual_limit_mw = 0.0;
  double pseudo_limit_mw = 0.0;
  int cts_rank_used = 0;        ///< 1-based rank of the switching action used
  int switch_branch = 0;
};

/// Full CTS evaluation for one contingency: every evaluable candidate ranked
/// by violation reduction, and the beneficial (Pareto, reduction > 0) head.
struct ContingencyCts {
  int contingency_id = 0;
  double original_violation_mva = 0.0;
  std::vector<ViolationRecord> violations;  ///< the contingency's CA violations
  std::vector<CtsCandidate> ranked;  ///< all evaluable candidates, descending
  std::vector<CtsCandidate> top;     ///< beneficial subset, at most top_k
  std::vector<int> unevaluable;      ///< candidate branches whose AC solve failed
};

struct CtsReport {
  std::vector<ContingencyCts> contingencies;  ///< ascending contingency id
  std::vector<PseudoLimit> pseudo_limits;     ///< at the configured rank
  std::vector<double> tau;                    ///< mean reduction_pct per rank, size top_k
};

struct CtsOptions {
  PowerFlowOptions power_flow;
  const PowerFlowSolution* base = nullptr;  ///< warm-start anchor (base case)
  int top_k = 5;
  int cts_rank = 3;  ///< switching action used for pseudo limits
  int jobs = 1;
  /// Linear pre-screen: keep only the `prescreen_keep` candidates with the
  /// best LODF-estimated reduction before running AC. Needs ptdf + lodf.
  bool lodf_prescreen = false;
  int prescreen_keep = 20;
  const PtdfMatrix* ptdf = nullptr;
  const LodfMatrix* lodf = nullptr;
  /// Non-empty: evaluate only these switch branches (replaying stored
  /// actions) instead of enumerating the full pool.
  std::vector<int> restrict_candidates;
};

/// Rank single-branch switching actions for one contingency. Candidates are
/// the in-service branches (other than the outaged one) whose removal keeps
/// the post-contingency network connected, each verified by a full AC solve.
ContingencyCts enumerate_cts(const NetworkModel& model, const ContingencyCase& contingency,
                             const std::vector<ViolationRecord>& ca_violations, int top_k,
                             const CtsOptions& options = {});

/// MW limit after relaxing the MVA rating by a CTS violation reduction,
/// at unchanged reactive flow: sqrt((rate + reduction)^2 - q_post^2).
double pseudo_limit(double rate_emergency, double violation_reduction, double q_post);

/// tau(r): mean reduction_pct of the r-th beneficial candidate over the
/// given contingencies; a missing r-th candidate contributes zero.
std::vector<double> cts_effectiveness(const std::vector<ContingencyCts>& reports, int top_k);

/// CTS across all critical contingencies of a CA report, including pseudo
/// limits at options.cts_rank and the per-rank effectiveness.
CtsReport run_cts(const NetworkModel& model, const PowerFlowSolution& base,
                  const CaReport& ca, const CtsOptions& options = {});

std::string cts_report_csv(const CtsReport& report);
std::string cts_report_json(const CtsReport& report);

}  // namespace gridsced
