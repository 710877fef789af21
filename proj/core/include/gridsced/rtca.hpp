#pragma once

#include <set>
#include <string>
#include <vector>

#include "gridsced/model.hpp"
#include "gridsced/power_flow.hpp"

namespace gridsced {

struct ContingencyCase {
  int id = 0;              ///< equals the outaged branch id
  int outaged_branch = 0;
};

struct ViolationRecord {
  int contingency_id = 0;
  int branch_id = 0;       ///< monitored (overloaded) branch
  double flow_mva = 0.0;
  double rate_emergency = 0.0;
  double overload_mva = 0.0;
  double overload_pct = 0.0;
  double q_post = 0.0;  ///< MVar at the monitored end, post-contingency
  double q_base = 0.0;  ///< MVar at the monitored end, base case
};

/// Post-contingency loading of a rated branch, kept when it reaches the
/// retention threshold. Feeds contingency-constraint selection, which needs
/// flows well below the violation level.
struct BranchLoading {
  int contingency_id = 0;
  int branch_id = 0;
  double s_mva = 0.0;
  double p_from_mw = 0.0;  ///< signed MW at the from end (network-model orientation)
  double q_mvar = 0.0;     ///< signed, monitored end (feeds the MVA-to-MW conversion)
  double rate_emergency = 0.0;
};

struct CaReport {
  std::vector<ContingencyCase> cases;       ///< evaluated, ascending id
  std::vector<ViolationRecord> violations;  ///< ordered by (contingency, branch)
  std::vector<BranchLoading> loadings;      ///< ordered by (contingency, branch)
  std::set<int> critical_contingencies;     ///< contingencies with >= 1 violation
  std::vector<int> nonconverged;            ///< contingency ids
  double total_violation_mva = 0.0;
  int cases_evaluated = 0;
};

struct RtcaOptions {
  PowerFlowOptions power_flow;
  bool warm_start = true;
  /// Keep a BranchLoading when s >= fraction * rate_emergency (0 keeps all
  /// rated branches; callers preparing SCED pass their pctc threshold).
  double retain_loading_fraction = 0.0;
  int jobs = 1;
};

/// N-1 screening over every in-service non-radial branch of the base
/// topology. Non-converged cases are listed, not silently dropped; radial
/// (bridge) branches are never solved.
CaReport run_rtca(const NetworkModel& model, const PowerFlowSolution& base,
                  const RtcaOptions& options = {});

/// MW headroom under an MVA rating at the post-contingency reactive
/// operating point: sqrt(rate^2 - q_post^2).
double mw_emergency_limit_accurate(double rate_emergency, double q_post);

/// Same conversion using the base-case reactive flow (cheaper, less exact).
double mw_emergency_limit_coarse(double rate_emergency, double q_base);

std::string ca_report_csv(const CaReport& report);
std::string ca_report_json(const CaReport& report);

}  // namespace gridsced
