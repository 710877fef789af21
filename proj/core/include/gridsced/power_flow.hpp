#pragma once

#include <set>
#include <string>
#include <vector>

#include "gridsced/model.hpp"

namespace gridsced {

struct PowerFlowOptions {
  double tolerance = 1e-6;  ///< pu, applied to both P and Q mismatch
  int max_iterations = 30;
  bool enforce_q_limits = true;  ///< PV buses convert to PQ at a violated Q limit
};

/// AC operating state. Bus arrays are indexed by bus offset, branch arrays
/// by branch offset; out-of-service branches carry zero flow.
struct PowerFlowSolution {
  std::vector<double> v_mag;  ///< pu
  std::vector<double> v_ang;  ///< radians
  std::vector<double> p_from, q_from;  ///< MW / MVar at the from end
  std::vector<double> p_to, q_to;      ///< MW / MVar at the to end
  std::vector<double> s_flow;          ///< MVA, larger of the two ends
  std::vector<int> monitored_end;      ///< 0 = from end, 1 = to end (the larger)
  std::vector<double> p_gen;           ///< MW produced per generator (slack-bus units absorb the residual)
  double slack_p_mw = 0.0;
  double slack_q_mvar = 0.0;
  bool converged = false;
  int iterations = 0;
  double max_mismatch_pu = 0.0;
  std::set<int> out_of_service;  ///< branch ids removed on top of status flags

  /// MW / MVar at the monitored (larger-MVA) end of a branch offset.
  double p_monitored(int branch_offset) const {
    return monitored_end[branch_offset] == 0 ? p_from[branch_offset] : p_to[branch_offset];
  }
  double q_monitored(int branch_offset) const {
    return monitored_end[branch_offset] == 0 ? q_from[branch_offset] : q_to[branch_offset];
  }
};

enum class RatingKind { Normal, Emergency };

struct FlowViolation {
  int branch_id = 0;
  double flow_mva = 0.0;
  double rating_mva = 0.0;
  double overload_mva = 0.0;
  double overload_pct = 0.0;
};

/// Newton-Raphson AC power flow on the polar mismatch equations.
///
/// The effective topology is the in-service branch set minus
/// `out_of_service` (by branch id). Every island containing a slack bus is
/// solved; islands without one must be electrically dead or an Error is
/// raised naming the isolated buses. Generators at PV/slack buses inject
/// p_initial and regulate voltage; generator reactive output at PQ-typed
/// buses is not modeled. Throws NumericError when the iteration cap is hit
/// or the Jacobian goes singular — an unconverged state never escapes.
PowerFlowSolution solve_ac(const NetworkModel& model, const std::set<int>& out_of_service = {},
                           const PowerFlowSolution* warm_start = nullptr,
                           const PowerFlowOptions& options = {});

/// Branch loading violations of the requested rating. A branch with flow
/// exactly at its rating is not in violation; unrated branches are
/// unmonitored.
std::vector<FlowViolation> check_violations(const PowerFlowSolution& solution,
                                            const NetworkModel& model, RatingKind which);

std::string solution_bus_csv(const PowerFlowSolution& solution, const NetworkModel& model);
std::string solution_branch_csv(const PowerFlowSolution& solution, const NetworkModel& model);
std::string solution_json(const PowerFlowSolution& solution, const NetworkModel& model);

}  // namespace gridsced
