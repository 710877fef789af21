#pragma once

#include <Eigen/Dense>

#include <set>
#include <string>
#include <vector>

#include "gridsced/model.hpp"

namespace gridsced {

/// DC injection-shift factors: entries(e, b) is the MW flow change on branch
/// offset e per MW injected at bus offset b and withdrawn at the slack.
/// The slack column is identically zero; rows of inactive branches are zero.
struct PtdfMatrix {
  int slack = 0;  ///< bus id
  std::set<int> out_of_service;
  Eigen::MatrixXd entries;

  /// Sensitivity of branch e to a transfer injected at `from_offset` and
  /// withdrawn at `to_offset`.
  double transfer(int branch_offset, int from_offset, int to_offset) const {
    return entries(branch_offset, from_offset) - entries(branch_offset, to_offset);
  }
};

/// Flow-redistribution factors: entries(k, c) is the fraction of branch c's
/// pre-outage flow that lands on branch k when c trips. Diagonal -1.
/// Columns whose outage would split the network (or whose branch is already
/// out) are flagged and carry zeros.
struct LodfMatrix {
  Eigen::MatrixXd entries;
  std::vector<char> islanding;  ///< per outaged branch offset
};

/// Build PTDFs for the in-service topology minus `out_of_service`.
/// `slack_bus_id` < 0 selects the model's slack bus. The effective network
/// must be connected.
PtdfMatrix build_ptdf(const NetworkModel& model, int slack_bus_id = -1,
                      const std::set<int>& out_of_service = {});

LodfMatrix build_lodf(const PtdfMatrix& ptdf, const NetworkModel& model);

/// DC branch flows (MW) for the given per-bus net injections (MW), computed
/// as PTDF × injection plus the fixed phase-shifter terms.
Eigen::VectorXd dc_flows(const PtdfMatrix& ptdf, const NetworkModel& model,
                         const Eigen::VectorXd& injections_mw);

/// DC series susceptance of a branch in pu flow per radian (1 / (x·tap)).
double dc_susceptance(const Branch& br);

std::string ptdf_csv(const PtdfMatrix& ptdf, const NetworkModel& model);
std::string lodf_csv(const LodfMatrix& lodf, const NetworkModel& model);

}  // namespace gridsced
