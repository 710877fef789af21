#pragma once

#include <string>
#include <vector>

#include "gridsced/model.hpp"
#include "gridsced/sced.hpp"

namespace gridsced {

struct MarketReport {
  double energy_lmp = 0.0;             ///< $/MWh, power-balance dual
  std::vector<double> lmp;             ///< $/MWh per bus offset
  std::vector<double> congestion_lmp;  ///< $/MWh per bus offset; lmp - energy_lmp
  double load_payment = 0.0;           ///< $/h
  double generator_revenue = 0.0;      ///< $/h
  double generator_cost = 0.0;         ///< $/h, cost curves at dispatch
  double generator_rent = 0.0;         ///< revenue - cost
  double congestion_revenue = 0.0;     ///< load payment - revenue (lossless)
  double average_lmp = 0.0;            ///< unweighted bus mean
  double average_congestion_lmp = 0.0;
};

/// Per-bus prices at the SCED optimum: the balance dual plus every network
/// constraint's dual spread through its injection sensitivities. B-theta
/// solutions carry the same prices on their nodal duals and are read
/// directly.
std::vector<double> compute_lmps(const NetworkModel& model, const ScedProblem& problem,
                                 const ScedSolution& solution);

MarketReport settle(const NetworkModel& model, const ScedProblem& problem,
                    const ScedSolution& solution);

std::string market_report_csv(const MarketReport& report, const NetworkModel& model);
std::string market_report_json(const MarketReport& report, const NetworkModel& model);

}  // namespace gridsced
