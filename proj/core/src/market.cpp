#include "gridsced/market.hpp"

#include <sstream>

#include "json.hpp"

#include "gridsced/common.hpp"

namespace gridsced {

std::vector<double> compute_lmps(const NetworkModel& model, const ScedProblem& problem,
                                 const ScedSolution& solution) {
  if (solution.status != lp::LpStatus::Optimal)
    throw Error("LMPs are only defined at an optimal dispatch");
  if (!solution.nodal_price.empty()) return solution.nodal_price;

  std::vector<double> lmp(model.buses.size(), solution.energy_price);
  if (!problem.ptdf || solution.constraint_duals.empty()) return lmp;
  const PtdfMatrix& ptdf = *problem.ptdf;
  const LodfMatrix& lodf = *problem.lodf;
  for (int ci = 0; ci < (int)problem.constraints.size(); ++ci) {
    const double y = solution.constraint_duals[ci];
    if (y == 0.0) continue;
    const NetworkConstraint& nc = problem.constraints[ci];
    const int e = model.branch_offset(nc.branch_id);
    const bool ctg = nc.kind == NetworkConstraint::Kind::Contingency;
    const int c = ctg ? model.branch_offset(nc.contingency_id) : -1;
    const double lodf_kc = ctg ? lodf.entries(e, c) : 0.0;
    for (int i = 0; i < (int)model.buses.size(); ++i) {
      double w = ptdf.entries(e, i);
      if (ctg) w += lodf_kc * ptdf.entries(c, i);
      lmp[i] += y * nc.direction * w;
    }
  }
  return lmp;
}

MarketReport settle(const NetworkModel& model, const ScedProblem& problem,
                    const ScedSolution& solution) {
  MarketReport r;
  r.energy_lmp = solution.energy_price;
  r.lmp = compute_lmps(model, problem, solution);
  r.congestion_lmp.resize(r.lmp.size());
  for (int i = 0; i < (int)r.lmp.size(); ++i) {
    r.congestion_lmp[i] = r.lmp[i] - r.energy_lmp;
    r.load_payment += r.lmp[i] * model.buses[i].p_load;
    r.average_lmp += r.lmp[i];
    r.average_congestion_lmp += r.congestion_lmp[i];
  }
  if (!model.buses.empty()) {
    r.average_lmp /= (double)model.buses.size();
    r.average_congestion_lmp /= (double)model.buses.size();
  }
  for (const Generator& g : model.generators) {
    if (!g.online) continue;
    const double p = solution.dispatch.at(g.id);
    r.generator_revenue += r.lmp[model.bus_offset(g.bus)] * p;
    const CostCurve* curve = model.cost_curve_for(g.id);
    if (curve) r.generator_cost += curve->cost_at(p);
  }
  r.generator_rent = r.generator_revenue - r.generator_cost;
  r.congestion_revenue = r.load_payment - r.generator_revenue;
  return r;
}

std::string market_report_csv(const MarketReport& report, const NetworkModel& model) {
  std::ostringstream os;
  os.precision(17);
  os << "bus_id,lmp,energy_lmp,congestion_lmp\n";
  for (int i = 0; i < (int)model.buses.size(); ++i) {
    os << model.buses[i].id << "," << report.lmp[i] << "," << report.energy_lmp << ","
       << report.congestion_lmp[i] << "\n";
  }
  return os.str();
}

std::string market_report_json(const MarketReport& report, const NetworkModel& model) {
  nlohmann::json j;
  j["energy_lmp"] = report.energy_lmp;
  j["load_payment"] = report.load_payment;
  j["generator_revenue"] = report.generator_revenue;
  j["generator_cost"] = report.generator_cost;
  j["generator_rent"] = report.generator_rent;
  j["congestion_revenue"] = report.congestion_revenue;
  j["average_lmp"] = report.average_lmp;
  j["average_congestion_lmp"] = report.average_congestion_lmp;
  auto& buses = j["buses"] = nlohmann::json::array();
  for (int i = 0; i < (int)model.buses.size(); ++i) {
    buses.push_back({{"bus_id", model.buses[i].id},
                     {"lmp", report.lmp[i]},
                     {"congestion_lmp", report.congestion_lmp[i]}});
  }
  return j.dump(2) + "\n";
}

}  // namespace gridsced
