#include "gridsced/rtca.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "gridsced/common.hpp"
#include "gridsced/graph.hpp"
#include "gridsced/parallel.hpp"

namespace gridsced {

double mw_emergency_limit_accurate(double rate_emergency, double q_post) {
  if (std::abs(q_post) > rate_emergency) {
    std::ostringstream msg;
    msg << "degenerate emergency limit: |q| = " << std::abs(q_post)
        << " MVar exceeds the " << rate_emergency << " MVA rating";
    throw NumericError(msg.str());
  }
  return std::sqrt(rate_emergency * rate_emergency - q_post * q_post);
}

double mw_emergency_limit_coarse(double rate_emergency, double q_base) {
  return mw_emergency_limit_accurate(rate_emergency, q_base);
}

CaReport run_rtca(const NetworkModel& model, const PowerFlowSolution& base,
                  const RtcaOptions& options) {
  if (!base.converged) throw Error("RTCA requires a converged base case");

  // Contingency list: in-service non-bridge branches of the base topology,
  // ascending by id.
  const std::set<int> radial = find_radial_branches(model, base.out_of_service);
  std::vector<ContingencyCase> cases;
  for (const Branch& br : model.branches) {
    if (!br.in_service || base.out_of_service.count(br.id)) continue;
    if (radial.count(br.id)) continue;
    cases.push_back({br.id, br.id});
  }
  std::sort(cases.begin(), cases.end(),
            [](const ContingencyCase& a, const ContingencyCase& b) { return a.id < b.id; });

  struct CaseResult {
    bool converged = false;
    std::vector<ViolationRecord> violations;
    std::vector<BranchLoading> loadings;
  };
  std::vector<CaseResult> results(cases.size());

  parallel_for((int)cases.size(), options.jobs, [&](int ci) {
    const ContingencyCase& cc = cases[ci];
    CaseResult& res = results[ci];
    std::set<int> out = base.out_of_service;
    out.insert(cc.outaged_branch);
    PowerFlowSolution sol;
    try {
      sol = solve_ac(model, out, options.warm_start ? &base : nullptr, options.power_flow);
    } catch (const Error&) {
      return;  // recorded as non-converged below
    }
    res.converged = true;
    for (const FlowViolation& v : check_violations(sol, model, RatingKind::Emergency)) {
      const int e = model.branch_offset(v.branch_id);
      ViolationRecord rec;
      rec.contingency_id = cc.id;
      rec.branch_id = v.branch_id;
      rec.flow_mva = v.flow_mva;
      rec.rate_emergency = v.rating_mva;
      rec.overload_mva = v.overload_mva;
      rec.overload_pct = v.overload_pct;
      rec.q_post = sol.q_monitored(e);
      rec.q_base = base.q_monitored(e);
      res.violations.push_back(rec);
    }
    for (int e = 0; e < (int)model.branches.size(); ++e) {
      const Branch& br = model.branches[e];
      if (!br.in_service || br.rate_emergency <= 0.0 || out.count(br.id)) continue;
      if (sol.s_flow[e] < options.retain_loading_fraction * br.rate_emergency) continue;
      BranchLoading load;
      load.contingency_id = cc.id;
      load.branch_id = br.id;
      load.s_mva = sol.s_flow[e];
      load.p_from_mw = sol.p_from[e];
      load.q_mvar = sol.q_monitored(e);
      load.rate_emergency = br.rate_emergency;
      res.loadings.push_back(load);
    }
  });

  CaReport report;
  report.cases = std::move(cases);
  report.cases_evaluated = (int)report.cases.size();
  for (int ci = 0; ci < (int)report.cases.size(); ++ci) {
    const CaseResult& res = results[ci];
    if (!res.converged) {
      report.nonconverged.push_back(report.cases[ci].id);
      continue;
    }
    for (const ViolationRecord& rec : res.violations) {
      report.critical_contingencies.insert(rec.contingency_id);
      report.total_violation_mva += rec.overload_mva;
      report.violations.push_back(rec);
    }
    report.loadings.insert(report.loadings.end(), res.loadings.begin(), res.loadings.end());
  }
  return report;
}

std::string ca_report_csv(const CaReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "contingency_id,branch_id,flow_mva,rate_emergency_mva,overload_mva,overload_pct,"
        "q_post_mvar,q_base_mvar\n";
  for (const ViolationRecord& v : report.violations) {
    os << v.contingency_id << "," << v.branch_id << "," << v.flow_mva << ","
       << v.rate_emergency << "," << v.overload_mva << "," << v.overload_pct << ","
       << v.q_post << "," << v.q_base << "\n";
  }
  return os.str();
}

std::string ca_report_json(const CaReport& report) {
  nlohmann::json j;
  j["cases_evaluated"] = report.cases_evaluated;
  j["total_violation_mva"] = report.total_violation_mva;
  j["critical_contingencies"] = report.critical_contingencies;
  j["nonconverged"] = report.nonconverged;
  auto& violations = j["violations"] = nlohmann::json::array();
  for (const ViolationRecord& v : report.violations) {
    violations.push_back({{"contingency_id", v.contingency_id},
                          {"branch_id", v.branch_id},
                          {"flow_mva", v.flow_mva},
                          {"rate_emergency_mva", v.rate_emergency},
                          {"overload_mva", v.overload_mva},
                          {"overload_pct", v.overload_pct},
                          {"q_post_mvar", v.q_post},
                          {"q_base_mvar", v.q_base}});
  }
  return j.dump(2) + "\n";
}

}  // namespace gridsced
