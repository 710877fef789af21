#include "gridsced/cts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

#include "gridsced/common.hpp"
#include "gridsced/graph.hpp"
#include "gridsced/parallel.hpp"

namespace gridsced {

double pseudo_limit(double rate_emergency, double violation_reduction, double q_post) {
  if (violation_reduction < 0.0)
    throw Error("pseudo limit requires a non-negative violation reduction");
  return mw_emergency_limit_accurate(rate_emergency + violation_reduction, q_post);
}

namespace {

// Overload of every emergency-rated branch in a solution, by branch offset.
std::vector<double> emergency_overloads(const NetworkModel& model,
                                        const PowerFlowSolution& sol) {
  std::vector<double> over(model.branches.size(), 0.0);
  for (int e = 0; e < (int)model.branches.size(); ++e) {
    const Branch& br = model.branches[e];
    if (!br.in_service || br.rate_emergency <= 0.0 || sol.out_of_service.count(br.id))
      continue;
    over[e] = std::max(0.0, sol.s_flow[e] - br.rate_emergency);
  }
  return over;
}

// LODF-composed estimate of the switching benefit, used only to trim the
// candidate pool on large cases. Works on the base-topology PTDF/LODF via
// one outage composition, so no extra factorizations are needed.
std::vector<int> prescreen_candidates(const NetworkModel& model, int outaged_branch,
                                      const std::vector<int>& candidates,
                                      const std::vector<int>& violated_offsets,
                                      const PowerFlowSolution& contingency_sol,
                                      const CtsOptions& options) {
  const PtdfMatrix& ptdf = *options.ptdf;
  const LodfMatrix& lodf = *options.lodf;
  const int c = model.branch_offset(outaged_branch);
  if (lodf.islanding[c]) return candidates;

  const auto transfer_c = [&](int k, int s) {
    const int fs = model.bus_offset(model.branches[s].from_bus);
    const int ts = model.bus_offset(model.branches[s].to_bus);
    return ptdf.transfer(k, fs, ts) + lodf.entries(k, c) * ptdf.transfer(c, fs, ts);
  };

  std::vector<std::pair<double, int>> scored;  // (-score, branch id) for stable sort
  for (int id : candidates) {
    const int s = model.branch_offset(id);
    const double denom = 1.0 - transfer_c(s, s);
    if (std::abs(denom) < 1e-6) {
      scored.emplace_back(-kInfinity, id);  // degenerate: keep, let AC decide
      continue;
    }
    double score = 0.0;
    for (int k : violated_offsets) {
      const Branch& br = model.branches[k];
      const double p_new =
          contingency_sol.p_from[k] + transfer_c(k, s) / denom * contingency_sol.p_from[s];
      const double q = contingency_sol.q_from[k];
      const double est = std::sqrt(p_new * p_new + q * q);
      const double orig = std::max(0.0, contingency_sol.s_flow[k] - br.rate_emergency);
      score += orig - std::max(0.0, est - br.rate_emergency);
    }
    scored.emplace_back(-score, id);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<int> kept;
  for (int i = 0; i < (int)scored.size() && i < options.prescreen_keep; ++i)
    kept.push_back(scored[i].second);
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace

ContingencyCts enumerate_cts(const NetworkModel& model, const ContingencyCase& contingency,
                             const std::vector<ViolationRecord>& ca_violations, int top_k,
                             const CtsOptions& options) {
  if (ca_violations.empty())
    throw Error("CTS enumeration needs at least one violation to reduce");

  std::set<int> out = options.base ? options.base->out_of_service : std::set<int>{};
  out.insert(contingency.outaged_branch);
  const PowerFlowSolution contingency_sol =
      solve_ac(model, out, options.base, options.power_flow);

  std::vector<int> violated_offsets;
  for (const ViolationRecord& v : ca_violations)
    violated_offsets.push_back(model.branch_offset(v.branch_id));
  const std::vector<double> orig_over = emergency_overloads(model, contingency_sol);
  double orig_total = 0.0;
  for (int k : violated_offsets) orig_total += orig_over[k];

  std::vector<int> candidates;
  std::vector<int> ineligible;
  if (!options.restrict_candidates.empty()) {
    std::vector<int> wanted = options.restrict_candidates;
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
    for (int id : wanted) {
      const Branch& br = model.branch(id);
      if (!br.in_service || out.count(id) || !keeps_connectivity(model, out, id))
        ineligible.push_back(id);
      else
        candidates.push_back(id);
    }
  } else {
    for (const Branch& br : model.branches) {
      if (!br.in_service || out.count(br.id)) continue;
      if (!keeps_connectivity(model, out, br.id)) continue;
      candidates.push_back(br.id);
    }
    std::sort(candidates.begin(), candidates.end());
    if (options.lodf_prescreen && options.ptdf && options.lodf &&
        (int)candidates.size() > options.prescreen_keep) {
      candidates = prescreen_candidates(model, contingency.outaged_branch, candidates,
                                        violated_offsets, contingency_sol, options);
    }
  }

  struct Eval {
    bool ok = false;
    CtsCandidate cand;
  };
  std::vector<Eval> evals(candidates.size());
  parallel_for((int)candidates.size(), options.jobs, [&](int i) {
    std::set<int> out_sw = out;
    out_sw.insert(candidates[i]);
    PowerFlowSolution sw;
    try {
      sw = solve_ac(model, out_sw, &contingency_sol, options.power_flow);
    } catch (const Error&) {
      return;
    }
    const std::vector<double> sw_over = emergency_overloads(model, sw);
    CtsCandidate cand;
    cand.contingency_id = contingency.id;
    cand.switch_branch = candidates[i];
    double remaining = 0.0;
    for (int k : violated_offsets) {
      remaining += sw_over[k];
      cand.post_switch_flows.emplace_back(model.branches[k].id, sw.s_flow[k]);
    }
    cand.violation_reduction_mva = orig_total - remaining;
    cand.reduction_pct =
        orig_total > 0.0 ? 100.0 * cand.violation_reduction_mva / orig_total : 0.0;
    cand.pareto = true;
    for (int e = 0; e < (int)model.branches.size(); ++e) {
      if (sw_over[e] > orig_over[e] + 1e-6) {
        cand.pareto = false;
        break;
      }
    }
    evals[i].ok = true;
    evals[i].cand = std::move(cand);
  });

  ContingencyCts result;
  result.contingency_id = contingency.id;
  result.original_violation_mva = orig_total;
  result.violations = ca_violations;
  result.unevaluable = std::move(ineligible);
  for (int i = 0; i < (int)candidates.size(); ++i) {
    if (evals[i].ok)
      result.ranked.push_back(std::move(evals[i].cand));
    else
      result.unevaluable.push_back(candidates[i]);
  }
  std::stable_sort(result.ranked.begin(), result.ranked.end(),
                   [](const CtsCandidate& a, const CtsCandidate& b) {
                     if (a.violation_reduction_mva != b.violation_reduction_mva)
                       return a.violation_reduction_mva > b.violation_reduction_mva;
                     return a.switch_branch < b.switch_branch;
                   });
  for (const CtsCandidate& cand : result.ranked) {
    if ((int)result.top.size() >= top_k) break;
    if (cand.pareto && cand.violation_reduction_mva > 1e-9) result.top.push_back(cand);
  }
  return result;
}

std::vector<double> cts_effectiveness(const std::vector<ContingencyCts>& reports, int top_k) {
  std::vector<double> tau(top_k, 0.0);
  if (reports.empty()) return tau;
  for (const ContingencyCts& report : reports) {
    for (int r = 0; r < top_k; ++r)
      if (r < (int)report.top.size()) tau[r] += report.top[r].reduction_pct;
  }
  for (double& t : tau) t /= (double)reports.size();
  return tau;
}

CtsReport run_cts(const NetworkModel& model, const PowerFlowSolution& base,
                  const CaReport& ca, const CtsOptions& options) {
  std::map<int, std::vector<ViolationRecord>> by_contingency;
  for (const ViolationRecord& v : ca.violations)
    by_contingency[v.contingency_id].push_back(v);

  CtsOptions opts = options;
  opts.base = &base;

  CtsReport report;
  for (const auto& [cid, violations] : by_contingency) {
    const ContingencyCase cc{cid, cid};
    report.contingencies.push_back(enumerate_cts(model, cc, violations, opts.top_k, opts));
    const ContingencyCts& cts = report.contingencies.back();
    if (cts.top.empty()) continue;  // no beneficial switch: limits stay actual

    const int rank_used = std::min(opts.cts_rank, (int)cts.top.size());
    const CtsCandidate& cand = cts.top[rank_used - 1];
    for (const ViolationRecord& v : violations) {
      PseudoLimit pl;
      pl.contingency_id = cid;
      pl.branch_id = v.branch_id;
      pl.cts_rank_used = rank_used;
      pl.switch_branch = cand.switch_branch;
      try {
        pl.actual_limit_mw = mw_emergency_limit_accurate(v.rate_emergency, v.q_post);
        pl.pseudo_limit_mw =
            pseudo_limit(v.rate_emergency, cand.violation_reduction_mva, v.q_post);
      } catch (const NumericError&) {
        continue;  // reactive flow beyond the rating: no MW relaxation to offer
      }
      report.pseudo_limits.push_back(pl);
    }
  }
  report.tau = cts_effectiveness(report.contingencies, opts.top_k);
  return report;
}

std::string cts_report_csv(const CtsReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "contingency_id,rank,switch_branch,violation_reduction_mva,reduction_pct,pareto,"
        "monitored_branch,pseudo_limit_mw\n";
  for (const ContingencyCts& cts : report.contingencies) {
    for (int r = 0; r < (int)cts.top.size(); ++r) {
      const CtsCandidate& cand = cts.top[r];
      for (const ViolationRecord& v : cts.violations) {
        os << cts.contingency_id << "," << (r + 1) << "," << cand.switch_branch << ","
           << cand.violation_reduction_mva << "," << cand.reduction_pct << ","
           << (cand.pareto ? 1 : 0) << "," << v.branch_id << ",";
        try {
          os << pseudo_limit(v.rate_emergency, cand.violation_reduction_mva, v.q_post);
        } catch (const Error&) {
          // reactive flow beyond the relaxed rating: leave the cell empty
        }
        os << "\n";
      }
    }
  }
  return os.str();
}

std::string cts_report_json(const CtsReport& report) {
  nlohmann::json j;
  auto& contingencies = j["contingencies"] = nlohmann::json::array();
  for (const ContingencyCts& cts : report.contingencies) {
    nlohmann::json jc;
    jc["contingency_id"] = cts.contingency_id;
    jc["original_violation_mva"] = cts.original_violation_mva;
    jc["unevaluable"] = cts.unevaluable;
    auto& top = jc["top"] = nlohmann::json::array();
    for (const CtsCandidate& cand : cts.top) {
      nlohmann::json jcand = {{"switch_branch", cand.switch_branch},
                              {"violation_reduction_mva", cand.violation_reduction_mva},
                              {"reduction_pct", cand.reduction_pct},
                              {"pareto", cand.pareto}};
      auto& flows = jcand["post_switch_flows"] = nlohmann::json::array();
      for (const auto& [branch, mva] : cand.post_switch_flows)
        flows.push_back({{"branch_id", branch}, {"s_mva", mva}});
      top.push_back(std::move(jcand));
    }
    contingencies.push_back(std::move(jc));
  }
  auto& pseudo = j["pseudo_limits"] = nlohmann::json::array();
  for (const PseudoLimit& pl : report.pseudo_limits) {
    pseudo.push_back({{"contingency_id", pl.contingency_id},
                      {"branch_id", pl.branch_id},
                      {"actual_limit_mw", pl.actual_limit_mw},
                      {"pseudo_limit_mw", pl.pseudo_limit_mw},
                      {"cts_rank_used", pl.cts_rank_used},
                      {"switch_branch", pl.switch_branch}});
  }
  j["tau_pct"] = report.tau;
  return j.dump(2) + "\n";
}

}  // namespace gridsced
