#include "gridsced/pipeline.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"

#include "gridsced/common.hpp"

namespace gridsced {

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

double total_overload(const std::vector<FlowViolation>& violations) {
  double sum = 0.0;
  for (const FlowViolation& v : violations) sum += v.overload_mva;
  return sum;
}

CtsOptions cts_options(const PipelineConfig& config) {
  CtsOptions co;
  co.power_flow = config.power_flow;
  co.top_k = config.sced.top_k;
  co.cts_rank = config.sced.cts_rank;
  co.jobs = config.jobs;
  return co;
}

// Re-evaluate the stored switch actions (and only those) against this
// stage's fresh violations.
CtsReport replay_cts(const NetworkModel& model, const StageAnalysis& st,
                     const CtsReport& stored, const PipelineConfig& config) {
  std::map<int, std::vector<int>> actions;
  for (const ContingencyCts& cts : stored.contingencies)
    for (const CtsCandidate& cand : cts.top)
      actions[cts.contingency_id].push_back(cand.switch_branch);

  std::map<int, std::vector<ViolationRecord>> fresh;
  for (const ViolationRecord& v : st.ca.violations) fresh[v.contingency_id].push_back(v);

  CtsReport report;
  for (const auto& [cid, violations] : fresh) {
    const auto it = actions.find(cid);
    if (it == actions.end()) continue;  // nothing stored for this contingency
    CtsOptions co = cts_options(config);
    co.base = &st.base;
    co.restrict_candidates = it->second;
    report.contingencies.push_back(
        enumerate_cts(model, ContingencyCase{cid, cid}, violations, config.sced.top_k, co));
  }
  report.tau = cts_effectiveness(report.contingencies, config.sced.top_k);
  return report;
}

StageAnalysis analyze(const NetworkModel& model, const PipelineConfig& config,
                      bool with_cts, const CtsReport* stored_actions) {
  StageAnalysis st;
  st.base = stage("base-power-flow", [&] { return solve_ac(model, {}, nullptr, config.power_flow); });
  st.base_violations = check_violations(st.base, model, RatingKind::Normal);
  RtcaOptions ro;
  ro.power_flow = config.power_flow;
  ro.retain_loading_fraction = config.sced.pctc / 100.0;
  ro.jobs = config.jobs;
  st.ca = stage("rtca", [&] { return run_rtca(model, st.base, ro); });
  if (with_cts) {
    st.has_cts = true;
    st.cts = stage("cts", [&] {
      return stored_actions ? replay_cts(model, st, *stored_actions, config)
                            : run_cts(model, st.base, st.ca, cts_options(config));
    });
  }
  return st;
}

PipelineReport run_pipeline(const NetworkModel& model, const PipelineConfig& config,
                            bool procedure_b) {
  config.sced.validate();
  PipelineReport rep;
  rep.procedure = procedure_b ? "B" : "A";
  rep.config = config;

  rep.pre = analyze(model, config, procedure_b, nullptr);

  stage("sced", [&] {
    std::vector<NetworkConstraint> selected =
        select_network_constraints(model, rep.pre.base, rep.pre.ca, config.sced);
    rep.constraints = selected;
    if (procedure_b && config.sced.use_pseudo_limits &&
        !rep.pre.cts.pseudo_limits.empty()) {
      rep.constraints =
          apply_pseudo_limits(selected, rep.pre.cts.pseudo_limits, &rep.warnings);
      // Actual-limit benchmark on the same selection, for the cost delta.
      const ScedProblem bprob = build_sced(model, rep.pre.base, selected, config.sced);
      const ScedSolution bsol = solve_sced(model, rep.pre.base, bprob);
      if (bsol.status == lp::LpStatus::Optimal) {
        rep.has_sced_baseline = true;
        rep.baseline_total_cost = bsol.total_cost;
        rep.baseline_congestion_cost = bsol.congestion_cost;
      } else {
        rep.warnings.push_back("actual-limit benchmark dispatch is " +
                               lp::to_string(bsol.status));
      }
    }
    const ScedProblem prob = build_sced(model, rep.pre.base, rep.constraints, config.sced);
    rep.sced = solve_sced(model, rep.pre.base, prob);
    if (rep.sced.status != lp::LpStatus::Optimal) {
      std::string rows;
      for (const std::string& r : rep.sced.infeasible_rows)
        rows += (rows.empty() ? "" : ", ") + r;
      throw Error("dispatch " + lp::to_string(rep.sced.status) +
                  (rows.empty() ? "" : " (" + rows + ")"));
    }
    rep.market = settle(model, prob, rep.sced);
    return 0;
  });

  // The post stage sees only the model and the new dispatch points.
  NetworkModel redispatched = model;
  for (Generator& g : redispatched.generators)
    if (g.online) g.p_initial = rep.sced.dispatch.at(g.id);
  rep.post = analyze(redispatched, config, procedure_b, procedure_b ? &rep.pre.cts : nullptr);

  rep.pre_violation_mva = rep.pre.ca.total_violation_mva;
  rep.post_violation_mva = rep.post.ca.total_violation_mva;
  rep.delta_violation_mva = rep.pre_violation_mva - rep.post_violation_mva;
  return rep;
}

nlohmann::json violations_json(const std::vector<FlowViolation>& violations) {
  nlohmann::json arr = nlohmann::json::array();
  for (const FlowViolation& v : violations) {
    arr.push_back({{"branch_id", v.branch_id},
                   {"flow_mva", v.flow_mva},
                   {"rating_mva", v.rating_mva},
                   {"overload_mva", v.overload_mva},
                   {"overload_pct", v.overload_pct}});
  }
  return arr;
}

nlohmann::json stage_json(const StageAnalysis& st) {
  nlohmann::json j;
  j["base"] = {{"converged", st.base.converged},
               {"iterations", st.base.iterations},
               {"slack_p_mw", st.base.slack_p_mw},
               {"violations", violations_json(st.base_violations)}};
  j["ca"] = nlohmann::json::parse(ca_report_json(st.ca));
  if (st.has_cts) j["cts"] = nlohmann::json::parse(cts_report_json(st.cts));
  return j;
}

std::string fmt1(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

}  // namespace

PipelineReport run_procedure_a(const NetworkModel& model, const PipelineConfig& config) {
  return run_pipeline(model, config, false);
}

PipelineReport run_procedure_b(const NetworkModel& model, const PipelineConfig& config) {
  return run_pipeline(model, config, true);
}

std::string pipeline_report_json(const PipelineReport& report, const NetworkModel& model) {
  nlohmann::json j;
  j["procedure"] = report.procedure;
  j["variant"] = to_string(report.config.sced.variant);
  j["pre"] = stage_json(report.pre);

  auto& sced = j["sced"];
  sced["status"] = lp::to_string(report.sced.status);
  sced["total_cost"] = report.sced.total_cost;
  sced["energy_cost"] = report.sced.energy_cost;
  sced["reserve_cost"] = report.sced.reserve_cost;
  sced["congestion_cost"] = report.sced.congestion_cost;
  sced["relaxed_total_cost"] = report.sced.relaxed_total_cost;
  sced["energy_price"] = report.sced.energy_price;
  sced["binding"] = report.sced.binding;
  auto& dispatch = sced["dispatch"] = nlohmann::json::array();
  for (const Generator& g : model.generators) {
    const auto r = report.sced.reserve.find(g.id);
    dispatch.push_back({{"gen_id", g.id},
                        {"bus_id", g.bus},
                        {"dispatch_mw", report.sced.dispatch.at(g.id)},
                        {"reserve_mw", r == report.sced.reserve.end() ? 0.0 : r->second}});
  }
  auto& rows = sced["network_constraints"] = nlohmann::json::array();
  for (int ci = 0; ci < (int)report.constraints.size(); ++ci) {
    const NetworkConstraint& nc = report.constraints[ci];
    rows.push_back({{"name", nc.name()},
                    {"limit_mw", nc.limit_mw},
                    {"is_pseudo", nc.is_pseudo},
                    {"flow_mw", report.sced.constraint_flows[ci]},
                    {"dual", report.sced.constraint_duals[ci]}});
  }

  j["market"] = nlohmann::json::parse(market_report_json(report.market, model));
  j["post"] = stage_json(report.post);
  auto& deltas = j["deltas"];
  deltas["pre_violation_mva"] = report.pre_violation_mva;
  deltas["post_violation_mva"] = report.post_violation_mva;
  deltas["delta_violation_mva"] = report.delta_violation_mva;
  if (report.has_sced_baseline) {
    deltas["baseline_total_cost"] = report.baseline_total_cost;
    deltas["baseline_congestion_cost"] = report.baseline_congestion_cost;
    deltas["congestion_cost_delta"] =
        report.baseline_congestion_cost - report.sced.congestion_cost;
  }
  if (!report.warnings.empty()) j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string pipeline_summary_text(const PipelineReport& report, const NetworkModel& model) {
  std::ostringstream os;
  os << "Procedure " << report.procedure << " | variant "
     << to_string(report.config.sced.variant) << " | " << model.buses.size() << " buses, "
     << model.branches.size() << " branches, " << model.generators.size() << " units\n\n";

  const auto stage_text = [&](const char* title, const StageAnalysis& st) {
    os << title << "\n";
    os << "  base power flow: " << (st.base.converged ? "converged" : "FAILED") << " in "
       << st.base.iterations << " iterations, slack " << fmt1(st.base.slack_p_mw)
       << " MW\n";
    os << "  normal-rating violations: " << st.base_violations.size() << " (total "
       << fmt1(total_overload(st.base_violations)) << " MVA)\n";
    os << "  contingencies: " << st.ca.cases_evaluated << " evaluated, "
       << st.ca.nonconverged.size() << " non-converged, " << st.ca.violations.size()
       << " violations on " << st.ca.critical_contingencies.size()
       << " critical outages (total " << fmt1(st.ca.total_violation_mva) << " MVA)\n";
    for (const ViolationRecord& v : st.ca.violations) {
      os << "    outage " << v.contingency_id << " -> branch " << v.branch_id << ": "
         << fmt1(v.flow_mva) << " / " << fmt1(v.rate_emergency) << " MVA (+"
         << fmt1(v.overload_mva) << ", " << fmt1(v.overload_pct) << "%)\n";
    }
    if (st.has_cts) {
      for (const ContingencyCts& cts : st.cts.contingencies) {
        os << "  switching actions for outage " << cts.contingency_id << " ("
           << fmt1(cts.original_violation_mva) << " MVA violated)\n";
        const auto& list = cts.top.empty() ? cts.ranked : cts.top;
        for (int r = 0; r < (int)list.size() && r < report.config.sced.top_k; ++r) {
          const CtsCandidate& cand = list[r];
          os << "    #" << (r + 1) << " open branch " << cand.switch_branch << ": -"
             << fmt1(cand.violation_reduction_mva) << " MVA ("
             << fmt1(cand.reduction_pct) << "%)" << (cand.pareto ? "" : " [not pareto]")
             << "\n";
        }
      }
      if (!st.cts.tau.empty()) {
        os << "  mean reduction by rank:";
        for (int r = 0; r < (int)st.cts.tau.size(); ++r)
          os << " #" << (r + 1) << " " << fmt1(st.cts.tau[r]) << "%";
        os << "\n";
      }
    }
  };

  stage_text("PRE-DISPATCH", report.pre);
  os << "\nDISPATCH\n";
  os << "  constraints modeled: " << report.constraints.size() << " ("
     << report.sced.binding.size() << " binding)\n";
  int pseudo_count = 0;
  for (const NetworkConstraint& nc : report.constraints) pseudo_count += nc.is_pseudo;
  if (pseudo_count > 0) os << "  pseudo emergency limits in effect: " << pseudo_count << "\n";
  os << "  total cost " << fmt1(report.sced.total_cost) << " $/h  (energy "
     << fmt1(report.sced.energy_cost) << ", reserve " << fmt1(report.sced.reserve_cost)
     << ", congestion " << fmt1(report.sced.congestion_cost) << ")\n";
  if (report.has_sced_baseline) {
    os << "  actual-limit benchmark: total " << fmt1(report.baseline_total_cost)
       << " $/h, congestion " << fmt1(report.baseline_congestion_cost) << " $/h\n";
  }
  os << "  energy price " << fmt1(report.sced.energy_price) << " $/MWh, average LMP "
     << fmt1(report.market.average_lmp) << " $/MWh\n";
  os << "  load payment " << fmt1(report.market.load_payment) << " $/h, revenue "
     << fmt1(report.market.generator_revenue) << ", rent "
     << fmt1(report.market.generator_rent) << ", congestion revenue "
     << fmt1(report.market.congestion_revenue) << "\n";
  os << "\n";
  stage_text("POST-DISPATCH", report.post);
  os << "\nN-1 violation total: " << fmt1(report.pre_violation_mva) << " -> "
     << fmt1(report.post_violation_mva) << " MVA (reduced by "
     << fmt1(report.delta_violation_mva) << ")\n";
  for (const std::string& w : report.warnings) os << "warning: " << w << "\n";
  return os.str();
}

std::string congestion_plot_csv(const PipelineReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "scenario,total_cost,congestion_cost\n";
  if (report.has_sced_baseline) {
    os << "actual_limits," << report.baseline_total_cost << ","
       << report.baseline_congestion_cost << "\n";
  }
  os << (report.constraints.empty() ? "unconstrained" : "dispatch") << ","
     << report.sced.total_cost << "," << report.sced.congestion_cost << "\n";
  os << "relaxed," << report.sced.relaxed_total_cost << ",0\n";
  return os.str();
}

std::string payment_plot_csv(const PipelineReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "quantity,dollars_per_hour\n";
  os << "load_payment," << report.market.load_payment << "\n";
  os << "generator_revenue," << report.market.generator_revenue << "\n";
  os << "generator_cost," << report.market.generator_cost << "\n";
  os << "generator_rent," << report.market.generator_rent << "\n";
  os << "congestion_revenue," << report.market.congestion_revenue << "\n";
  return os.str();
}

}  // namespace gridsced
