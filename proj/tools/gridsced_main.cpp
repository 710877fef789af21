#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridsced/case_io.hpp"
#include "gridsced/market.hpp"
#include "gridsced/pipeline.hpp"

using namespace gridsced;

namespace {

struct RunConfig {
  std::string case_path;
  std::string out_dir;
  std::vector<std::string> formats;  ///< empty -> text
  std::string variant = "m1";
  ScedConfig sced;
  int jobs = 1;
  bool pseudo = true;  ///< procedure-b: apply pseudo emergency limits
};

std::string fmt1(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

bool wants(const RunConfig& rc, const std::string& format) {
  if (rc.formats.empty()) return format == "text";
  return std::find(rc.formats.begin(), rc.formats.end(), format) != rc.formats.end();
}

// Artifacts land in --out as files; without --out they stream to stdout
// under a marker line.
void emit(const RunConfig& rc, const std::string& name, const std::string& content) {
  if (rc.out_dir.empty()) {
    std::cout << "# ---- " << name << " ----\n" << content;
    return;
  }
  std::filesystem::create_directories(rc.out_dir);
  std::ofstream out(std::filesystem::path(rc.out_dir) / name, std::ios::binary);
  if (!out) throw Error("cannot write '" + name + "' under '" + rc.out_dir + "'");
  out << content;
}

NetworkModel load_model(const RunConfig& rc) {
  std::vector<std::string> warnings;
  NetworkModel model = load_case(rc.case_path, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  return model;
}

ScedConfig sced_config(const RunConfig& rc) {
  ScedConfig cfg = rc.sced;
  cfg.variant = sced_variant_from_string(rc.variant);
  cfg.jobs = rc.jobs;
  cfg.validate();
  return cfg;
}

RtcaOptions rtca_options(const RunConfig& rc) {
  RtcaOptions ro;
  ro.retain_loading_fraction = rc.sced.pctc / 100.0;
  ro.jobs = rc.jobs;
  return ro;
}

void print_violations(std::ostream& os, const std::vector<FlowViolation>& violations,
                      const char* rating_name) {
  if (violations.empty()) {
    os << "no " << rating_name << "-rating violations\n";
    return;
  }
  os << violations.size() << " " << rating_name << "-rating violation"
     << (violations.size() == 1 ? "" : "s") << ":\n";
  for (const FlowViolation& v : violations) {
    os << "  branch " << v.branch_id << ": " << fmt1(v.flow_mva) << " / "
       << fmt1(v.rating_mva) << " MVA (+" << fmt1(v.overload_mva) << ", "
       << fmt1(v.overload_pct) << "%)\n";
  }
}

int run_pf(const RunConfig& rc) {
  const NetworkModel model = load_model(rc);
  const PowerFlowSolution sol = solve_ac(model);
  if (wants(rc, "text")) {
    std::ostringstream os;
    os << "power flow converged in " << sol.iterations << " iterations (max mismatch "
       << std::scientific << std::setprecision(2) << sol.max_mismatch_pu << " pu)\n";
    os << "slack injection " << fmt1(sol.slack_p_mw) << " MW / " << fmt1(sol.slack_q_mvar)
       << " MVar\n\n";
    os << "branch    from ->   to      P_from      Q_from        S     rating   load%\n";
    for (int e = 0; e < (int)model.branches.size(); ++e) {
      const Branch& br = model.branches[e];
      if (!br.in_service) continue;
      os << std::setw(6) << br.id << std::setw(8) << br.from_bus << "  -> " << std::setw(4)
         << br.to_bus << std::setw(12) << fmt1(sol.p_from[e]) << std::setw(12)
         << fmt1(sol.q_from[e]) << std::setw(9) << fmt1(sol.s_flow[e]) << std::setw(11)
         << fmt1(br.rate_normal);
      if (br.rate_normal > 0)
        os << std::setw(8) << fmt1(100.0 * sol.s_flow[e] / br.rate_normal);
      os << "\n";
    }
    os << "\n";
    print_violations(os, check_violations(sol, model, RatingKind::Normal), "normal");
    emit(rc, "pf.txt", os.str());
  }
  if (wants(rc, "csv")) {
    emit(rc, "pf_bus.csv", solution_bus_csv(sol, model));
    emit(rc, "pf_branch.csv", solution_branch_csv(sol, model));
  }
  if (wants(rc, "json")) emit(rc, "pf.json", solution_json(sol, model));
  return 0;
}

int run_rtca_cmd(const RunConfig& rc) {
  const NetworkModel model = load_model(rc);
  const PowerFlowSolution base = solve_ac(model);
  const CaReport ca = run_rtca(model, base, rtca_options(rc));
  if (wants(rc, "text")) {
    std::ostringstream os;
    os << "contingency analysis: " << ca.cases_evaluated << " cases, "
       << ca.nonconverged.size() << " non-converged\n";
    os << ca.violations.size() << " post-contingency violations on "
       << ca.critical_contingencies.size() << " critical outages, total "
       << fmt1(ca.total_violation_mva) << " MVA\n";
    for (const ViolationRecord& v : ca.violations) {
      os << "  outage " << v.contingency_id << " -> branch " << v.branch_id << ": "
         << fmt1(v.flow_mva) << " / " << fmt1(v.rate_emergency) << " MVA (+"
         << fmt1(v.overload_mva) << ", " << fmt1(v.overload_pct) << "%)\n";
    }
    if (!ca.nonconverged.empty()) {
      os << "non-converged outages:";
      for (int id : ca.nonconverged) os << " " << id;
      os << "\n";
    }
    emit(rc, "rtca.txt", os.str());
  }
  if (wants(rc, "csv")) emit(rc, "rtca.csv", ca_report_csv(ca));
  if (wants(rc, "json")) emit(rc, "rtca.json", ca_report_json(ca));
  return 0;
}

int run_cts_cmd(const RunConfig& rc) {
  const ScedConfig cfg = sced_config(rc);
  const NetworkModel model = load_model(rc);
  const PowerFlowSolution base = solve_ac(model);
  const CaReport ca = run_rtca(model, base, rtca_options(rc));
  CtsOptions co;
  co.top_k = cfg.top_k;
  co.cts_rank = cfg.cts_rank;
  co.jobs = rc.jobs;
  const CtsReport cts = run_cts(model, base, ca, co);
  if (wants(rc, "text")) {
    std::ostringstream os;
    if (cts.contingencies.empty()) os << "no post-contingency violations; nothing to switch\n";
    for (const ContingencyCts& c : cts.contingencies) {
      os << "outage " << c.contingency_id << ": " << fmt1(c.original_violation_mva)
         << " MVA violated, " << c.ranked.size() << " candidates evaluated\n";
      for (int r = 0; r < (int)c.top.size(); ++r) {
        os << "  #" << (r + 1) << " open branch " << c.top[r].switch_branch << ": -"
           << fmt1(c.top[r].violation_reduction_mva) << " MVA ("
           << fmt1(c.top[r].reduction_pct) << "%)\n";
      }
      if (c.top.empty()) os << "  no pareto-improving switch found\n";
    }
    if (!cts.tau.empty()) {
      os << "mean reduction by rank:";
      for (int r = 0; r < (int)cts.tau.size(); ++r)
        os << " #" << (r + 1) << " " << fmt1(cts.tau[r]) << "%";
      os << "\n";
    }
    for (const PseudoLimit& pl : cts.pseudo_limits) {
      os << "pseudo limit: outage " << pl.contingency_id << " branch " << pl.branch_id
         << ": " << fmt1(pl.actual_limit_mw) << " -> " << fmt1(pl.pseudo_limit_mw)
         << " MW (rank " << pl.cts_rank_used << ", switch " << pl.switch_branch << ")\n";
    }
    emit(rc, "cts.txt", os.str());
  }
  if (wants(rc, "csv")) emit(rc, "cts.csv", cts_report_csv(cts));
  if (wants(rc, "json")) emit(rc, "cts.json", cts_report_json(cts));
  return 0;
}

int run_sced_cmd(const RunConfig& rc) {
  const ScedConfig cfg = sced_config(rc);
  const NetworkModel model = load_model(rc);
  const PowerFlowSolution base = solve_ac(model);
  const CaReport ca = run_rtca(model, base, rtca_options(rc));
  const auto constraints = select_network_constraints(model, base, ca, cfg);
  const ScedProblem prob = build_sced(model, base, constraints, cfg);
  const ScedSolution sol = solve_sced(model, base, prob);
  if (sol.status != lp::LpStatus::Optimal) {
    std::string rows;
    for (const std::string& r : sol.infeasible_rows)
      rows += (rows.empty() ? "" : ", ") + r;
    throw Error("dispatch " + lp::to_string(sol.status) +
                (rows.empty() ? "" : " (" + rows + ")"));
  }
  const MarketReport market = settle(model, prob, sol);

  if (wants(rc, "text")) {
    std::ostringstream os;
    os << "variant " << to_string(cfg.variant) << ": " << constraints.size()
       << " network constraints (" << sol.binding.size() << " binding), LP "
       << sol.lp_rows << "x" << sol.lp_cols << ", " << sol.lp_iterations
       << " simplex iterations\n";
    os << "total cost " << fmt1(sol.total_cost) << " $/h (energy " << fmt1(sol.energy_cost)
       << ", reserve " << fmt1(sol.reserve_cost) << ", congestion "
       << fmt1(sol.congestion_cost) << ")\n";
    os << "energy price " << fmt1(sol.energy_price) << " $/MWh, average LMP "
       << fmt1(market.average_lmp) << " $/MWh\n\n";
    os << "unit     bus     p_init   dispatch    reserve\n";
    for (const Generator& g : model.generators) {
      const auto r = sol.reserve.find(g.id);
      os << std::setw(4) << g.id << std::setw(8) << g.bus << std::setw(11)
         << fmt1(g.online ? g.p_initial : 0.0) << std::setw(11)
         << fmt1(sol.dispatch.at(g.id)) << std::setw(11)
         << fmt1(r == sol.reserve.end() ? 0.0 : r->second) << (g.online ? "" : "   offline")
         << "\n";
    }
    if (!sol.binding.empty()) {
      os << "\nbinding constraints:\n";
      for (int ci = 0; ci < (int)constraints.size(); ++ci) {
        const std::string name = constraints[ci].name();
        if (std::find(sol.binding.begin(), sol.binding.end(), name) == sol.binding.end())
          continue;
        os << "  " << name << ": " << fmt1(sol.constraint_flows[ci]) << " / "
           << fmt1(constraints[ci].limit_mw) << " MW, dual "
           << fmt1(sol.constraint_duals[ci]) << " $/MWh\n";
      }
    }
    os << "\nload payment " << fmt1(market.load_payment) << " $/h, revenue "
       << fmt1(market.generator_revenue) << ", rent " << fmt1(market.generator_rent)
       << ", congestion revenue " << fmt1(market.congestion_revenue) << "\n";
    emit(rc, "sced.txt", os.str());
  }
  if (wants(rc, "csv")) {
    emit(rc, "sced_dispatch.csv", sced_dispatch_csv(sol, model));
    emit(rc, "sced_duals.csv", sced_duals_csv(sol, prob));
    emit(rc, "market.csv", market_report_csv(market, model));
  }
  if (wants(rc, "json")) {
    emit(rc, "sced.json", sced_solution_json(sol, prob, model));
    emit(rc, "market.json", market_report_json(market, model));
  }
  return 0;
}

int run_procedure(const RunConfig& rc, bool procedure_b) {
  PipelineConfig pc;
  pc.sced = sced_config(rc);
  pc.jobs = rc.jobs;
  if (procedure_b) pc.sced.use_pseudo_limits = rc.pseudo;
  const NetworkModel model = load_model(rc);
  const PipelineReport report =
      procedure_b ? run_procedure_b(model, pc) : run_procedure_a(model, pc);
  const std::string tag = procedure_b ? "procedure_b" : "procedure_a";
  if (wants(rc, "text")) emit(rc, tag + ".txt", pipeline_summary_text(report, model));
  if (wants(rc, "csv")) {
    emit(rc, tag + "_costs.csv", congestion_plot_csv(report));
    emit(rc, tag + "_payments.csv", payment_plot_csv(report));
    emit(rc, tag + "_dispatch.csv", sced_dispatch_csv(report.sced, model));
  }
  if (wants(rc, "json")) emit(rc, tag + ".json", pipeline_report_json(report, model));
  return 0;
}

int run_compare(const RunConfig& rc) {
  PipelineConfig pa;
  pa.sced = sced_config(rc);
  pa.jobs = rc.jobs;
  PipelineConfig pb = pa;
  pb.sced.use_pseudo_limits = true;
  const NetworkModel model = load_model(rc);
  const PipelineReport a = run_procedure_a(model, pa);
  const PipelineReport b = run_procedure_b(model, pb);

  struct Row {
    const char* metric;
    double sced, esced;
  };
  const std::vector<Row> rows = {
      {"total_cost", a.sced.total_cost, b.sced.total_cost},
      {"energy_cost", a.sced.energy_cost, b.sced.energy_cost},
      {"reserve_cost", a.sced.reserve_cost, b.sced.reserve_cost},
      {"congestion_cost", a.sced.congestion_cost, b.sced.congestion_cost},
      {"load_payment", a.market.load_payment, b.market.load_payment},
      {"generator_revenue", a.market.generator_revenue, b.market.generator_revenue},
      {"generator_rent", a.market.generator_rent, b.market.generator_rent},
      {"congestion_revenue", a.market.congestion_revenue, b.market.congestion_revenue},
      {"average_lmp", a.market.average_lmp, b.market.average_lmp},
      {"pre_violation_mva", a.pre_violation_mva, b.pre_violation_mva},
      {"post_violation_mva", a.post_violation_mva, b.post_violation_mva},
  };
  if (wants(rc, "text")) {
    std::ostringstream os;
    os << "SCED (procedure A) vs E-SCED (procedure B) on " << rc.case_path << "\n\n";
    os << std::left << std::setw(22) << "metric" << std::right << std::setw(14) << "SCED"
       << std::setw(14) << "E-SCED" << std::setw(14) << "delta" << "\n";
    for (const Row& r : rows) {
      os << std::left << std::setw(22) << r.metric << std::right << std::setw(14)
         << fmt1(r.sced) << std::setw(14) << fmt1(r.esced) << std::setw(14)
         << fmt1(r.esced - r.sced) << "\n";
    }
    emit(rc, "compare.txt", os.str());
  }
  if (wants(rc, "csv")) {
    std::ostringstream os;
    os.precision(17);
    os << "metric,sced,esced,delta\n";
    for (const Row& r : rows)
      os << r.metric << "," << r.sced << "," << r.esced << "," << (r.esced - r.sced) << "\n";
    emit(rc, "compare.csv", os.str());
  }
  if (wants(rc, "json")) {
    nlohmann::json j;
    j["procedure_a"] = nlohmann::json::parse(pipeline_report_json(a, model));
    j["procedure_b"] = nlohmann::json::parse(pipeline_report_json(b, model));
    auto& deltas = j["deltas"];
    for (const Row& r : rows)
      deltas[r.metric] = {{"sced", r.sced}, {"esced", r.esced}, {"delta", r.esced - r.sced}};
    emit(rc, "compare.json", j.dump(2) + "\n");
  }
  return 0;
}

void add_common_options(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--case", rc.case_path, "network case file (.m or .json)")
      ->required()
      ->type_name("FILE");
  cmd->add_option("--out", rc.out_dir,
                  "output directory; artifacts become files instead of stdout")
      ->envname("GRIDSCED_OUTPUT_DIR")
      ->type_name("DIR");
  cmd->add_option("--format", rc.formats, "output formats (default: text)")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->type_name("FMT");
  cmd->add_option("--jobs", rc.jobs, "worker threads for contingency scans")
      ->check(CLI::PositiveNumber);
  cmd->configurable();
}

void add_dispatch_options(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--variant", rc.variant, "network model variant (m1..m5)")
      ->check(CLI::IsMember({"m1", "m2", "m3", "m4", "m5"}, CLI::ignore_case));
  cmd->add_option("--pct", rc.sced.pct, "base constraint threshold, % of normal rating")
      ->check(CLI::Range(1e-9, 100.0));
  cmd->add_option("--pctc", rc.sced.pctc,
                  "contingency constraint threshold, % of emergency rating")
      ->check(CLI::Range(1e-9, 100.0));
  cmd->add_option("--interval", rc.sced.interval_minutes, "dispatch interval, minutes")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cts-rank", rc.sced.cts_rank, "switching rank behind pseudo limits")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--top-k", rc.sced.top_k, "switching actions kept per contingency")
      ->check(CLI::PositiveNumber);
  const std::map<std::string, ReserveRule> rules = {
      {"largest-unit", ReserveRule::LargestUnit},
      {"fixed-mw", ReserveRule::FixedMw},
      {"fraction-of-load", ReserveRule::FractionOfLoad}};
  cmd->add_option("--reserve-rule", rc.sced.reserve_rule, "reserve requirement rule")
      ->transform(CLI::CheckedTransformer(rules, CLI::ignore_case));
  cmd->add_option("--reserve-value", rc.sced.reserve_value,
                  "MW (fixed-mw) or % of load (fraction-of-load)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"power-flow, contingency, switching and dispatch toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "defaults file (TOML key=value, [subcommand] sections)");

  RunConfig rc;
  CLI::App* pf = app.add_subcommand("pf", "solve the base-case AC power flow");
  add_common_options(pf, rc);
  CLI::App* rtca = app.add_subcommand("rtca", "N-1 contingency scan");
  add_common_options(rtca, rc);
  add_dispatch_options(rtca, rc);
  CLI::App* cts = app.add_subcommand("cts", "rank corrective switching actions");
  add_common_options(cts, rc);
  add_dispatch_options(cts, rc);
  CLI::App* sced = app.add_subcommand("sced", "security-constrained economic dispatch");
  add_common_options(sced, rc);
  add_dispatch_options(sced, rc);
  CLI::App* proc_a = app.add_subcommand("procedure-a", "monitor, dispatch, re-check");
  add_common_options(proc_a, rc);
  add_dispatch_options(proc_a, rc);
  CLI::App* proc_b =
      app.add_subcommand("procedure-b", "procedure A with a corrective-switching stage");
  add_common_options(proc_b, rc);
  add_dispatch_options(proc_b, rc);
  proc_b->add_flag("--pseudo,!--no-pseudo", rc.pseudo,
                   "apply pseudo emergency limits from switching (default on)");
  CLI::App* compare =
      app.add_subcommand("compare", "run both procedures and tabulate the deltas");
  add_common_options(compare, rc);
  add_dispatch_options(compare, rc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(pf)) return run_pf(rc);
    if (app.got_subcommand(rtca)) return run_rtca_cmd(rc);
    if (app.got_subcommand(cts)) return run_cts_cmd(rc);
    if (app.got_subcommand(sced)) return run_sced_cmd(rc);
    if (app.got_subcommand(proc_a)) return run_procedure(rc, false);
    if (app.got_subcommand(proc_b)) return run_procedure(rc, true);
    if (app.got_subcommand(compare)) return run_compare(rc);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
