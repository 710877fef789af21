#include "gridsced/sced.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "gridsced/common.hpp"
#include "gridsced/graph.hpp"

namespace gridsced {

ScedVariant sced_variant_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t += (char)std::tolower((unsigned char)c);
  if (t == "m1") return ScedVariant::M1;
  if (t == "m2") return ScedVariant::M2;
  if (t == "m3") return ScedVariant::M3;
  if (t == "m4") return ScedVariant::M4;
  if (t == "m5") return ScedVariant::M5;
  throw Error("unknown SCED variant '" + s + "' (expected m1..m5)");
}

std::string to_string(ScedVariant variant) {
  switch (variant) {
    case ScedVariant::M1: return "M1";
    case ScedVariant::M2: return "M2";
    case ScedVariant::M3: return "M3";
    case ScedVariant::M4: return "M4";
    case ScedVariant::M5: return "M5";
  }
  return "?";
}

void ScedConfig::validate() const {
  if (!(pct > 0.0 && pct <= 100.0) || !(pctc > 0.0 && pctc <= 100.0))
    throw Error("constraint thresholds must lie in (0, 100] percent");
  if (!(interval_minutes > 0.0)) throw Error("dispatch interval must be positive");
  if (cts_rank < 1) throw Error("cts_rank is 1-based and must be >= 1");
  if (top_k < 1) throw Error("top_k must be >= 1");
  if (reserve_value < 0.0) throw Error("reserve requirement cannot be negative");
}

double ScedConfig::reserve_requirement_mw(const NetworkModel& model) const {
  switch (reserve_rule) {
    case ReserveRule::FixedMw:
      return reserve_value;
    case ReserveRule::FractionOfLoad:
      return reserve_value / 100.0 * model.total_load_mw();
    case ReserveRule::LargestUnit: {
      double largest = 0.0;
      for (const Generator& g : model.generators)
        if (g.online) largest = std::max(largest, g.p_max);
      return largest;
    }
  }
  return 0.0;
}

std::string NetworkConstraint::name() const {
  if (kind == Kind::Base) return "base:" + std::to_string(branch_id);
  return "ctg:" + std::to_string(contingency_id) + ":" + std::to_string(branch_id);
}

namespace {

// Limit conversion that stays usable when the reactive flow swamps the
// rating: a sliver of MW room instead of an imaginary limit.
double guarded_mw_limit(double rate, double q) {
  if (std::abs(q) >= rate) return 0.01 * rate;
  return std::sqrt(rate * rate - q * q);
}

bool uses_accurate_limits(ScedVariant v) {
  return v == ScedVariant::M1 || v == ScedVariant::M4;
}

bool is_btheta(ScedVariant v) { return v == ScedVariant::M4 || v == ScedVariant::M5; }

}  // namespace

std::vector<NetworkConstraint> select_network_constraints(const NetworkModel& model,
                                                          const PowerFlowSolution& base,
                                                          const CaReport& ca,
                                                          const ScedConfig& config) {
  config.validate();
  if (!base.converged) throw Error("constraint selection requires a converged base case");

  std::vector<NetworkConstraint> out;
  std::vector<int> by_id;
  for (int e = 0; e < (int)model.branches.size(); ++e) by_id.push_back(e);
  std::sort(by_id.begin(), by_id.end(),
            [&](int a, int b) { return model.branches[a].id < model.branches[b].id; });
  for (int e : by_id) {
    const Branch& br = model.branches[e];
    if (!br.in_service || br.rate_normal <= 0.0 || base.out_of_service.count(br.id)) continue;
    if (base.s_flow[e] < config.pct / 100.0 * br.rate_normal) continue;
    NetworkConstraint nc;
    nc.kind = NetworkConstraint::Kind::Base;
    nc.branch_id = br.id;
    nc.q_mvar = base.q_monitored(e);
    nc.limit_mw = guarded_mw_limit(br.rate_normal, nc.q_mvar);
    nc.direction = base.p_from[e] >= 0.0 ? +1 : -1;
    nc.anchor_mw = base.p_from[e];
    out.push_back(nc);
  }

  // Loadings arrive ordered by (contingency, branch); CA violations clear the
  // pctc threshold by definition, so the threshold test alone covers them.
  for (const BranchLoading& load : ca.loadings) {
    if (load.s_mva < config.pctc / 100.0 * load.rate_emergency) continue;
    const int e = model.branch_offset(load.branch_id);
    NetworkConstraint nc;
    nc.kind = NetworkConstraint::Kind::Contingency;
    nc.branch_id = load.branch_id;
    nc.contingency_id = load.contingency_id;
    if (uses_accurate_limits(config.variant)) {
      nc.q_mvar = load.q_mvar;  // post-contingency reactive flow
    } else {
      nc.q_mvar = base.q_monitored(e);  // base-case reactive flow
    }
    nc.limit_mw = guarded_mw_limit(load.rate_emergency, nc.q_mvar);
    nc.direction = load.p_from_mw >= 0.0 ? +1 : -1;
    nc.anchor_mw = load.p_from_mw;
    out.push_back(nc);
  }
  return out;
}

std::vector<NetworkConstraint> apply_pseudo_limits(std::vector<NetworkConstraint> constraints,
                                                   const std::vector<PseudoLimit>& pseudo,
                                                   std::vector<std::string>* warnings) {
  for (const PseudoLimit& pl : pseudo) {
    bool matched = false;
    for (NetworkConstraint& nc : constraints) {
      if (nc.kind != NetworkConstraint::Kind::Contingency) continue;
      if (nc.contingency_id != pl.contingency_id || nc.branch_id != pl.branch_id) continue;
      nc.limit_mw = pl.pseudo_limit_mw;
      nc.is_pseudo = true;
      matched = true;
    }
    if (!matched && warnings) {
      warnings->push_back("pseudo limit for contingency " +
                          std::to_string(pl.contingency_id) + " branch " +
                          std::to_string(pl.branch_id) + " matches no selected constraint");
    }
  }
  return constraints;
}

namespace {

struct CostPiece {
  double width = 0.0;
  double price = 0.0;
};

// Marginal-price pieces of a generator's convex cost over [lb, ub], plus the
// fixed cost of sitting at lb. Stretches of [lb, ub] outside the curve's
// domain extend the nearest marginal price (zero below a non-negative first
// segment).
std::pair<std::vector<CostPiece>, double> cost_pieces(const NetworkModel& model,
                                                      const Generator& g, double lb,
                                                      double ub) {
  std::vector<CostPiece> pieces;
  const CostCurve* curve = model.cost_curve_for(g.id);
  if (!curve) {
    if (ub > lb) pieces.push_back({ub - lb, 0.0});
    return {pieces, 0.0};
  }
  const double fixed = curve->cost_at(lb);
  if (ub <= lb) return {pieces, fixed};

  std::vector<std::pair<std::pair<double, double>, double>> spans;  // ([a,b], price)
  if (!curve->segments.empty()) {
    spans.push_back({{-kInfinity, curve->start_mw}, std::min(0.0, curve->segments.front().price)});
    double prev = curve->start_mw;
    for (const CostSegment& seg : curve->segments) {
      spans.push_back({{prev, seg.end_mw}, seg.price});
      prev = seg.end_mw;
    }
    spans.push_back({{prev, kInfinity}, curve->segments.back().price});
  } else {
    spans.push_back({{-kInfinity, kInfinity}, 0.0});
  }
  for (const auto& [range, price] : spans) {
    const double lo = std::max(range.first, lb);
    const double hi = std::min(range.second, ub);
    if (hi - lo > 1e-12) pieces.push_back({hi - lo, price});
  }
  return {pieces, fixed};
}

}  // namespace

ScedProblem build_sced(const NetworkModel& model, const PowerFlowSolution& base,
                       const std::vector<NetworkConstraint>& constraints,
                       const ScedConfig& config) {
  config.validate();
  ScedProblem prob;
  prob.config = config;
  prob.constraints = constraints;

  // Dispatch block: per online unit, one column per marginal-cost piece over
  // the ramp-feasible envelope plus one reserve column. The unit's output is
  // floor + sum of its piece columns, so the columns are shared by every
  // variant and only the network rows differ.
  for (int gi = 0; gi < (int)model.generators.size(); ++gi)
    if (model.generators[gi].online) prob.online_gens.push_back(gi);

  const double span = config.interval_minutes;
  std::vector<double> ceil_mw(prob.online_gens.size(), 0.0);
  for (int k = 0; k < (int)prob.online_gens.size(); ++k) {
    const Generator& g = model.generators[prob.online_gens[k]];
    const double ramp_room = g.ramp_rate * span;  // infinite ramp -> no envelope
    const double lb = std::isfinite(ramp_room) ? std::max(g.p_min, g.p_initial - ramp_room)
                                               : g.p_min;
    const double ub = std::isfinite(ramp_room) ? std::min(g.p_max, g.p_initial + ramp_room)
                                               : g.p_max;
    prob.dispatch_floor_mw.push_back(lb);
    ceil_mw[k] = ub;
    auto [pieces, fixed] = cost_pieces(model, g, lb, ub);
    prob.fixed_cost += fixed;
    std::vector<int> segs;
    for (int s = 0; s < (int)pieces.size(); ++s) {
      segs.push_back(prob.lp.add_variable(
          "p:" + std::to_string(g.id) + ":s" + std::to_string(s), 0.0, pieces[s].width,
          pieces[s].price));
    }
    prob.seg_vars.push_back(std::move(segs));
    const double r_ramp = g.ramp_rate * 10.0;  // 10-minute reserve capability
    double r_cap = std::max(0.0, g.p_max - lb);
    if (std::isfinite(r_ramp)) r_cap = std::min(r_cap, r_ramp);
    prob.reserve_vars.push_back(
        prob.lp.add_variable("r:" + std::to_string(g.id), 0.0, r_cap, g.reserve_price));
  }

  const int ng = (int)prob.online_gens.size();
  double floor_total = 0.0;
  for (double f : prob.dispatch_floor_mw) floor_total += f;

  const bool btheta = is_btheta(config.variant) && !constraints.empty();
  const bool incremental =
      config.variant == ScedVariant::M1 || config.variant == ScedVariant::M2;

  // Balance / nodal-balance rows.
  std::map<int, std::vector<int>> theta_base, theta_ctg;  // topology -> per-bus vars
  if (!btheta) {
    double target = 0.0;
    if (incremental) {
      for (int k = 0; k < ng; ++k) target += model.generators[prob.online_gens[k]].p_initial;
    } else {
      target = model.total_load_mw();
    }
    prob.balance_row = prob.lp.add_row("balance", lp::Sense::Equal, target - floor_total);
    for (int k = 0; k < ng; ++k)
      for (int v : prob.seg_vars[k]) prob.lp.add_term(prob.balance_row, v, 1.0);
  } else {
    std::vector<int> ctg_ids;
    for (const NetworkConstraint& nc : constraints)
      if (nc.kind == NetworkConstraint::Kind::Contingency) ctg_ids.push_back(nc.contingency_id);
    std::sort(ctg_ids.begin(), ctg_ids.end());
    ctg_ids.erase(std::unique(ctg_ids.begin(), ctg_ids.end()), ctg_ids.end());

    int slack_offset = -1;
    for (int i = 0; i < (int)model.buses.size(); ++i)
      if (model.buses[i].kind == BusKind::Slack) {
        slack_offset = i;
        break;
      }
    if (slack_offset < 0) throw Error("B-theta SCED needs a slack bus");

    const auto add_topology = [&](int ctg_id) {
      const std::string suffix = ctg_id < 0 ? "" : ":c" + std::to_string(ctg_id);
      std::vector<int> theta(model.buses.size());
      for (int i = 0; i < (int)model.buses.size(); ++i) {
        const bool pinned = i == slack_offset;
        theta[i] = prob.lp.add_variable("th:" + std::to_string(model.buses[i].id) + suffix,
                                        pinned ? 0.0 : -kInfinity, pinned ? 0.0 : kInfinity,
                                        0.0);
      }
      // Nodal balance, oriented generation - outflow = load. The slack row
      // of a contingency topology is implied by the base rows and dropped,
      // which also keeps the dual of each row well-defined.
      std::vector<int> rows(model.buses.size(), -1);
      std::vector<double> shift_rhs(model.buses.size(), 0.0);
      std::vector<std::vector<std::pair<int, double>>> theta_terms(model.buses.size());
      for (const Branch& br : model.branches) {
        if (!br.in_service || base.out_of_service.count(br.id) || br.id == ctg_id) continue;
        const int f = model.bus_offset(br.from_bus);
        const int t = model.bus_offset(br.to_bus);
        const double w = model.base_mva * dc_susceptance(br);
        const double shift = w * deg_to_rad(br.phase_shift);
        // flow f->t = w (th_f - th_t) - shift; subtracts from f's balance,
        // adds to t's.
        theta_terms[f].emplace_back(theta[f], -w);
        theta_terms[f].emplace_back(theta[t], +w);
        shift_rhs[f] -= shift;
        theta_terms[t].emplace_back(theta[f], +w);
        theta_terms[t].emplace_back(theta[t], -w);
        shift_rhs[t] += shift;
      }
      for (int i = 0; i < (int)model.buses.size(); ++i) {
        if (ctg_id >= 0 && i == slack_offset) continue;
        double rhs = model.buses[i].p_load + shift_rhs[i];
        for (int k = 0; k < ng; ++k)
          if (model.bus_offset(model.generators[prob.online_gens[k]].bus) == i)
            rhs -= prob.dispatch_floor_mw[k];
        rows[i] = prob.lp.add_row("nodal:" + std::to_string(model.buses[i].id) + suffix,
                                  lp::Sense::Equal, rhs);
        for (int k = 0; k < ng; ++k)
          if (model.bus_offset(model.generators[prob.online_gens[k]].bus) == i)
            for (int v : prob.seg_vars[k]) prob.lp.add_term(rows[i], v, 1.0);
        for (const auto& [v, w] : theta_terms[i]) prob.lp.add_term(rows[i], v, w);
      }
      if (ctg_id < 0) {
        prob.balance_row = rows[slack_offset];
        prob.nodal_rows = rows;
        theta_base[-1] = theta;
      } else {
        prob.ctg_nodal_rows[ctg_id] = rows;
        theta_ctg[ctg_id] = theta;
      }
    };
    add_topology(-1);
    for (int cid : ctg_ids) add_topology(cid);
  }

  // Per-unit capacity coupling and the system reserve requirement.
  for (int k = 0; k < ng; ++k) {
    const Generator& g = model.generators[prob.online_gens[k]];
    const int row = prob.lp.add_row("cap:" + std::to_string(g.id), lp::Sense::LessEqual,
                                    g.p_max - prob.dispatch_floor_mw[k]);
    for (int v : prob.seg_vars[k]) prob.lp.add_term(row, v, 1.0);
    prob.lp.add_term(row, prob.reserve_vars[k], 1.0);
  }
  const int reserve_row = prob.lp.add_row("reserve", lp::Sense::GreaterEqual,
                                          config.reserve_requirement_mw(model));
  for (int k = 0; k < ng; ++k) prob.lp.add_term(reserve_row, prob.reserve_vars[k], 1.0);

  // Network rows.
  if (!constraints.empty() && !btheta) {
    prob.ptdf = std::make_shared<PtdfMatrix>(build_ptdf(model, -1, base.out_of_service));
    prob.lodf = std::make_shared<LodfMatrix>(build_lodf(*prob.ptdf, model));

    // Flow seen with every unit at its floor: the constant part of each
    // constraint's linearization.
    Eigen::VectorXd floor_inj = Eigen::VectorXd::Zero(model.buses.size());
    if (!incremental) {
      for (int i = 0; i < (int)model.buses.size(); ++i)
        floor_inj(i) = -model.buses[i].p_load;
      for (int k = 0; k < ng; ++k)
        floor_inj(model.bus_offset(model.generators[prob.online_gens[k]].bus)) +=
            prob.dispatch_floor_mw[k];
    }
    const Eigen::VectorXd floor_flows =
        incremental ? Eigen::VectorXd() : dc_flows(*prob.ptdf, model, floor_inj);

    for (int ci = 0; ci < (int)constraints.size(); ++ci) {
      const NetworkConstraint& nc = constraints[ci];
      const int e = model.branch_offset(nc.branch_id);
      const bool ctg = nc.kind == NetworkConstraint::Kind::Contingency;
      int c = -1;
      double lodf_kc = 0.0;
      if (ctg) {
        c = model.branch_offset(nc.contingency_id);
        if (prob.lodf->islanding[c])
          throw Error("constraint " + nc.name() + " references an islanding outage");
        lodf_kc = prob.lodf->entries(e, c);
      }
      const auto sens = [&](int bus_offset) {
        double w = prob.ptdf->entries(e, bus_offset);
        if (ctg) w += lodf_kc * prob.ptdf->entries(c, bus_offset);
        return w;
      };
      double constant = 0.0;
      if (incremental) {
        if (!ctg) {
          constant = nc.anchor_mw;  // AC base flow
        } else if (config.variant == ScedVariant::M1) {
          constant = nc.anchor_mw;  // AC post-contingency flow
        } else {
          constant = base.p_from[e] + lodf_kc * base.p_from[c];  // LODF estimate
        }
        for (int k = 0; k < ng; ++k) {
          const Generator& g = model.generators[prob.online_gens[k]];
          constant += sens(model.bus_offset(g.bus)) *
                      (prob.dispatch_floor_mw[k] - g.p_initial);
        }
      } else {
        constant = floor_flows(e);
        if (ctg) constant += lodf_kc * floor_flows(c);
      }

      const double d = nc.direction;
      const int row =
          prob.lp.add_row(nc.name(), lp::Sense::LessEqual, nc.limit_mw - d * constant);
      for (int k = 0; k < ng; ++k) {
        const double w = sens(model.bus_offset(model.generators[prob.online_gens[k]].bus));
        for (int v : prob.seg_vars[k]) prob.lp.add_term(row, v, d * w);
      }
      prob.constraint_rows.push_back(row);
      prob.constraint_flow_offsets.push_back(constant);
    }
  } else if (btheta) {
    for (const NetworkConstraint& nc : constraints) {
      const Branch& br = model.branch(nc.branch_id);
      const int f = model.bus_offset(br.from_bus);
      const int t = model.bus_offset(br.to_bus);
      const double w = model.base_mva * dc_susceptance(br);
      const double shift = w * deg_to_rad(br.phase_shift);
      const std::vector<int>& theta = nc.kind == NetworkConstraint::Kind::Base
                                          ? theta_base[-1]
                                          : theta_ctg[nc.contingency_id];
      const double d = nc.direction;
      const int row =
          prob.lp.add_row(nc.name(), lp::Sense::LessEqual, nc.limit_mw + d * shift);
      prob.lp.add_term(row, theta[f], d * w);
      prob.lp.add_term(row, theta[t], -d * w);
      prob.constraint_rows.push_back(row);
      prob.constraint_flow_offsets.push_back(-shift);
    }
  }
  return prob;
}

ScedSolution solve_sced(const NetworkModel& model, const PowerFlowSolution& base,
                        const ScedProblem& prob) {
  const lp::LpSolution lps = lp::solve_lp(prob.lp);

  ScedSolution out;
  out.status = lps.status;
  out.lp_rows = prob.lp.num_rows();
  out.lp_cols = prob.lp.num_variables();
  out.lp_nonzeros = prob.lp.num_nonzeros();
  out.lp_iterations = lps.iterations;
  if (lps.status == lp::LpStatus::Infeasible) {
    out.infeasible_rows = lps.infeasible_rows;
    return out;
  }
  if (lps.status == lp::LpStatus::Unbounded) {
    out.infeasible_rows.push_back("unbounded via " + lps.unbounded_ray);
    return out;
  }

  for (const Generator& g : model.generators) out.dispatch[g.id] = 0.0;
  const int ng = (int)prob.online_gens.size();
  for (int k = 0; k < ng; ++k) {
    const Generator& g = model.generators[prob.online_gens[k]];
    double p = prob.dispatch_floor_mw[k];
    for (int v : prob.seg_vars[k]) p += lps.x(v);
    out.dispatch[g.id] = p;
    // Simplex round-off can leave a basic variable a hair below its bound;
    // reserve is physically non-negative, so clamp the noise here.
    const double r = std::max(0.0, lps.x(prob.reserve_vars[k]));
    out.reserve[g.id] = r;
    out.reserve_cost += g.reserve_price * r;
  }
  out.energy_cost = prob.fixed_cost + (lps.objective_value - out.reserve_cost);
  out.total_cost = out.energy_cost + out.reserve_cost;

  out.energy_price = prob.balance_row >= 0 ? lps.row_duals(prob.balance_row) : 0.0;
  if (!prob.nodal_rows.empty()) {
    // A marginal MW of load at a bus tightens its balance row in every
    // modeled topology, so the bus price is the sum of those duals.
    out.nodal_price.resize(model.buses.size(), 0.0);
    for (int i = 0; i < (int)model.buses.size(); ++i) {
      out.nodal_price[i] = lps.row_duals(prob.nodal_rows[i]);
      for (const auto& [cid, rows] : prob.ctg_nodal_rows)
        if (rows[i] >= 0) out.nodal_price[i] += lps.row_duals(rows[i]);
    }
  }
  for (int ci = 0; ci < (int)prob.constraints.size(); ++ci) {
    const int row = prob.constraint_rows[ci];
    out.constraint_duals.push_back(lps.row_duals(row));
    out.constraint_flows.push_back(prob.constraints[ci].direction * lps.row_activity(row) +
                                   prob.constraint_flow_offsets[ci]);
    const double slack = prob.lp.rhs(row) - lps.row_activity(row);
    if (std::abs(slack) <= 1e-6 * (1.0 + std::abs(prob.lp.rhs(row))))
      out.binding.push_back(prob.constraints[ci].name());
  }

  // Congestion cost is measured against the relaxed dispatch with no
  // network rows; for that benchmark itself it is zero by definition.
  if (prob.constraints.empty()) {
    out.relaxed_total_cost = out.total_cost;
    out.congestion_cost = 0.0;
  } else {
    const ScedProblem relaxed = build_sced(model, base, {}, prob.config);
    const ScedSolution rsol = solve_sced(model, base, relaxed);
    if (rsol.status != lp::LpStatus::Optimal)
      throw NumericError("relaxed dispatch benchmark failed to solve");
    out.relaxed_total_cost = rsol.total_cost;
    out.congestion_cost = out.total_cost - rsol.total_cost;
  }
  return out;
}

std::string sced_dispatch_csv(const ScedSolution& solution, const NetworkModel& model) {
  std::ostringstream os;
  os.precision(17);
  os << "gen_id,bus_id,dispatch_mw,reserve_mw\n";
  for (const Generator& g : model.generators) {
    os << g.id << "," << g.bus << "," << solution.dispatch.at(g.id) << ",";
    const auto r = solution.reserve.find(g.id);
    os << (r == solution.reserve.end() ? 0.0 : r->second) << "\n";
  }
  return os.str();
}

std::string sced_duals_csv(const ScedSolution& solution, const ScedProblem& problem) {
  std::ostringstream os;
  os.precision(17);
  os << "constraint,kind,contingency_id,branch_id,limit_mw,is_pseudo,flow_mw,dual,binding\n";
  for (int ci = 0; ci < (int)problem.constraints.size(); ++ci) {
    const NetworkConstraint& nc = problem.constraints[ci];
    const bool bound = std::find(solution.binding.begin(), solution.binding.end(),
                                 nc.name()) != solution.binding.end();
    os << nc.name() << ","
       << (nc.kind == NetworkConstraint::Kind::Base ? "base" : "contingency") << ","
       << nc.contingency_id << "," << nc.branch_id << "," << nc.limit_mw << ","
       << (nc.is_pseudo ? 1 : 0) << "," << solution.constraint_flows[ci] << ","
       << solution.constraint_duals[ci] << "," << (bound ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string sced_solution_json(const ScedSolution& solution, const ScedProblem& problem,
                               const NetworkModel& model) {
  nlohmann::json j;
  j["status"] = lp::to_string(solution.status);
  j["variant"] = to_string(problem.config.variant);
  j["total_cost"] = solution.total_cost;
  j["energy_cost"] = solution.energy_cost;
  j["reserve_cost"] = solution.reserve_cost;
  j["congestion_cost"] = solution.congestion_cost;
  j["relaxed_total_cost"] = solution.relaxed_total_cost;
  j["energy_price"] = solution.energy_price;
  j["lp"] = {{"rows", solution.lp_rows},
             {"columns", solution.lp_cols},
             {"nonzeros", solution.lp_nonzeros},
             {"iterations", solution.lp_iterations}};
  if (!solution.infeasible_rows.empty()) j["infeasible_rows"] = solution.infeasible_rows;
  auto& dispatch = j["dispatch"] = nlohmann::json::array();
  for (const Generator& g : model.generators) {
    const auto r = solution.reserve.find(g.id);
    dispatch.push_back({{"gen_id", g.id},
                        {"bus_id", g.bus},
                        {"dispatch_mw", solution.dispatch.at(g.id)},
                        {"reserve_mw", r == solution.reserve.end() ? 0.0 : r->second}});
  }
  auto& rows = j["network_constraints"] = nlohmann::json::array();
  for (int ci = 0; ci < (int)problem.constraints.size(); ++ci) {
    const NetworkConstraint& nc = problem.constraints[ci];
    rows.push_back({{"name", nc.name()},
                    {"limit_mw", nc.limit_mw},
                    {"is_pseudo", nc.is_pseudo},
                    {"flow_mw", solution.constraint_flows[ci]},
                    {"dual", solution.constraint_duals[ci]}});
  }
  j["binding"] = solution.binding;
  return j.dump(2) + "\n";
}

}  // namespace gridsced
