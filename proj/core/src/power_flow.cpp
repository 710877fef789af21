#include "gridsced/power_flow.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "json.hpp"

#include "gridsced/common.hpp"
#include "gridsced/graph.hpp"

namespace gridsced {

namespace {

using Complex = std::complex<double>;
using SparseComplex = Eigen::SparseMatrix<Complex>;
using SparseReal = Eigen::SparseMatrix<double>;

struct BranchAdmittance {
  Complex yff, yft, ytf, ytt;
};

BranchAdmittance branch_admittance(const Branch& br) {
  const Complex ys = 1.0 / Complex(br.r, br.x);
  const Complex ysh(0.0, br.b_charging / 2.0);
  const double tau = br.tap_ratio == 0.0 ? 1.0 : br.tap_ratio;
  const Complex tap = std::polar(tau, deg_to_rad(br.phase_shift));
  BranchAdmittance y;
  y.ytt = ys + ysh;
  y.yff = y.ytt / (tau * tau);
  y.yft = -ys / std::conj(tap);
  y.ytf = -ys / tap;
  return y;
}

bool branch_active(const Branch& br, const std::set<int>& out_of_service) {
  return br.in_service && out_of_service.count(br.id) == 0;
}

SparseComplex build_ybus(const NetworkModel& model, const std::set<int>& out_of_service) {
  const int n = (int)model.buses.size();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(model.buses.size() + 4 * model.branches.size());
  for (const Branch& br : model.branches) {
    if (!branch_active(br, out_of_service)) continue;
    const int f = model.bus_offset(br.from_bus);
    const int t = model.bus_offset(br.to_bus);
    const BranchAdmittance y = branch_admittance(br);
    trips.emplace_back(f, f, y.yff);
    trips.emplace_back(f, t, y.yft);
    trips.emplace_back(t, f, y.ytf);
    trips.emplace_back(t, t, y.ytt);
  }
  for (int i = 0; i < n; ++i) {
    const Bus& bus = model.buses[i];
    if (bus.shunt_g != 0.0 || bus.shunt_b != 0.0)
      trips.emplace_back(i, i, Complex(bus.shunt_g, bus.shunt_b) / model.base_mva);
  }
  SparseComplex ybus(n, n);
  ybus.setFromTriplets(trips.begin(), trips.end());
  return ybus;
}

}  // namespace

PowerFlowSolution solve_ac(const NetworkModel& model, const std::set<int>& out_of_service,
                           const PowerFlowSolution* warm_start, const PowerFlowOptions& options) {
  const int n = (int)model.buses.size();
  const double base = model.base_mva;

  // Live buses belong to an island with a slack; other islands must be dead.
  const std::vector<int> island = island_membership(model, out_of_service);
  const int num_islands = island.empty() ? 0 : 1 + *std::max_element(island.begin(), island.end());
  std::vector<char> island_has_slack(num_islands, 0);
  for (int i = 0; i < n; ++i)
    if (model.buses[i].kind == BusKind::Slack) island_has_slack[island[i]] = 1;
  std::vector<char> live(n, 0);
  std::vector<int> stranded;
  for (int i = 0; i < n; ++i) {
    const Bus& bus = model.buses[i];
    if (island_has_slack[island[i]]) {
      live[i] = 1;
    } else if (bus.p_load != 0.0 || bus.q_load != 0.0 || bus.shunt_g != 0.0 ||
               bus.shunt_b != 0.0 || !model.generators_at_bus(i).empty()) {
      stranded.push_back(bus.id);
    }
  }
  if (!stranded.empty()) {
    std::ostringstream msg;
    msg << "no slack bus reaches isolated buses:";
    for (int id : stranded) msg << " " << id;
    throw Error(msg.str());
  }

  // Bus classification. A PV bus with no online generator has no reactive
  // support and is treated as PQ; Q-limit switching later demotes PV buses
  // whose aggregate generator limits are hit.
  std::vector<char> is_slack(n, 0), is_pv(n, 0);
  std::vector<double> p_spec(n, 0.0), q_spec(n, 0.0);  // pu
  std::vector<double> q_min_pu(n, 0.0), q_max_pu(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const Bus& bus = model.buses[i];
    p_spec[i] = -bus.p_load / base;
    q_spec[i] = -bus.q_load / base;
    if (!live[i]) continue;
    const auto& gens = model.generators_at_bus(i);
    for (int gi : gens) {
      const Generator& g = model.generators[gi];
      p_spec[i] += g.p_initial / base;
      q_min_pu[i] += g.q_min / base;
      q_max_pu[i] += g.q_max / base;
    }
    if (bus.kind == BusKind::Slack)
      is_slack[i] = 1;
    else if (bus.kind == BusKind::PV && !gens.empty())
      is_pv[i] = 1;
  }

  PowerFlowSolution sol;
  sol.out_of_service = out_of_service;
  sol.v_mag.assign(n, 1.0);
  sol.v_ang.assign(n, 0.0);
  if (warm_start) {
    if ((int)warm_start->v_mag.size() != n)
      throw Error("warm start has wrong bus count");
    sol.v_mag = warm_start->v_mag;
    sol.v_ang = warm_start->v_ang;
  }
  for (int i = 0; i < n; ++i) {
    if (!live[i]) {
      sol.v_mag[i] = 1.0;
      sol.v_ang[i] = 0.0;
    } else if (is_slack[i]) {
      sol.v_mag[i] = model.buses[i].v_setpoint;
      sol.v_ang[i] = 0.0;
    } else if (is_pv[i]) {
      sol.v_mag[i] = model.buses[i].v_setpoint;
    }
  }

  const SparseComplex ybus = build_ybus(model, out_of_service);
  Eigen::VectorXd p_calc(n), q_calc(n);
  auto compute_injections = [&]() {
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = std::polar(sol.v_mag[i], sol.v_ang[i]);
    const Eigen::VectorXcd s = v.cwiseProduct((ybus * v).conjugate());
    p_calc = s.real();
    q_calc = s.imag();
  };

  // One pass of PV -> PQ demotion at a violated aggregate Q limit. Returns
  // true when any bus switched; switches are one-way within a solve, so the
  // pass only runs once the iterate is close enough (mismatch below the
  // gate) for the computed reactive output to mean anything. The
  // at-convergence re-check below still guarantees final Q feasibility.
  double latest_mismatch = kInfinity;
  constexpr double kQLimitGate = 1e-2;  // pu
  auto apply_q_limits = [&]() {
    if (!options.enforce_q_limits || latest_mismatch > kQLimitGate) return false;
    bool switched = false;
    for (int i = 0; i < n; ++i) {
      if (!is_pv[i]) continue;
      const double q_gen = q_calc(i) + model.buses[i].q_load / base;
      if (q_gen > q_max_pu[i]) {
        is_pv[i] = 0;
        q_spec[i] = q_max_pu[i] - model.buses[i].q_load / base;
        switched = true;
      } else if (q_gen < q_min_pu[i]) {
        is_pv[i] = 0;
        q_spec[i] = q_min_pu[i] - model.buses[i].q_load / base;
        switched = true;
      }
    }
    return switched;
  };

  // Full-dimension Newton system: unknowns [dtheta; dvmag], one P and one Q
  // row per bus. Pinned quantities (slack angle/voltage, PV voltage, dead
  // buses) get identity rows so the system stays square.
  const auto p_active = [&](int i) { return live[i] && !is_slack[i]; };
  const auto q_active = [&](int i) { return live[i] && !is_slack[i] && !is_pv[i]; };

  // The Jacobian's sparsity pattern is fixed while the PV/PQ split stands,
  // so the symbolic analysis is reused across iterations and redone only
  // after a Q-limit demotion changes the active rows. Pivoting is kept
  // nearly static: the Jacobian diagonal is structurally strong, threshold
  // pivoting roughly doubles the fill-in, and a poor pivot can only cost
  // extra iterations — convergence is certified by the mismatch, not the
  // factorization.
  Eigen::SparseLU<SparseReal> lu;
  lu.setPivotThreshold(1e-3);
  bool analyzed = false;
  std::vector<Eigen::Triplet<double>> trips;
  int iter = 0;
  while (true) {
    compute_injections();
    double max_mis = 0.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
      if (p_active(i)) {
        rhs(i) = p_spec[i] - p_calc(i);
        max_mis = std::max(max_mis, std::abs(rhs(i)));
      }
      if (q_active(i)) {
        rhs(n + i) = q_spec[i] - q_calc(i);
        max_mis = std::max(max_mis, std::abs(rhs(n + i)));
      }
    }
    sol.max_mismatch_pu = max_mis;
    latest_mismatch = max_mis;

    if (max_mis <= options.tolerance) {
      if (apply_q_limits()) {  // re-check with the demoted bus
        analyzed = false;
        continue;
      }
      sol.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    trips.clear();
    for (int k = 0; k < ybus.outerSize(); ++k) {
      for (SparseComplex::InnerIterator it(ybus, k); it; ++it) {
        const int i = (int)it.row();
        if (i == k) continue;
        const double g = it.value().real();
        const double b = it.value().imag();
        const double vi = sol.v_mag[i], vk = sol.v_mag[k];
        const double aik = sol.v_ang[i] - sol.v_ang[k];
        const double c = std::cos(aik), s = std::sin(aik);
        if (p_active(i)) {
          trips.emplace_back(i, k, vi * vk * (g * s - b * c));  // dP/dtheta_k
          trips.emplace_back(i, n + k, vi * (g * c + b * s));   // dP/dV_k
        }
        if (q_active(i)) {
          trips.emplace_back(n + i, k, -vi * vk * (g * c + b * s));  // dQ/dtheta_k
          trips.emplace_back(n + i, n + k, vi * (g * s - b * c));    // dQ/dV_k
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      const double gii = ybus.coeff(i, i).real();
      const double bii = ybus.coeff(i, i).imag();
      const double vi = sol.v_mag[i];
      if (p_active(i)) {
        trips.emplace_back(i, i, -q_calc(i) - bii * vi * vi);
        trips.emplace_back(i, n + i, p_calc(i) / vi + gii * vi);
      } else {
        trips.emplace_back(i, i, 1.0);
      }
      if (q_active(i)) {
        trips.emplace_back(n + i, i, p_calc(i) - gii * vi * vi);
        trips.emplace_back(n + i, n + i, q_calc(i) / vi - bii * vi);
      } else {
        trips.emplace_back(n + i, n + i, 1.0);
      }
    }
    SparseReal jac(2 * n, 2 * n);
    jac.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success)
      throw NumericError("power flow Jacobian is singular");
    const Eigen::VectorXd dx = lu.solve(rhs);
    for (int i = 0; i < n; ++i) {
      sol.v_ang[i] += dx(i);
      sol.v_mag[i] += dx(n + i);
    }
    ++iter;
    if (apply_q_limits()) analyzed = false;
  }
  sol.iterations = iter;
  if (!sol.converged) {
    std::ostringstream msg;
    msg << "power flow did not converge in " << options.max_iterations
        << " iterations (mismatch " << sol.max_mismatch_pu << " pu)";
    throw NumericError(msg.str());
  }

  // Branch flows in physical units; the monitored end is whichever carries
  // the larger apparent power.
  const int m = (int)model.branches.size();
  sol.p_from.assign(m, 0.0);
  sol.q_from.assign(m, 0.0);
  sol.p_to.assign(m, 0.0);
  sol.q_to.assign(m, 0.0);
  sol.s_flow.assign(m, 0.0);
  sol.monitored_end.assign(m, 0);
  for (int e = 0; e < m; ++e) {
    const Branch& br = model.branches[e];
    if (!branch_active(br, out_of_service)) continue;
    const int f = model.bus_offset(br.from_bus);
    const int t = model.bus_offset(br.to_bus);
    if (!live[f]) continue;
    const BranchAdmittance y = branch_admittance(br);
    const Complex vf = std::polar(sol.v_mag[f], sol.v_ang[f]);
    const Complex vt = std::polar(sol.v_mag[t], sol.v_ang[t]);
    const Complex sf = vf * std::conj(y.yff * vf + y.yft * vt) * base;
    const Complex st = vt * std::conj(y.ytf * vf + y.ytt * vt) * base;
    sol.p_from[e] = sf.real();
    sol.q_from[e] = sf.imag();
    sol.p_to[e] = st.real();
    sol.q_to[e] = st.imag();
    const double sf_mva = std::abs(sf), st_mva = std::abs(st);
    sol.s_flow[e] = std::max(sf_mva, st_mva);
    sol.monitored_end[e] = sf_mva >= st_mva ? 0 : 1;
  }

  // Generator outputs: fixed at p_initial except at slack buses, where the
  // online units split the balancing residual equally.
  compute_injections();
  sol.p_gen.assign(model.generators.size(), 0.0);
  for (int gi = 0; gi < (int)model.generators.size(); ++gi) {
    const Generator& g = model.generators[gi];
    if (g.online) sol.p_gen[gi] = g.p_initial;
  }
  for (int i = 0; i < n; ++i) {
    if (!is_slack[i]) continue;
    const Bus& bus = model.buses[i];
    sol.slack_p_mw += p_calc(i) * base + bus.p_load;
    sol.slack_q_mvar += q_calc(i) * base + bus.q_load;
    const auto& gens = model.generators_at_bus(i);
    if (gens.empty()) continue;
    double residual = p_calc(i) * base + bus.p_load;
    for (int gi : gens) residual -= model.generators[gi].p_initial;
    for (int gi : gens) sol.p_gen[gi] += residual / (double)gens.size();
  }
  return sol;
}

std::vector<FlowViolation> check_violations(const PowerFlowSolution& solution,
                                            const NetworkModel& model, RatingKind which) {
  std::vector<FlowViolation> out;
  for (int e = 0; e < (int)model.branches.size(); ++e) {
    const Branch& br = model.branches[e];
    if (!branch_active(br, solution.out_of_service)) continue;
    const double rating = which == RatingKind::Normal ? br.rate_normal : br.rate_emergency;
    if (rating <= 0.0) continue;  // unrated branches are unmonitored
    const double flow = solution.s_flow[e];
    if (flow > rating) {
      FlowViolation v;
      v.branch_id = br.id;
      v.flow_mva = flow;
      v.rating_mva = rating;
      v.overload_mva = flow - rating;
      v.overload_pct = 100.0 * v.overload_mva / rating;
      out.push_back(v);
    }
  }
  return out;
}

std::string solution_bus_csv(const PowerFlowSolution& solution, const NetworkModel& model) {
  std::ostringstream os;
  os.precision(17);
  os << "bus_id,kind,v_mag_pu,v_ang_deg,p_load_mw,q_load_mvar\n";
  for (int i = 0; i < (int)model.buses.size(); ++i) {
    const Bus& bus = model.buses[i];
    os << bus.id << "," << to_string(bus.kind) << "," << solution.v_mag[i] << ","
       << rad_to_deg(solution.v_ang[i]) << "," << bus.p_load << "," << bus.q_load << "\n";
  }
  return os.str();
}

std::string solution_branch_csv(const PowerFlowSolution& solution, const NetworkModel& model) {
  std::ostringstream os;
  os.precision(17);
  os << "branch_id,from_bus,to_bus,in_service,p_from_mw,q_from_mvar,p_to_mw,q_to_mvar,"
        "s_flow_mva,monitored_end\n";
  for (int e = 0; e < (int)model.branches.size(); ++e) {
    const Branch& br = model.branches[e];
    const bool active = branch_active(br, solution.out_of_service);
    os << br.id << "," << br.from_bus << "," << br.to_bus << "," << (active ? 1 : 0) << ","
       << solution.p_from[e] << "," << solution.q_from[e] << "," << solution.p_to[e] << ","
       << solution.q_to[e] << "," << solution.s_flow[e] << ","
       << (solution.monitored_end[e] == 0 ? "from" : "to") << "\n";
  }
  return os.str();
}

std::string solution_json(const PowerFlowSolution& solution, const NetworkModel& model) {
  nlohmann::json j;
  j["converged"] = solution.converged;
  j["iterations"] = solution.iterations;
  j["max_mismatch_pu"] = solution.max_mismatch_pu;
  j["slack"] = {{"p_mw", solution.slack_p_mw}, {"q_mvar", solution.slack_q_mvar}};
  j["out_of_service"] = solution.out_of_service;
  auto& buses = j["buses"] = nlohmann::json::array();
  for (int i = 0; i < (int)model.buses.size(); ++i) {
    buses.push_back({{"id", model.buses[i].id},
                     {"v_mag_pu", solution.v_mag[i]},
                     {"v_ang_deg", rad_to_deg(solution.v_ang[i])}});
  }
  auto& branches = j["branches"] = nlohmann::json::array();
  for (int e = 0; e < (int)model.branches.size(); ++e) {
    const Branch& br = model.branches[e];
    branches.push_back({{"id", br.id},
                        {"in_service", branch_active(br, solution.out_of_service)},
                        {"p_from_mw", solution.p_from[e]},
                        {"q_from_mvar", solution.q_from[e]},
                        {"p_to_mw", solution.p_to[e]},
                        {"q_to_mvar", solution.q_to[e]},
                        {"s_flow_mva", solution.s_flow[e]},
                        {"monitored_end", solution.monitored_end[e] == 0 ? "from" : "to"}});
  }
  return j.dump(2) + "\n";
}

}  // namespace gridsced
