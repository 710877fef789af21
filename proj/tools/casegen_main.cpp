// Deterministic synthetic network generator. Produces a transmission-style
// ring with chords and a few double-circuit corridors, then calibrates
// branch ratings against the solved base case so that the network is
// moderately loaded in N-0 and a handful of single outages overload the
// surviving twin circuits. Output is a standard case file, reproducible
// bit-for-bit from (--buses, --seed).

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <string>

#include "CLI11.hpp"

#include "gridsced/case_io.hpp"
#include "gridsced/matpower.hpp"
#include "gridsced/power_flow.hpp"
#include "gridsced/sensitivity.hpp"

using namespace gridsced;

namespace {

double tidy(double x) { return std::ceil(x * 10.0) / 10.0; }

NetworkModel synth(int n, unsigned seed, bool raw = false) {
  std::mt19937 rng(seed);
  auto uni = [&](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };

  NetworkModel m;
  m.base_mva = 100.0;

  double total_load = 0.0;
  for (int i = 1; i <= n; ++i) {
    Bus b;
    b.id = i;
    b.kind = BusKind::PQ;
    b.p_load = std::floor(uni(6.0, 18.0) * 10.0) / 10.0;
    b.q_load = std::floor(b.p_load * uni(0.15, 0.3) * 10.0) / 10.0;
    b.v_setpoint = 1.0;
    b.base_kv = 230.0;
    b.v_max = 1.1;
    b.v_min = 0.9;
    total_load += b.p_load;
    m.buses.push_back(b);
  }

  int next_branch = 1;
  const auto add_branch = [&](int f, int t, double x, double b_chg) {
    Branch br;
    br.id = next_branch++;
    br.from_bus = f;
    br.to_bus = t;
    br.x = x;
    br.r = x / 8.0;
    br.b_charging = b_chg;
    m.branches.push_back(br);
  };
  // Backbone ring, with every 100th segment built as a double circuit.
  // Those twin pairs are where the engineered N-1 overloads live.
  std::set<int> corridor;
  for (int i = 1; i <= n; ++i) {
    const int t = i % n + 1;
    const double x = uni(0.015, 0.03);
    add_branch(i, t, x, 0.04);
    if (i % 100 == 25) {
      corridor.insert(next_branch - 1);
      add_branch(i, t, x * uni(0.95, 1.05), 0.04);
      corridor.insert(next_branch - 1);
    }
  }
  // Chords meshing the ring.
  const int stride = std::max(3, n / 16);
  for (int i = 1; i <= n; i += 3) {
    const int t = (i - 1 + stride) % n + 1;
    add_branch(i, t, uni(0.04, 0.08), 0.06);
  }

  // A unit every 8 buses; prices climb around the ring so power has a
  // reason to travel.
  int next_gen = 1;
  for (int i = 1; i <= n; i += 8) {
    Generator g;
    g.id = next_gen++;
    g.bus = i;
    const double share = total_load / ((n + 7) / 8);
    g.p_max = std::floor(share * uni(1.3, 1.9));
    g.p_min = std::floor(0.1 * g.p_max * 10.0) / 10.0;
    g.q_max = std::floor(0.6 * g.p_max);
    g.q_min = -g.q_max;
    g.ramp_rate = std::floor(0.03 * g.p_max * 10.0) / 10.0;  // 30% of Pmax in 10 min
    g.online = true;
    m.generators.push_back(g);

    Bus& bus = m.buses[i - 1];
    bus.kind = i == 1 ? BusKind::Slack : BusKind::PV;
    bus.v_setpoint = std::floor(uni(1.0, 1.03) * 1000.0) / 1000.0;

    const double pos = (double)(i - 1) / n;
    const double bp = std::floor((11.0 + 20.0 * pos + uni(0.0, 3.0)) * 10.0) / 10.0;
    CostCurve curve;
    curve.owner = g.id;
    curve.start_mw = g.p_min;
    curve.start_cost = std::floor(0.85 * bp * g.p_min * 10.0) / 10.0;
    double prev_mw = g.p_min;
    double prev_cost = curve.start_cost;
    const double marks[3][2] = {{0.5, 0.85}, {0.8, 1.0}, {1.0, 1.25}};
    for (const auto& mark : marks) {
      const double end = mark[0] * g.p_max;
      prev_cost += mark[1] * bp * (end - prev_mw);
      curve.segments.push_back({end, mark[1] * bp});
      prev_mw = end;
    }
    m.cost_curves.push_back(curve);
  }

  // Open at a merit-order dispatch against the load plus a loss allowance,
  // the way a dispatch interval inherits the previous economic point.
  // Redispatch then responds to network constraints instead of re-sorting
  // the whole fleet by price.
  double remaining = 1.02 * total_load;
  for (const Generator& g : m.generators) remaining -= g.p_min;
  std::vector<std::tuple<double, int, double>> stack;  // price, gen offset, width
  for (int gi = 0; gi < (int)m.generators.size(); ++gi) {
    double lo = m.generators[gi].p_min;
    for (const CostSegment& seg : m.cost_curves[gi].segments) {
      stack.emplace_back(seg.price, gi, seg.end_mw - lo);
      lo = seg.end_mw;
    }
  }
  std::sort(stack.begin(), stack.end());
  for (Generator& g : m.generators) g.p_initial = g.p_min;
  for (const auto& [price, gi, width] : stack) {
    if (remaining <= 0.0) break;
    const double take = std::min(width, remaining);
    m.generators[gi].p_initial += take;
    remaining -= take;
  }
  for (Generator& g : m.generators)
    g.p_initial = std::floor(g.p_initial * 10.0) / 10.0;
  m.finalize();
  if (raw) return m;

  // Calibrate ratings from the solved base plus a DC single-outage screen.
  // Stock branches get emergency ratings above their worst estimated
  // post-outage flow, so the only credible overloads are the corridor
  // twins, which are undersized on purpose: when one circuit trips, the
  // survivor lands near 118% of its emergency rating.
  const PowerFlowSolution sol = solve_ac(m);
  const PtdfMatrix ptdf = build_ptdf(m);
  const LodfMatrix lodf = build_lodf(ptdf, m);
  const int nb = (int)m.branches.size();
  std::vector<double> worst(nb, 0.0);  // post-outage MVA estimate
  for (int k = 0; k < nb; ++k) {
    for (int c = 0; c < nb; ++c) {
      if (c == k || lodf.islanding[c]) continue;
      const double p = sol.p_from[k] + lodf.entries(k, c) * sol.p_from[c];
      worst[k] = std::max(worst[k], std::hypot(p, sol.q_from[k]));
    }
  }
  for (int e = 0; e < nb; ++e) {
    Branch& br = m.branches[e];
    if (corridor.count(br.id)) {
      br.rate_emergency = std::max(25.0, tidy(0.85 * worst[e]));
      br.rate_normal = tidy(br.rate_emergency / 1.15);
    } else {
      br.rate_normal = std::max(25.0, tidy(uni(1.25, 1.6) * sol.s_flow[e]));
      br.rate_emergency = std::max(tidy(1.15 * br.rate_normal), tidy(1.18 * worst[e]));
    }
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic synthetic network generator"};
  int buses = 300;
  unsigned seed = 7;
  std::string name = "synth";
  std::string out;
  bool raw = false;
  app.add_option("--buses", buses, "network size")->check(CLI::Range(10, 5000));
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--name", name, "case function name");
  app.add_option("--out", out, "output .m path (default: stdout)");
  app.add_flag("--raw", raw, "skip rating calibration and checks (debugging)");
  CLI11_PARSE(app, argc, argv);

  try {
    const NetworkModel model = synth(buses, seed, raw);
    if (raw) {
      const std::string text = write_matpower_case(model, name);
      if (out.empty()) {
        std::cout << text;
      } else {
        std::ofstream file(out, std::ios::binary);
        file << text;
      }
      return 0;
    }
    const std::string text = write_matpower_case(model, name);

    // Round-trip and convergence sanity before anything is written.
    const NetworkModel reread = parse_matpower_case(text);
    const PowerFlowSolution check = solve_ac(reread);
    std::cerr << "generated " << reread.num_buses() << " buses, "
              << reread.branches.size() << " branches, " << reread.generators.size()
              << " units, " << reread.total_load_mw() << " MW load; power flow converged in "
              << check.iterations << " iterations\n";

    if (out.empty()) {
      std::cout << text;
    } else {
      std::ofstream file(out, std::ios::binary);
      if (!file) throw Error("cannot write '" + out + "'");
      file << text;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
