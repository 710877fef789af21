#include "gridsced/sensitivity.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <sstream>

#include "gridsced/common.hpp"
#include "gridsced/graph.hpp"

namespace gridsced {

namespace {

bool branch_active(const Branch& br, const std::set<int>& out_of_service) {
  return br.in_service && out_of_service.count(br.id) == 0;
}

// Buses below 500 fit a dense factorization comfortably; above that the
// nodal matrix is factored sparse and only the inverse columns that the
// PTDF needs are materialized (which is all of them, but via sparse solves).
constexpr int kDenseBusLimit = 500;

}  // namespace

double dc_susceptance(const Branch& br) {
  const double tau = br.tap_ratio == 0.0 ? 1.0 : br.tap_ratio;
  return 1.0 / (br.x * tau);
}

PtdfMatrix build_ptdf(const NetworkModel& model, int slack_bus_id,
                      const std::set<int>& out_of_service) {
  const int n = (int)model.buses.size();
  const int m = (int)model.branches.size();

  if (slack_bus_id < 0) {
    for (const Bus& bus : model.buses)
      if (bus.kind == BusKind::Slack) {
        slack_bus_id = bus.id;
        break;
      }
    if (slack_bus_id < 0) throw Error("model has no slack bus");
  }
  const int slack = model.bus_offset(slack_bus_id);

  std::vector<std::pair<int, int>> edges;
  for (const Branch& br : model.branches)
    if (branch_active(br, out_of_service))
      edges.emplace_back(model.bus_offset(br.from_bus), model.bus_offset(br.to_bus));
  const std::vector<int> comp = connected_components(n, edges);
  for (int i = 0; i < n; ++i)
    if (comp[i] != comp[slack])
      throw Error("network is disconnected; PTDF is undefined");

  // Reduced susceptance Laplacian with the slack row/column removed.
  const auto red = [&](int offset) { return offset < slack ? offset : offset - 1; };
  std::vector<Eigen::Triplet<double>> trips;
  for (const Branch& br : model.branches) {
    if (!branch_active(br, out_of_service)) continue;
    const int f = model.bus_offset(br.from_bus);
    const int t = model.bus_offset(br.to_bus);
    const double b = dc_susceptance(br);
    if (f != slack) trips.emplace_back(red(f), red(f), b);
    if (t != slack) trips.emplace_back(red(t), red(t), b);
    if (f != slack && t != slack) {
      trips.emplace_back(red(f), red(t), -b);
      trips.emplace_back(red(t), red(f), -b);
    }
  }
  Eigen::SparseMatrix<double> b_red(n - 1, n - 1);
  b_red.setFromTriplets(trips.begin(), trips.end());

  // Theta response: theta(:, i) solves B_red theta = e_i, giving bus angles
  // for 1 pu injected at i and withdrawn at the slack. Slack row/col zero.
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n, n);
  if (n > 1) {
    Eigen::MatrixXd x_red;
    if (n < kDenseBusLimit) {
      const Eigen::MatrixXd b_dense(b_red);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(b_dense);
      if (ldlt.info() != Eigen::Success)
        throw NumericError("susceptance matrix factorization failed");
      x_red = ldlt.solve(Eigen::MatrixXd::Identity(n - 1, n - 1));
    } else {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(b_red);
      if (ldlt.info() != Eigen::Success)
        throw NumericError("susceptance matrix factorization failed");
      x_red = ldlt.solve(Eigen::MatrixXd::Identity(n - 1, n - 1));
    }
    for (int i = 0; i < n; ++i) {
      if (i == slack) continue;
      for (int j = 0; j < n; ++j) {
        if (j == slack) continue;
        theta(i, j) = x_red(red(i), red(j));
      }
    }
  }

  PtdfMatrix ptdf;
  ptdf.slack = slack_bus_id;
  ptdf.out_of_service = out_of_service;
  ptdf.entries = Eigen::MatrixXd::Zero(m, n);
  for (int e = 0; e < m; ++e) {
    const Branch& br = model.branches[e];
    if (!branch_active(br, out_of_service)) continue;
    const int f = model.bus_offset(br.from_bus);
    const int t = model.bus_offset(br.to_bus);
    ptdf.entries.row(e) = dc_susceptance(br) * (theta.row(f) - theta.row(t));
  }
  return ptdf;
}

LodfMatrix build_lodf(const PtdfMatrix& ptdf, const NetworkModel& model) {
  const int n = (int)model.buses.size();
  const int m = (int)model.branches.size();

  std::vector<std::pair<int, int>> edges;
  std::vector<int> edge_branch;
  for (int e = 0; e < m; ++e) {
    const Branch& br = model.branches[e];
    if (!branch_active(br, ptdf.out_of_service)) continue;
    edges.emplace_back(model.bus_offset(br.from_bus), model.bus_offset(br.to_bus));
    edge_branch.push_back(e);
  }
  std::vector<char> is_bridge(m, 0);
  for (int idx : find_bridges(n, edges)) is_bridge[edge_branch[idx]] = 1;

  LodfMatrix lodf;
  lodf.entries = Eigen::MatrixXd::Zero(m, m);
  lodf.islanding.assign(m, 0);
  for (int c = 0; c < m; ++c) {
    const Branch& br = model.branches[c];
    if (!branch_active(br, ptdf.out_of_service) || is_bridge[c]) {
      lodf.islanding[c] = 1;
      continue;
    }
    const int f = model.bus_offset(br.from_bus);
    const int t = model.bus_offset(br.to_bus);
    const double self = ptdf.transfer(c, f, t);
    const double denom = 1.0 - self;
    if (std::abs(denom) < 1e-9) {
      // Numerically a bridge even though the graph says otherwise.
      lodf.islanding[c] = 1;
      continue;
    }
    lodf.entries.col(c) = (ptdf.entries.col(f) - ptdf.entries.col(t)) / denom;
    lodf.entries(c, c) = -1.0;
  }
  return lodf;
}

Eigen::VectorXd dc_flows(const PtdfMatrix& ptdf, const NetworkModel& model,
                         const Eigen::VectorXd& injections_mw) {
  const int n = (int)model.buses.size();
  const int m = (int)model.branches.size();
  if (injections_mw.size() != n) throw Error("injection vector has wrong bus count");

  // Phase shifters enter as fixed transfers across their terminals plus a
  // constant term on their own flow: f = b(theta_f - theta_t - shift).
  Eigen::VectorXd inj = injections_mw;
  Eigen::VectorXd own_shift = Eigen::VectorXd::Zero(m);
  for (int e = 0; e < m; ++e) {
    const Branch& br = model.branches[e];
    if (!branch_active(br, ptdf.out_of_service) || br.phase_shift == 0.0) continue;
    const double p_shift = dc_susceptance(br) * deg_to_rad(br.phase_shift) * model.base_mva;
    inj(model.bus_offset(br.from_bus)) += p_shift;
    inj(model.bus_offset(br.to_bus)) -= p_shift;
    own_shift(e) = p_shift;
  }
  return ptdf.entries * inj - own_shift;
}

std::string ptdf_csv(const PtdfMatrix& ptdf, const NetworkModel& model) {
  std::ostringstream os;
  os.precision(17);
  os << "branch_id";
  for (const Bus& bus : model.buses) os << ",bus_" << bus.id;
  os << "\n";
  for (int e = 0; e < ptdf.entries.rows(); ++e) {
    os << model.branches[e].id;
    for (int i = 0; i < ptdf.entries.cols(); ++i) os << "," << ptdf.entries(e, i);
    os << "\n";
  }
  return os.str();
}

std::string lodf_csv(const LodfMatrix& lodf, const NetworkModel& model) {
  std::ostringstream os;
  os.precision(17);
  os << "branch_id";
  for (const Branch& br : model.branches)
    os << ",out_" << br.id;
  os << "\n";
  for (int k = 0; k < lodf.entries.rows(); ++k) {
    os << model.branches[k].id;
    for (int c = 0; c < lodf.entries.cols(); ++c) {
      if (lodf.islanding[c])
        os << ",islanding";
      else
        os << "," << lodf.entries(k, c);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace gridsced
