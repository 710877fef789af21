#include "gridsced/lp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace gridsced::lp {

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

int LinearProgram::add_variable(std::string name, double lower, double upper, double cost) {
  if (!(lower <= upper))
    throw Error("variable " + name + " has empty bound range");
  if (!std::isfinite(cost))
    throw Error("variable " + name + " has a non-finite cost");
  cols_.push_back({std::move(name), lower, upper, cost});
  return (int)cols_.size() - 1;
}

int LinearProgram::add_row(std::string name, Sense sense, double rhs) {
  if (!std::isfinite(rhs))
    throw Error("row " + name + " has a non-finite rhs");
  rows_.push_back({std::move(name), sense, rhs, {}});
  return (int)rows_.size() - 1;
}

void LinearProgram::add_term(int row, int var, double coefficient) {
  if (row < 0 || row >= num_rows() || var < 0 || var >= num_variables())
    throw Error("LP term references an unknown row or variable");
  if (!std::isfinite(coefficient))
    throw Error("row " + rows_[row].name + " has a non-finite coefficient");
  if (coefficient == 0.0) return;
  rows_[row].terms.emplace_back(var, coefficient);
}

int LinearProgram::num_nonzeros() const {
  int count = 0;
  for (const Row& row : rows_) count += (int)row.terms.size();
  return count;
}

int LinearProgram::row_index(const std::string& name) const {
  for (int i = 0; i < num_rows(); ++i)
    if (rows_[i].name == name) return i;
  return -1;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-10;
constexpr double kRatioTieTol = 1e-9;

enum ColState : char { kBasic, kAtLower, kAtUpper, kFreeNonbasic };

// Bounded-variable primal revised simplex over the standardized system
// [A | I] with one slack per row; infeasible starts get per-row artificial
// columns driven out in phase 1. The basis inverse is kept explicitly and
// updated by rank-1 (product-form) steps with periodic refactorization.
class Simplex {
 public:
  Simplex(const LinearProgram& program, const SolveOptions& options)
      : p_(program), opt_(options), m_(program.num_rows()), nv_(program.num_variables()) {}

  LpSolution run() {
    build_columns();
    crash_basis();

    LpSolution out;
    if (num_artificial_ > 0) {
      phase1_ = true;
      if (!run_phase()) throw NumericError("phase-1 simplex reported unbounded");
      const double infeas = current_objective();
      double bscale = 1.0;
      for (int i = 0; i < m_; ++i) bscale = std::max(bscale, std::abs(p_.rhs(i)));
      if (infeas > 1e-7 * bscale) {
        out.status = LpStatus::Infeasible;
        for (int j = first_artificial_; j < total_; ++j) {
          const double v = value_of(j);
          if (v > 1e-7 * bscale)
            out.infeasible_rows.push_back(p_.row_name(col_entries_[j][0].first));
        }
        finish(out);
        return out;
      }
      // Artificials are pinned at zero for phase 2 so they can never re-enter.
      for (int j = first_artificial_; j < total_; ++j) lower_[j] = upper_[j] = 0.0;
    }

    phase1_ = false;
    if (!run_phase()) {
      out.status = LpStatus::Unbounded;
      out.unbounded_ray = ray_name_;
      finish(out);
      return out;
    }
    out.status = LpStatus::Optimal;
    finish(out);
    return out;
  }

 private:
  const LinearProgram& p_;
  SolveOptions opt_;
  int m_, nv_;
  int total_ = 0;            // structural + slack + artificial columns
  int first_artificial_ = 0;
  int num_artificial_ = 0;

  std::vector<std::vector<std::pair<int, double>>> col_entries_;  // (row, coef)
  std::vector<double> lower_, upper_, cost_;  // phase-2 costs; artificials 0
  std::vector<double> val_;                   // nonbasic resting values
  std::vector<char> state_;
  std::vector<int> basis_;      // column occupying each basis position
  std::vector<int> basis_pos_;  // column -> basis position, -1 if nonbasic
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  bool phase1_ = false;
  int iterations_ = 0;
  int pivots_since_refactor_ = 0;
  std::string ray_name_;

  double phase_cost(int j) const {
    if (phase1_) return j >= first_artificial_ ? 1.0 : 0.0;
    return cost_[j];
  }

  double value_of(int j) const {
    return state_[j] == kBasic ? xb_(basis_pos_[j]) : val_[j];
  }

  double current_objective() const {
    double obj = 0.0;
    for (int j = 0; j < total_; ++j) {
      const double c = phase_cost(j);
      if (c != 0.0) obj += c * value_of(j);
    }
    return obj;
  }

  std::string column_name(int j) const {
    if (j < nv_) return p_.variable_name(j);
    if (j < nv_ + m_) return "slack:" + p_.row_name(j - nv_);
    return "artificial:" + p_.row_name(col_entries_[j][0].first);
  }

  void build_columns() {
    total_ = nv_ + m_;
    col_entries_.assign(total_, {});
    lower_.resize(total_);
    upper_.resize(total_);
    cost_.assign(total_, 0.0);
    for (int j = 0; j < nv_; ++j) {
      lower_[j] = p_.lower_bound(j);
      upper_[j] = p_.upper_bound(j);
      cost_[j] = p_.cost(j);
    }
    for (int i = 0; i < m_; ++i) {
      for (const auto& [var, coef] : p_.row_terms(i)) col_entries_[var].emplace_back(i, coef);
      const int s = nv_ + i;
      col_entries_[s].emplace_back(i, 1.0);
      switch (p_.row_sense(i)) {
        case Sense::LessEqual: lower_[s] = 0.0; upper_[s] = kInf; break;
        case Sense::GreaterEqual: lower_[s] = -kInf; upper_[s] = 0.0; break;
        case Sense::Equal: lower_[s] = 0.0; upper_[s] = 0.0; break;
      }
    }
    // Merge duplicate (row, var) terms so each column has one entry per row.
    for (int j = 0; j < nv_; ++j) {
      auto& col = col_entries_[j];
      std::sort(col.begin(), col.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<std::pair<int, double>> merged;
      for (const auto& e : col) {
        if (!merged.empty() && merged.back().first == e.first)
          merged.back().second += e.second;
        else
          merged.push_back(e);
      }
      col = std::move(merged);
    }
  }

  // Slack-crash start: structurals rest at their nearest finite bound, each
  // row is covered by its slack when the residual fits the slack's range and
  // by a fresh artificial otherwise.
  void crash_basis() {
    val_.assign(total_, 0.0);
    state_.assign(total_, kAtLower);
    for (int j = 0; j < total_; ++j) {
      if (std::isfinite(lower_[j])) {
        val_[j] = lower_[j];
        state_[j] = kAtLower;
      } else if (std::isfinite(upper_[j])) {
        val_[j] = upper_[j];
        state_[j] = kAtUpper;
      } else {
        val_[j] = 0.0;
        state_[j] = kFreeNonbasic;
      }
    }

    Eigen::VectorXd residual(m_);
    for (int i = 0; i < m_; ++i) residual(i) = p_.rhs(i);
    for (int j = 0; j < nv_; ++j) {
      if (val_[j] == 0.0) continue;
      for (const auto& [row, coef] : col_entries_[j]) residual(row) -= coef * val_[j];
    }

    basis_.assign(m_, -1);
    basis_pos_.assign(total_, -1);
    xb_ = Eigen::VectorXd::Zero(m_);
    std::vector<double> diag(m_, 1.0);
    first_artificial_ = total_;
    for (int i = 0; i < m_; ++i) {
      const int s = nv_ + i;
      const double r = residual(i);
      if (r >= lower_[s] - opt_.feasibility_tol && r <= upper_[s] + opt_.feasibility_tol) {
        basis_[i] = s;
        xb_(i) = std::clamp(r, lower_[s], upper_[s]);
      } else {
        const double rest = std::clamp(r, lower_[s], upper_[s]);
        val_[s] = rest;
        state_[s] = rest == lower_[s] ? kAtLower : kAtUpper;
        const double gap = r - rest;
        col_entries_.push_back({{i, gap > 0.0 ? 1.0 : -1.0}});
        lower_.push_back(0.0);
        upper_.push_back(kInf);
        cost_.push_back(0.0);
        val_.push_back(0.0);
        state_.push_back(kBasic);
        diag[i] = gap > 0.0 ? 1.0 : -1.0;
        basis_[i] = total_;
        xb_(i) = std::abs(gap);
        ++total_;
        ++num_artificial_;
      }
      if (basis_[i] < first_artificial_) state_[basis_[i]] = kBasic;
    }
    basis_pos_.resize(total_, -1);
    for (int i = 0; i < m_; ++i) basis_pos_[basis_[i]] = i;

    binv_ = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) binv_(i, i) = diag[i];  // diag(+-1) inverts itself
  }

  void refactorize() {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (const auto& [row, coef] : col_entries_[basis_[i]]) b(row, i) = coef;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    binv_ = lu.inverse();
    if (!binv_.allFinite()) throw NumericError("simplex basis matrix is singular");

    Eigen::VectorXd rhs(m_);
    for (int i = 0; i < m_; ++i) rhs(i) = p_.rhs(i);
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == kBasic || val_[j] == 0.0) continue;
      for (const auto& [row, coef] : col_entries_[j]) rhs(row) -= coef * val_[j];
    }
    xb_ = binv_ * rhs;
    pivots_since_refactor_ = 0;
  }

  // One simplex phase to optimality. Returns false on an unbounded ray
  // (ray_name_ set). Dantzig pricing with a Bland's-rule fallback after a
  // run of non-improving pivots; all ties resolved by lowest column index.
  bool run_phase() {
    const int iter_limit = opt_.iteration_limit > 0
                               ? opt_.iteration_limit
                               : 200 * (m_ + nv_) + 10000;
    bool bland = false;
    int stalled = 0;
    double last_obj = current_objective();

    Eigen::VectorXd cb(m_), y(m_), d(m_);
    while (true) {
      if (iterations_ >= iter_limit)
        throw NumericError("simplex iteration limit reached");
      if (pivots_since_refactor_ >= opt_.refactor_every) refactorize();

      for (int i = 0; i < m_; ++i) cb(i) = phase_cost(basis_[i]);
      y.noalias() = binv_.transpose() * cb;

      // Pricing: most negative reduced-cost direction among eligible columns.
      int enter = -1;
      double best = opt_.optimality_tol;
      int direction = +1;
      for (int j = 0; j < total_; ++j) {
        const char st = state_[j];
        if (st == kBasic) continue;
        if (lower_[j] == upper_[j]) continue;  // fixed columns never enter
        double dj = phase_cost(j);
        for (const auto& [row, coef] : col_entries_[j]) dj -= y(row) * coef;
        double score = 0.0;
        int dir = 0;
        if (st == kAtLower && dj < -opt_.optimality_tol) {
          score = -dj;
          dir = +1;
        } else if (st == kAtUpper && dj > opt_.optimality_tol) {
          score = dj;
          dir = -1;
        } else if (st == kFreeNonbasic && std::abs(dj) > opt_.optimality_tol) {
          score = std::abs(dj);
          dir = dj < 0.0 ? +1 : -1;
        } else {
          continue;
        }
        if (bland) {
          enter = j;
          direction = dir;
          break;
        }
        if (score > best) {
          best = score;
          enter = j;
          direction = dir;
        }
      }
      if (enter < 0) return true;  // phase optimal

      d.setZero();
      for (const auto& [row, coef] : col_entries_[enter]) d += coef * binv_.col(row);

      // Ratio test: how far the entering column can move before a basic
      // variable hits a bound or the entering variable spans its own range.
      double t_best = kInf;
      int leave = -1;
      double pivot_abs = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double h = direction * d(i);
        double t;
        if (h > kPivotTol) {
          const double lb = lower_[basis_[i]];
          if (!std::isfinite(lb)) continue;
          t = (xb_(i) - lb) / h;
        } else if (h < -kPivotTol) {
          const double ub = upper_[basis_[i]];
          if (!std::isfinite(ub)) continue;
          t = (ub - xb_(i)) / (-h);
        } else {
          continue;
        }
        if (t < 0.0) t = 0.0;  // degenerate beyond-bound drift
        const double habs = std::abs(h);
        if (t < t_best - kRatioTieTol) {
          t_best = t;
          leave = i;
          pivot_abs = habs;
        } else if (t <= t_best + kRatioTieTol && leave >= 0) {
          if (habs > pivot_abs * (1.0 + 1e-12) ||
              (habs >= pivot_abs * (1.0 - 1e-12) && basis_[i] < basis_[leave])) {
            leave = i;
            pivot_abs = habs;
            t_best = std::min(t_best, t);
          }
        }
      }
      const double own_range = upper_[enter] - lower_[enter];
      if (!std::isfinite(t_best) && !std::isfinite(own_range)) {
        ray_name_ = column_name(enter);
        return false;
      }

      if (own_range <= t_best) {
        // Bound flip: the entering column crosses its whole range without
        // displacing any basic variable.
        xb_ -= (own_range * direction) * d;
        val_[enter] = direction > 0 ? upper_[enter] : lower_[enter];
        state_[enter] = direction > 0 ? kAtUpper : kAtLower;
      } else {
        const double piv = d(leave);
        const double entering_value = val_[enter] + direction * t_best;
        xb_ -= (t_best * direction) * d;
        const int leaving = basis_[leave];
        const double h = direction * piv;
        val_[leaving] = h > 0 ? lower_[leaving] : upper_[leaving];
        state_[leaving] = h > 0 ? kAtLower : kAtUpper;
        basis_pos_[leaving] = -1;
        basis_[leave] = enter;
        basis_pos_[enter] = leave;
        state_[enter] = kBasic;
        xb_(leave) = entering_value;

        Eigen::VectorXd f = d / piv;
        f(leave) = (piv - 1.0) / piv;
        const Eigen::RowVectorXd old_row = binv_.row(leave);
        binv_.noalias() -= f * old_row;
        ++pivots_since_refactor_;
      }

      ++iterations_;
      const double obj = current_objective();
      if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
        stalled = 0;
        bland = false;
      } else if (++stalled > 100) {
        bland = true;
      }
      last_obj = obj;
    }
  }

  void finish(LpSolution& out) {
    if (m_ > 0 && out.status == LpStatus::Optimal) refactorize();
    out.iterations = iterations_;
    out.x.resize(nv_);
    for (int j = 0; j < nv_; ++j) out.x(j) = value_of(j);
    out.objective_value = 0.0;
    for (int j = 0; j < nv_; ++j) out.objective_value += cost_[j] * out.x(j);

    out.row_activity = Eigen::VectorXd::Zero(m_);
    for (int i = 0; i < m_; ++i)
      for (const auto& [var, coef] : p_.row_terms(i)) out.row_activity(i) += coef * out.x(var);

    out.row_duals = Eigen::VectorXd::Zero(m_);
    out.reduced_costs = Eigen::VectorXd::Zero(nv_);
    if (out.status != LpStatus::Optimal) return;
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost_[basis_[i]];
    out.row_duals.noalias() = binv_.transpose() * cb;
    for (int j = 0; j < nv_; ++j) {
      double dj = cost_[j];
      for (const auto& [row, coef] : col_entries_[j]) dj -= out.row_duals(row) * coef;
      out.reduced_costs(j) = state_[j] == kBasic ? 0.0 : dj;
    }
  }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& program, const SolveOptions& options) {
  Simplex simplex(program, options);
  return simplex.run();
}

namespace {

std::string lp_name(const std::string& raw, char fallback_prefix, int index) {
  std::string s;
  for (char c : raw) {
    const bool ok = std::isalnum((unsigned char)c) || c == '_' || c == '.' || c == ':' ||
                    c == '(' || c == ')' || c == '#';
    s += ok ? c : '_';
  }
  if (s.empty() || std::isdigit((unsigned char)s[0]) || s[0] == 'e' || s[0] == 'E' ||
      s[0] == '.')
    s = std::string(1, fallback_prefix) + std::to_string(index) + "_" + s;
  return s;
}

void write_terms(std::ostringstream& os, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<std::string>& var_names) {
  // Accumulate duplicates so the text form matches the solver's view.
  std::vector<std::pair<int, double>> merged(terms);
  std::sort(merged.begin(), merged.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> out;
  for (const auto& t : merged) {
    if (!out.empty() && out.back().first == t.first)
      out.back().second += t.second;
    else
      out.push_back(t);
  }
  bool first = true;
  for (const auto& [var, coef] : out) {
    if (coef == 0.0) continue;
    if (first) {
      os << (coef < 0 ? "- " : "");
    } else {
      os << (coef < 0 ? " - " : " + ");
    }
    os << std::abs(coef) << " " << var_names[var];
    first = false;
  }
  if (first) os << "0 " << var_names[0];
}

}  // namespace

std::string to_lp_format(const LinearProgram& program, const std::string& name) {
  std::ostringstream os;
  os.precision(17);
  std::vector<std::string> var_names(program.num_variables());
  for (int j = 0; j < program.num_variables(); ++j)
    var_names[j] = lp_name(program.variable_name(j), 'x', j);

  os << "\\ " << name << "\n";
  os << "Minimize\n obj: ";
  std::vector<std::pair<int, double>> obj_terms;
  for (int j = 0; j < program.num_variables(); ++j)
    if (program.cost(j) != 0.0) obj_terms.emplace_back(j, program.cost(j));
  if (program.num_variables() > 0) write_terms(os, obj_terms, var_names);
  os << "\nSubject To\n";
  for (int i = 0; i < program.num_rows(); ++i) {
    os << " " << lp_name(program.row_name(i), 'r', i) << ": ";
    write_terms(os, program.row_terms(i), var_names);
    switch (program.row_sense(i)) {
      case Sense::LessEqual: os << " <= "; break;
      case Sense::Equal: os << " = "; break;
      case Sense::GreaterEqual: os << " >= "; break;
    }
    os << program.rhs(i) << "\n";
  }
  os << "Bounds\n";
  for (int j = 0; j < program.num_variables(); ++j) {
    const double lb = program.lower_bound(j);
    const double ub = program.upper_bound(j);
    if (lb == ub) {
      os << " " << var_names[j] << " = " << lb << "\n";
    } else if (!std::isfinite(lb) && !std::isfinite(ub)) {
      os << " " << var_names[j] << " free\n";
    } else if (!std::isfinite(lb)) {
      os << " -inf <= " << var_names[j] << " <= " << ub << "\n";
    } else if (!std::isfinite(ub)) {
      os << " " << var_names[j] << " >= " << lb << "\n";
    } else {
      os << " " << lb << " <= " << var_names[j] << " <= " << ub << "\n";
    }
  }
  os << "End\n";
  return os.str();
}

}  // namespace gridsced::lp
