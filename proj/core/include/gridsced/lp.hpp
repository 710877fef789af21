#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "gridsced/common.hpp"

namespace gridsced::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string to_string(LpStatus status);

/// A minimization LP over bounded variables:
///   min c.x  s.t.  a_i.x {<=,=,>=} b_i,  l <= x <= u.
/// Rows and variables carry names for reporting; coefficients added for the
/// same (row, variable) pair accumulate.
class LinearProgram {
 public:
  int add_variable(std::string name, double lower, double upper, double cost);
  int add_row(std::string name, Sense sense, double rhs);
  void add_term(int row, int var, double coefficient);

  int num_variables() const { return (int)cols_.size(); }
  int num_rows() const { return (int)rows_.size(); }
  int num_nonzeros() const;
  const std::string& variable_name(int var) const { return cols_[var].name; }
  const std::string& row_name(int row) const { return rows_[row].name; }
  double lower_bound(int var) const { return cols_[var].lower; }
  double upper_bound(int var) const { return cols_[var].upper; }
  double cost(int var) const { return cols_[var].cost; }
  Sense row_sense(int row) const { return rows_[row].sense; }
  double rhs(int row) const { return rows_[row].rhs; }
  const std::vector<std::pair<int, double>>& row_terms(int row) const {
    return rows_[row].terms;
  }
  int row_index(const std::string& name) const;  // -1 when absent

 private:
  struct Col {
    std::string name;
    double lower = 0.0, upper = 0.0, cost = 0.0;
  };
  struct Row {
    std::string name;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
    std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  };
  std::vector<Col> cols_;
  std::vector<Row> rows_;
};

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  Eigen::VectorXd x;              ///< per variable
  double objective_value = 0.0;
  Eigen::VectorXd row_duals;      ///< d(objective)/d(rhs) per row
  Eigen::VectorXd reduced_costs;  ///< per variable
  Eigen::VectorXd row_activity;   ///< a_i.x per row
  std::vector<std::string> infeasible_rows;  ///< rows left unsatisfied (infeasible only)
  std::string unbounded_ray;                 ///< variable driving the ray (unbounded only)
  int iterations = 0;
};

struct SolveOptions {
  double optimality_tol = 1e-9;   ///< reduced-cost threshold
  double feasibility_tol = 1e-9;  ///< bound / phase-1 threshold
  int refactor_every = 400;       ///< basis-inverse rebuild cadence
  int iteration_limit = 0;        ///< 0 = automatic from problem size
};

/// Bounded-variable primal revised simplex, two-phase, with Bland's rule as
/// an anti-cycling fallback. Dual values follow the d(obj)/d(rhs)
/// convention: a binding <= row of a minimization has dual <= 0.
LpSolution solve_lp(const LinearProgram& program, const SolveOptions& options = {});

/// Serialize in CPLEX LP text format for cross-checking with other solvers.
std::string to_lp_format(const LinearProgram& program, const std::string& name = "lp");

}  // namespace gridsced::lp
