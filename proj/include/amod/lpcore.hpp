#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "amod/netflow.hpp"

namespace amod {

// Generic linear program
//   min  objective . x
//   s.t. eq_rows:  a . x  = rhs
//        ge_rows:  a . x >= rhs
//        x >= var_lower_bounds (0 by default)
// Rows hold sparse (column, coefficient) pairs. integer_mask is consulted
// only by solve_milp. variable_names carry (i,j,t,k)-style tags so solver
// diagnostics can point at a concrete decision variable.
struct LinearProgram {
  struct Row {
    std::vector<std::pair<int, double>> coef;
    double rhs = 0;
  };

  std::vector<double> objective;
  std::vector<Row> eq_rows;
  std::vector<Row> ge_rows;
  std::vector<double> var_lower_bounds;
  std::vector<bool> integer_mask;
  std::vector<std::string> variable_names;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int add_var(double cost, std::string name, bool is_integer = false, double lower = 0.0);
  void add_eq(Row row) { eq_rows.push_back(std::move(row)); }
  void add_ge(Row row) { ge_rows.push_back(std::move(row)); }
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded };

const char* to_string(SolveStatus s);

// Vertex solution. `basis` lists the constraints active at the returned
// point ("eq:<i>", "ge:<i>", "lb:<variable name>"); for an optimal solve
// they have full column rank, i.e. the point is a basic feasible solution.
struct Solution {
  std::vector<double> values;
  double objective_value = 0;
  SolveStatus status = SolveStatus::infeasible;
  std::vector<std::string> basis;
  std::vector<std::string> variable_names;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double feas_tol = 1e-9;
  long max_iterations = 500000;
  // consecutive degenerate pivots before switching to Bland's rule
  int bland_trigger = 64;
};

Solution solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

struct MilpOptions {
  long node_budget = 100000;
  double int_tol = 1e-6;
  SimplexOptions lp;
};

// Best-first branch and bound on the LP relaxation, branching on the most
// fractional masked variable. Throws BudgetError when node_budget runs out.
Solution solve_milp(const LinearProgram& lp, const MilpOptions& opts = {});

// Round a solution certified to be integral; throws IntegralityError naming
// the worst offender if any masked-or-not value is farther than tol from an
// integer. A throw here means a totally-unimodular assumption was violated.
std::vector<Count> certify_integral(const Solution& sol, double tol = 1e-6);

// Human-readable listing, one constraint per line (debugging aid).
void dump_lp(const LinearProgram& lp, std::ostream& out);

}  // namespace amod
