#include "amod/lpcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

#include "amod/errors.hpp"

namespace amod {

int LinearProgram::add_var(double cost, std::string name, bool is_integer, double lower) {
  objective.push_back(cost);
  variable_names.push_back(std::move(name));
  integer_mask.push_back(is_integer);
  var_lower_bounds.push_back(lower);
  return num_vars() - 1;
}

void LinearProgram::validate() const {
  const int nv = num_vars();
  if (static_cast<int>(var_lower_bounds.size()) != nv ||
      static_cast<int>(integer_mask.size()) != nv ||
      static_cast<int>(variable_names.size()) != nv)
    throw ShapeError("LinearProgram: per-variable arrays disagree with objective length");
  auto check_rows = [nv](const std::vector<Row>& rows, const char* kind) {
    for (const Row& r : rows) {
      if (!std::isfinite(r.rhs)) throw ShapeError(std::string("LinearProgram: non-finite rhs in ") + kind);
      for (auto& [col, c] : r.coef) {
        if (col < 0 || col >= nv)
          throw ShapeError(std::string("LinearProgram: column out of range in ") + kind);
        if (!std::isfinite(c)) throw ShapeError(std::string("LinearProgram: non-finite coefficient in ") + kind);
      }
    }
  };
  check_rows(eq_rows, "eq");
  check_rows(ge_rows, "ge");
  for (double b : var_lower_bounds)
    if (!std::isfinite(b)) throw ShapeError("LinearProgram: non-finite lower bound");
  for (double c : objective)
    if (!std::isfinite(c)) throw ShapeError("LinearProgram: non-finite objective coefficient");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
  }
  return "?";
}

namespace {

// Dense two-phase primal simplex on the standard form
//   min c.y   s.t.  A y = b, y >= 0,
// built by shifting variables to their lower bounds and adding one surplus
// column per >= row. Dantzig pricing with a Bland's-rule fallback after a
// run of degenerate pivots; these network programs are highly degenerate.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opts) : lp_(lp), opts_(opts) {
    nv_ = lp.num_vars();
    n_surplus_ = static_cast<int>(lp.ge_rows.size());
    m_ = static_cast<int>(lp.eq_rows.size()) + n_surplus_;
    n_ = nv_ + n_surplus_;
    row_live_.assign(m_, true);
    basis_.assign(m_, -1);

    // stage rows sign-normalized into a dense block without artificials
    std::vector<double> dense(static_cast<size_t>(m_) * (n_ + 1), 0.0);
    auto stage = [&](int r, const LinearProgram::Row& row, int surplus_col) {
      double* d = &dense[static_cast<size_t>(r) * (n_ + 1)];
      double b = row.rhs;
      for (auto& [col, c] : row.coef) {
        d[col] += c;
        b -= c * lp_.var_lower_bounds[col];  // shift x = lb + y
      }
      if (surplus_col >= 0) d[surplus_col] = -1.0;
      if (b < 0) {
        for (int c = 0; c <= n_; ++c) d[c] = -d[c];
        b = -b;
      }
      d[n_] = b;
    };
    int r = 0;
    for (const auto& row : lp.eq_rows) stage(r++, row, -1);
    for (int g = 0; g < n_surplus_; ++g) stage(r++, lp.ge_rows[g], nv_ + g);

    // crash basis: any positive column owned by exactly one row starts
    // basic there, so artificials are needed only for the leftover rows
    std::vector<int> occurrences(n_, 0);
    for (r = 0; r < m_; ++r) {
      const double* d = &dense[static_cast<size_t>(r) * (n_ + 1)];
      for (int c = 0; c < n_; ++c)
        if (std::abs(d[c]) > opts_.pivot_tol) ++occurrences[c];
    }
    std::vector<int> crash_col(m_, -1);
    n_art_ = 0;
    for (r = 0; r < m_; ++r) {
      const double* d = &dense[static_cast<size_t>(r) * (n_ + 1)];
      for (int c = 0; c < n_; ++c)
        if (occurrences[c] == 1 && d[c] > opts_.pivot_tol) {
          crash_col[r] = c;
          break;
        }
      if (crash_col[r] < 0) ++n_art_;
    }

    width_ = n_ + n_art_ + 1;
    tab_.assign(static_cast<size_t>(m_) * width_, 0.0);
    int art = 0;
    for (r = 0; r < m_; ++r) {
      const double* d = &dense[static_cast<size_t>(r) * (n_ + 1)];
      double* row_out = &tab_[static_cast<size_t>(r) * width_];
      std::copy(d, d + n_, row_out);
      row_out[width_ - 1] = d[n_];
      if (crash_col[r] >= 0) {
        const double piv = row_out[crash_col[r]];
        if (piv != 1.0)
          for (int c = 0; c < width_; ++c) row_out[c] /= piv;
        basis_[r] = crash_col[r];
      } else {
        row_out[n_ + art] = 1.0;
        basis_[r] = n_ + art;
        ++art;
      }
    }
  }

  Solution run() {
    Solution sol;
    sol.variable_names = lp_.variable_names;

    if (!phase1()) {
      sol.status = SolveStatus::infeasible;
      return sol;
    }
    const bool bounded = phase2();
    if (!bounded) {
      sol.status = SolveStatus::unbounded;
      return sol;
    }

    sol.status = SolveStatus::optimal;
    sol.values.assign(nv_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (!row_live_[i]) continue;
      const int b = basis_[i];
      if (b >= 0 && b < nv_) sol.values[b] = rhs(i);
    }
    for (int j = 0; j < nv_; ++j) sol.values[j] += lp_.var_lower_bounds[j];
    sol.objective_value = 0;
    for (int j = 0; j < nv_; ++j) sol.objective_value += lp_.objective[j] * sol.values[j];
    fill_basis(sol);
    return sol;
  }

 private:
  double& at(int r, int c) { return tab_[static_cast<size_t>(r) * width_ + c]; }
  double& rhs(int r) { return tab_[static_cast<size_t>(r) * width_ + width_ - 1]; }

  // Minimize the sum of artificials, then drive any leftover basic
  // artificials out (or drop their rows as redundant).
  bool phase1() {
    if (n_art_ == 0) return true;
    cost_.assign(width_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;  // crash rows carry no phase-1 cost
      for (int c = 0; c < width_; ++c)
        if (c != basis_[i]) cost_[c] -= at(i, c);
    }
    for (int k = 0; k < n_art_; ++k) cost_[n_ + k] = 0.0;
    artificials_allowed_ = true;
    iterate();
    const double infeas = -cost_[width_ - 1];
    if (infeas > 1e-7) return false;

    for (int i = 0; i < m_; ++i) {
      if (!row_live_[i] || basis_[i] < n_) continue;
      int pivot_col = -1;
      for (int c = 0; c < n_; ++c)
        if (std::abs(at(i, c)) > opts_.pivot_tol) {
          pivot_col = c;
          break;
        }
      if (pivot_col >= 0) {
        pivot(i, pivot_col);
      } else {
        row_live_[i] = false;  // redundant constraint
      }
    }
    for (int i = 0; i < m_; ++i)
      if (row_live_[i] && rhs(i) < 0 && rhs(i) > -1e-9) rhs(i) = 0;
    return true;
  }

  // After phase 1 every live row has a structural basic variable, so the
  // artificial columns can be dropped; that narrows every later row op.
  void repack() {
    const int new_width = n_ + 1;
    std::vector<double> packed(static_cast<size_t>(m_) * new_width);
    for (int r = 0; r < m_; ++r) {
      const double* src = &tab_[static_cast<size_t>(r) * width_];
      double* dst = &packed[static_cast<size_t>(r) * new_width];
      std::copy(src, src + n_, dst);
      dst[n_] = src[width_ - 1];
    }
    tab_ = std::move(packed);
    width_ = new_width;
  }

  bool phase2() {
    artificials_allowed_ = false;
    repack();
    cost_.assign(width_, 0.0);
    for (int j = 0; j < nv_; ++j) cost_[j] = lp_.objective[j];
    // price out the basic columns
    for (int i = 0; i < m_; ++i) {
      if (!row_live_[i]) continue;
      const int b = basis_[i];
      const double cb = (b < nv_) ? lp_.objective[b] : 0.0;
      if (cb == 0.0) continue;
      for (int c = 0; c < width_; ++c) cost_[c] -= cb * at(i, c);
    }
    return iterate();
  }

  // Returns false iff an unbounded ray was found.
  bool iterate() {
    int degenerate_run = 0;
    bool bland = false;
    for (long it = 0; it < opts_.max_iterations; ++it) {
      const int limit = artificials_allowed_ ? n_ + n_art_ : n_;
      int enter = -1;
      if (bland) {
        for (int c = 0; c < limit; ++c)
          if (cost_[c] < -opts_.pivot_tol) {
            enter = c;
            break;
          }
      } else {
        double best = -opts_.pivot_tol;
        for (int c = 0; c < limit; ++c)
          if (cost_[c] < best) {
            best = cost_[c];
            enter = c;
          }
      }
      if (enter < 0) return true;  // optimal

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m_; ++r) {
        if (!row_live_[r]) continue;
        const double a = at(r, enter);
        if (a > opts_.pivot_tol) {
          const double ratio = rhs(r) / a;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && (leave < 0 || basis_[r] < basis_[leave]))) {
            best_ratio = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return false;  // unbounded

      if (best_ratio <= opts_.feas_tol) {
        if (++degenerate_run >= opts_.bland_trigger) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      pivot(leave, enter);
    }
    throw SolveError("simplex: iteration limit exceeded");
  }

  void pivot(int r, int c) {
    const double piv = at(r, c);
    double* prow = &tab_[static_cast<size_t>(r) * width_];
    const double inv = 1.0 / piv;
    for (int k = 0; k < width_; ++k) prow[k] *= inv;
    prow[c] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r || !row_live_[i]) continue;
      double* irow = &tab_[static_cast<size_t>(i) * width_];
      const double f = irow[c];
      if (f == 0.0) continue;
      for (int k = 0; k < width_; ++k) irow[k] -= f * prow[k];
      irow[c] = 0.0;
    }
    if (std::isfinite(cost_[c]) && cost_[c] != 0.0) {
      const double f = cost_[c];
      for (int k = 0; k < width_; ++k)
        if (std::isfinite(cost_[k])) cost_[k] -= f * prow[k];
      cost_[c] = 0.0;
    }
    basis_[r] = c;
  }

  void fill_basis(Solution& sol) const {
    const double tol = 1e-7;
    for (size_t i = 0; i < lp_.eq_rows.size(); ++i) sol.basis.push_back("eq:" + std::to_string(i));
    for (size_t g = 0; g < lp_.ge_rows.size(); ++g) {
      const auto& row = lp_.ge_rows[g];
      double lhs = 0;
      for (auto& [col, c] : row.coef) lhs += c * sol.values[col];
      if (std::abs(lhs - row.rhs) <= tol * (1 + std::abs(row.rhs)))
        sol.basis.push_back("ge:" + std::to_string(g));
    }
    for (int j = 0; j < nv_; ++j)
      if (std::abs(sol.values[j] - lp_.var_lower_bounds[j]) <= tol)
        sol.basis.push_back("lb:" + lp_.variable_names[j]);
  }

  const LinearProgram& lp_;
  SimplexOptions opts_;
  int nv_, n_surplus_, m_, n_, width_, n_art_ = 0;
  std::vector<double> tab_, cost_;
  std::vector<int> basis_;
  std::vector<bool> row_live_;
  bool artificials_allowed_ = false;
};

}  // namespace

Solution solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  lp.validate();
  Simplex sx(lp, opts);
  return sx.run();
}

namespace {

struct BnbNode {
  double bound;
  long id;
  std::vector<double> lower;
  std::vector<double> upper;  // +inf when free
};

struct BnbOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

Solution solve_milp(const LinearProgram& lp, const MilpOptions& opts) {
  lp.validate();
  const int nv = lp.num_vars();
  bool any_integer = false;
  for (bool f : lp.integer_mask) any_integer |= f;
  if (!any_integer) throw ShapeError("solve_milp: integer_mask selects no variables");

  const double inf = std::numeric_limits<double>::infinity();
  std::priority_queue<BnbNode, std::vector<BnbNode>, BnbOrder> heap;

  auto solve_node = [&](const BnbNode& node) {
    LinearProgram sub = lp;
    sub.var_lower_bounds = node.lower;
    for (int j = 0; j < nv; ++j) {
      if (std::isfinite(node.upper[j])) {
        LinearProgram::Row cap;
        cap.coef = {{j, -1.0}};
        cap.rhs = -node.upper[j];
        sub.add_ge(std::move(cap));
      }
    }
    return solve_lp(sub, opts.lp);
  };

  long next_id = 0;
  BnbNode root{-inf, next_id++, lp.var_lower_bounds, std::vector<double>(nv, inf)};
  Solution root_sol = solve_node(root);
  if (root_sol.status != SolveStatus::optimal) return root_sol;
  root.bound = root_sol.objective_value;

  Solution incumbent;
  incumbent.status = SolveStatus::infeasible;
  double incumbent_obj = inf;

  auto most_fractional = [&](const Solution& s) {
    int best = -1;
    double best_dist = opts.int_tol;
    for (int j = 0; j < nv; ++j) {
      if (!lp.integer_mask[j]) continue;
      const double frac = s.values[j] - std::floor(s.values[j]);
      const double dist = std::min(frac, 1.0 - frac);
      if (dist > best_dist + 1e-15) {
        best_dist = dist;
        best = j;
      }
    }
    return best;
  };

  std::priority_queue<BnbNode, std::vector<BnbNode>, BnbOrder> queue;
  queue.push(std::move(root));

  long processed = 0;
  while (!queue.empty()) {
    if (++processed > opts.node_budget)
      throw BudgetError("solve_milp: node budget exceeded (" + std::to_string(opts.node_budget) + ")");
    BnbNode node = queue.top();
    queue.pop();
    if (node.bound >= incumbent_obj - 1e-9) continue;

    Solution relax = (processed == 1) ? root_sol : solve_node(node);
    if (relax.status == SolveStatus::unbounded) return relax;
    if (relax.status != SolveStatus::optimal) continue;
    if (relax.objective_value >= incumbent_obj - 1e-9) continue;

    const int frac_var = most_fractional(relax);
    if (frac_var < 0) {
      incumbent = relax;
      incumbent_obj = relax.objective_value;
      continue;
    }

    const double v = relax.values[frac_var];
    BnbNode down{relax.objective_value, next_id++, node.lower, node.upper};
    down.upper[frac_var] = std::floor(v);
    BnbNode up{relax.objective_value, next_id++, node.lower, node.upper};
    up.lower[frac_var] = std::ceil(v);
    if (down.upper[frac_var] >= down.lower[frac_var] - 1e-12) queue.push(std::move(down));
    queue.push(std::move(up));
  }

  if (incumbent.status != SolveStatus::optimal) {
    Solution none;
    none.status = SolveStatus::infeasible;
    none.variable_names = lp.variable_names;
    return none;
  }
  // snap masked variables onto the integers they are within tolerance of
  for (int j = 0; j < nv; ++j)
    if (lp.integer_mask[j]) incumbent.values[j] = std::round(incumbent.values[j]);
  incumbent.objective_value = 0;
  for (int j = 0; j < nv; ++j) incumbent.objective_value += lp.objective[j] * incumbent.values[j];
  return incumbent;
}

std::vector<Count> certify_integral(const Solution& sol, double tol) {
  if (sol.status != SolveStatus::optimal)
    throw SolveError("certify_integral: solution is not optimal");
  std::vector<Count> out(sol.values.size());
  double worst = 0;
  int worst_var = -1;
  for (size_t j = 0; j < sol.values.size(); ++j) {
    const double r = std::round(sol.values[j]);
    const double err = std::abs(sol.values[j] - r);
    if (err > worst) {
      worst = err;
      worst_var = static_cast<int>(j);
    }
    out[j] = static_cast<Count>(r);
  }
  if (worst > tol) {
    const std::string tag = (worst_var < static_cast<int>(sol.variable_names.size()) &&
                             !sol.variable_names[worst_var].empty())
                                ? sol.variable_names[worst_var]
                                : "var" + std::to_string(worst_var);
    throw IntegralityError(tag, sol.values[worst_var],
                           "certify_integral: " + tag + " = " + std::to_string(sol.values[worst_var]) +
                               " is not integral within " + std::to_string(tol));
  }
  return out;
}

void dump_lp(const LinearProgram& lp, std::ostream& out) {
  auto name = [&](int j) {
    return lp.variable_names[j].empty() ? "x" + std::to_string(j) : lp.variable_names[j];
  };
  out << "min:";
  for (int j = 0; j < lp.num_vars(); ++j)
    if (lp.objective[j] != 0) out << " " << (lp.objective[j] >= 0 ? "+" : "") << lp.objective[j] << "*" << name(j);
  out << "\n";
  auto write_rows = [&](const std::vector<LinearProgram::Row>& rows, const char* op) {
    for (const auto& r : rows) {
      bool first = true;
      for (auto& [col, c] : r.coef) {
        out << (first ? "" : " ") << (c >= 0 && !first ? "+" : "") << c << "*" << name(col);
        first = false;
      }
      out << " " << op << " " << r.rhs << "\n";
    }
  };
  write_rows(lp.eq_rows, "=");
  write_rows(lp.ge_rows, ">=");
  for (int j = 0; j < lp.num_vars(); ++j) {
    out << name(j) << " >= " << lp.var_lower_bounds[j];
    if (lp.integer_mask[j]) out << " (int)";
    out << "\n";
  }
}

}  // namespace amod
