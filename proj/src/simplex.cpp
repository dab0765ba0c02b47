#include "binpack/simplex.hpp"

#include <cmath>
#include <limits>

#include "binpack/errors.hpp"

namespace binpack {

namespace {

struct Tableau {
  int m = 0;      // rows
  int ncols = 0;  // columns excluding the rhs
  std::vector<std::vector<double>> a;   // m x (ncols + 1), rhs last
  std::vector<int> basis;               // basic column per row
  std::vector<double> z;                // reduced-cost row, z[ncols] = -objective
  std::vector<char> blocked;            // columns barred from entering

  void canonicalize(const std::vector<double>& cost) {
    z.assign(static_cast<size_t>(ncols) + 1, 0.0);
    for (int j = 0; j < ncols; ++j) z[static_cast<size_t>(j)] = cost[static_cast<size_t>(j)];
    for (int i = 0; i < m; ++i) {
      const double cb = cost[static_cast<size_t>(basis[static_cast<size_t>(i)])];
      if (cb != 0.0) {
        const auto& row = a[static_cast<size_t>(i)];
        for (int j = 0; j <= ncols; ++j) z[static_cast<size_t>(j)] -= cb * row[static_cast<size_t>(j)];
      }
    }
  }

  void pivot(int row, int col) {
    auto& prow = a[static_cast<size_t>(row)];
    const double piv = prow[static_cast<size_t>(col)];
    for (int j = 0; j <= ncols; ++j) prow[static_cast<size_t>(j)] /= piv;
    prow[static_cast<size_t>(col)] = 1.0;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      auto& arow = a[static_cast<size_t>(i)];
      const double f = arow[static_cast<size_t>(col)];
      if (f == 0.0) continue;
      for (int j = 0; j <= ncols; ++j) arow[static_cast<size_t>(j)] -= f * prow[static_cast<size_t>(j)];
      arow[static_cast<size_t>(col)] = 0.0;
    }
    const double f = z[static_cast<size_t>(col)];
    if (f != 0.0) {
      for (int j = 0; j <= ncols; ++j) z[static_cast<size_t>(j)] -= f * prow[static_cast<size_t>(j)];
      z[static_cast<size_t>(col)] = 0.0;
    }
    basis[static_cast<size_t>(row)] = col;
  }

  // Bland: entering = lowest-index improving column, leaving = ratio test
  // with ties broken by the smallest basic column index.
  // Returns Optimal, Unbounded or IterationLimit.
  LpStatus iterate(double tol, int64_t& budget) {
    while (true) {
      int enter = -1;
      for (int j = 0; j < ncols; ++j) {
        if (blocked[static_cast<size_t>(j)]) continue;
        if (z[static_cast<size_t>(j)] < -tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      if (--budget < 0) return LpStatus::IterationLimit;

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double aij = a[static_cast<size_t>(i)][static_cast<size_t>(enter)];
        if (aij <= tol) continue;
        const double ratio = a[static_cast<size_t>(i)][static_cast<size_t>(ncols)] / aij;
        bool take = false;
        if (leave < 0 || ratio < best_ratio - tol) {
          take = true;
        } else if (ratio <= best_ratio + tol &&
                   basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)]) {
          take = true;
        }
        if (take) {
          leave = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
  }
};

}  // namespace

LpSolution solve_dense_lp(const LpProblem& problem, double tol, int64_t max_iterations) {
  const int n = problem.num_vars;
  const int m = static_cast<int>(problem.rows.size());
  if (static_cast<int>(problem.objective.size()) != n)
    throw ValidationError("lp: objective length does not match num_vars");

  // Normalize to rhs >= 0; count slack and artificial columns.
  std::vector<LpRow> rows = problem.rows;
  int nslack = 0, nart = 0;
  for (auto& row : rows) {
    if (static_cast<int>(row.coeffs.size()) != n)
      throw ValidationError("lp: row length does not match num_vars");
    if (row.rhs < 0.0) {
      row.rhs = -row.rhs;
      for (auto& c : row.coeffs) c = -c;
      if (row.relation == '<') row.relation = '>';
      else if (row.relation == '>') row.relation = '<';
    }
    if (row.relation == '<' || row.relation == '>') ++nslack;
    if (row.relation == '>' || row.relation == '=') ++nart;
  }

  Tableau t;
  t.m = m;
  t.ncols = n + nslack + nart;
  t.a.assign(static_cast<size_t>(m), std::vector<double>(static_cast<size_t>(t.ncols) + 1, 0.0));
  t.basis.assign(static_cast<size_t>(m), -1);
  t.blocked.assign(static_cast<size_t>(t.ncols), 0);

  const int art_begin = n + nslack;
  int next_slack = n, next_art = art_begin;
  for (int i = 0; i < m; ++i) {
    auto& arow = t.a[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j) arow[static_cast<size_t>(j)] = rows[static_cast<size_t>(i)].coeffs[static_cast<size_t>(j)];
    arow[static_cast<size_t>(t.ncols)] = rows[static_cast<size_t>(i)].rhs;
    switch (rows[static_cast<size_t>(i)].relation) {
      case '<':
        arow[static_cast<size_t>(next_slack)] = 1.0;
        t.basis[static_cast<size_t>(i)] = next_slack++;
        break;
      case '>':
        arow[static_cast<size_t>(next_slack++)] = -1.0;
        arow[static_cast<size_t>(next_art)] = 1.0;
        t.basis[static_cast<size_t>(i)] = next_art++;
        break;
      case '=':
        arow[static_cast<size_t>(next_art)] = 1.0;
        t.basis[static_cast<size_t>(i)] = next_art++;
        break;
      default:
        throw ValidationError("lp: unknown row relation");
    }
  }

  int64_t budget = max_iterations;
  LpSolution out;

  if (nart > 0) {
    std::vector<double> phase1(static_cast<size_t>(t.ncols), 0.0);
    for (int j = art_begin; j < t.ncols; ++j) phase1[static_cast<size_t>(j)] = 1.0;
    t.canonicalize(phase1);
    const LpStatus st = t.iterate(tol, budget);
    if (st == LpStatus::IterationLimit) {
      out.status = st;
      return out;
    }
    const double infeas = -t.z[static_cast<size_t>(t.ncols)];
    if (st == LpStatus::Unbounded || infeas > 1e-7) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    // Drive artificials out of the basis where possible; rows that stay on an
    // artificial are redundant (all-zero in real columns) and inert.
    for (int i = 0; i < m; ++i) {
      if (t.basis[static_cast<size_t>(i)] < art_begin) continue;
      int col = -1;
      for (int j = 0; j < art_begin; ++j) {
        if (std::abs(t.a[static_cast<size_t>(i)][static_cast<size_t>(j)]) > tol) {
          col = j;
          break;
        }
      }
      if (col >= 0) t.pivot(i, col);
    }
    for (int j = art_begin; j < t.ncols; ++j) t.blocked[static_cast<size_t>(j)] = 1;
  }

  std::vector<double> phase2(static_cast<size_t>(t.ncols), 0.0);
  for (int j = 0; j < n; ++j) phase2[static_cast<size_t>(j)] = problem.objective[static_cast<size_t>(j)];
  t.canonicalize(phase2);
  const LpStatus st = t.iterate(tol, budget);
  if (st != LpStatus::Optimal) {
    out.status = st;
    return out;
  }

  out.x.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < m; ++i) {
    const int b = t.basis[static_cast<size_t>(i)];
    if (b < n) out.x[static_cast<size_t>(b)] = t.a[static_cast<size_t>(i)][static_cast<size_t>(t.ncols)];
  }
  double obj = 0.0;
  for (int j = 0; j < n; ++j) obj += problem.objective[static_cast<size_t>(j)] * out.x[static_cast<size_t>(j)];
  out.objective = obj;
  out.status = LpStatus::Optimal;
  return out;
}

}  // namespace binpack
