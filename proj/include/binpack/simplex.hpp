#pragma once

#include <cstdint>
#include <vector>

namespace binpack {

// Minimal dense LP interface: minimize c^T x subject to the given rows and
// x >= 0. Relations are '<' (<=), '=' or '>' (>=).
struct LpRow {
  std::vector<double> coeffs;
  double rhs = 0.0;
  char relation = '<';
};

struct LpProblem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<LpRow> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
};

// Two-phase dense primal simplex with Bland's anti-cycling rule. Sized for
// the small, highly degenerate LPs built in this project (at most a few
// hundred variables).
LpSolution solve_dense_lp(const LpProblem& problem, double tol = 1e-9,
                          int64_t max_iterations = 1'000'000);

}  // namespace binpack
