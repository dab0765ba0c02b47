#include "binpack/wastelp.hpp"

#include <algorithm>
#include <cmath>

#include "binpack/errors.hpp"

namespace binpack {

const char* to_string(DistributionClass c) {
  return c == DistributionClass::LinearWaste ? "LW" : "PP";
}

WasteLp build_waste_lp(const PackingInstance& instance) {
  PackingInstance inst = instance;
  inst.validate();
  const int B = inst.capacity;
  const int J = static_cast<int>(inst.workload.classes.size());

  WasteLp w;
  w.capacity = B;
  w.num_types = J;
  for (const auto& c : inst.workload.classes) {
    w.sizes.push_back(c.size);
    w.probs.push_back(c.prob);
  }

  w.fixed_zero.assign(static_cast<size_t>(J) * B, 0);
  w.column_of.assign(static_cast<size_t>(J) * B, -1);
  int ncols = 0;
  for (int j = 0; j < J; ++j) {
    for (int h = 0; h < B; ++h) {
      if (w.sizes[static_cast<size_t>(j)] > B - h) {
        w.fixed_zero[static_cast<size_t>(w.var_index(j, h))] = 1;
      } else {
        w.column_of[static_cast<size_t>(w.var_index(j, h))] = ncols++;
      }
    }
  }

  w.lp.num_vars = ncols;
  // Waste accrual per unit flow: sending type j to level h leaves B-h-s_j
  // empty units in the receiving bin (none if the bin closes) and removes the
  // B-h units that bin was holding open.
  w.lp.objective.assign(static_cast<size_t>(ncols), 0.0);
  for (int j = 0; j < J; ++j) {
    const int s = w.sizes[static_cast<size_t>(j)];
    for (int h = 0; h < B; ++h) {
      const int col = w.column_of[static_cast<size_t>(w.var_index(j, h))];
      if (col < 0) continue;
      double c = 0.0;
      if (h + s <= B - 1) c += static_cast<double>(B - h - s);
      if (h >= 1) c -= static_cast<double>(B - h);
      w.lp.objective[static_cast<size_t>(col)] = c;
    }
  }

  // Level balance: bins of level h cannot be consumed faster than they are
  // produced. Flows into negative levels do not exist.
  for (int h = 1; h <= B - 1; ++h) {
    LpRow row;
    row.coeffs.assign(static_cast<size_t>(ncols), 0.0);
    row.rhs = 0.0;
    row.relation = '<';
    for (int j = 0; j < J; ++j) {
      const int s = w.sizes[static_cast<size_t>(j)];
      const int out_col = w.column_of[static_cast<size_t>(w.var_index(j, h))];
      if (out_col >= 0) row.coeffs[static_cast<size_t>(out_col)] += 1.0;
      if (h - s >= 0) {
        const int in_col = w.column_of[static_cast<size_t>(w.var_index(j, h - s))];
        if (in_col >= 0) row.coeffs[static_cast<size_t>(in_col)] -= 1.0;
      }
    }
    w.lp.rows.push_back(std::move(row));
    ++w.balance_rows;
  }

  for (int j = 0; j < J; ++j) {
    LpRow row;
    row.coeffs.assign(static_cast<size_t>(ncols), 0.0);
    row.rhs = w.probs[static_cast<size_t>(j)];
    row.relation = '=';
    for (int h = 0; h < B; ++h) {
      const int col = w.column_of[static_cast<size_t>(w.var_index(j, h))];
      if (col >= 0) row.coeffs[static_cast<size_t>(col)] = 1.0;
    }
    w.lp.rows.push_back(std::move(row));
    ++w.probability_rows;
  }

  return w;
}

WasteLpSolution solve_lp(const WasteLp& w) {
  const LpSolution sol = solve_dense_lp(w.lp);
  if (sol.status == LpStatus::IterationLimit)
    throw NumericalFailure("waste LP: simplex iteration cap exceeded");
  if (sol.status != LpStatus::Optimal)
    throw NumericalFailure("waste LP: solver reported infeasible/unbounded");

  WasteLpSolution out;
  out.optimal = true;
  out.flows.assign(static_cast<size_t>(w.num_variables()), 0.0);
  for (int j = 0; j < w.num_types; ++j) {
    for (int h = 0; h < w.capacity; ++h) {
      const int col = w.column_of[static_cast<size_t>(w.var_index(j, h))];
      if (col >= 0) out.flows[static_cast<size_t>(w.var_index(j, h))] = sol.x[static_cast<size_t>(col)];
    }
  }

  // Feasibility residuals.
  for (int j = 0; j < w.num_types; ++j) {
    double total = 0.0;
    for (int h = 0; h < w.capacity; ++h)
      total += out.flows[static_cast<size_t>(w.var_index(j, h))];
    if (std::abs(total - w.probs[static_cast<size_t>(j)]) > 1e-9)
      throw NumericalFailure("waste LP: probability row residual exceeds 1e-9");
  }
  for (int h = 1; h <= w.capacity - 1; ++h) {
    double slack = 0.0;
    for (int j = 0; j < w.num_types; ++j) {
      const int s = w.sizes[static_cast<size_t>(j)];
      if (h - s >= 0) slack += out.flows[static_cast<size_t>(w.var_index(j, h - s))];
      slack -= out.flows[static_cast<size_t>(w.var_index(j, h))];
    }
    if (slack < -1e-9)
      throw NumericalFailure("waste LP: level balance violated beyond 1e-9");
  }

  double rate = sol.objective;
  if (rate < -1e-6) throw NumericalFailure("waste LP: negative optimal waste");
  out.waste_rate = std::max(0.0, rate);
  return out;
}

WasteLpSolution solve_waste_lp(const PackingInstance& instance) {
  return solve_lp(build_waste_lp(instance));
}

DistributionClass classify(const PackingInstance& instance) {
  return solve_waste_lp(instance).waste_rate > 1e-7 ? DistributionClass::LinearWaste
                                                    : DistributionClass::PerfectlyPackable;
}

namespace {

void enumerate_rec(int capacity, const std::vector<int>& sizes, size_t type,
                   int level, std::vector<int>& counts, uint64_t guard,
                   uint64_t& visited, std::vector<BinConfiguration>& out) {
  if (++visited > guard)
    throw ExplosionGuard("configuration enumeration exceeded " + std::to_string(guard) +
                         " nodes");
  if (type == sizes.size()) {
    if (capacity - level < sizes.front()) {  // nothing further fits
      BinConfiguration cfg;
      cfg.counts = counts;
      cfg.level = level;
      cfg.maximal = true;
      out.push_back(std::move(cfg));
    }
    return;
  }
  const int s = sizes[type];
  for (int c = 0; level + c * s <= capacity; ++c) {
    counts[type] = c;
    enumerate_rec(capacity, sizes, type + 1, level + c * s, counts, guard, visited, out);
  }
  counts[type] = 0;
}

}  // namespace

std::vector<BinConfiguration> enumerate_maximal_configs(int capacity,
                                                        const std::vector<int>& sizes,
                                                        uint64_t guard) {
  if (sizes.empty()) throw ValidationError("config enumeration: no item sizes");
  for (size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] < 1 || (j > 0 && sizes[j] <= sizes[j - 1]))
      throw ValidationError("config enumeration: sizes must be strictly increasing and >= 1");
  }
  std::vector<BinConfiguration> out;
  std::vector<int> counts(sizes.size(), 0);
  uint64_t visited = 0;
  enumerate_rec(capacity, sizes, 0, 0, counts, guard, visited, out);
  return out;
}

std::vector<BinConfiguration> enumerate_maximal_configs(const PackingInstance& instance,
                                                        uint64_t guard) {
  PackingInstance inst = instance;
  inst.validate();
  std::vector<int> sizes;
  for (const auto& c : inst.workload.classes) sizes.push_back(c.size);
  return enumerate_maximal_configs(inst.capacity, sizes, guard);
}

ConfigLpSolution solve_config_lp_full(const PackingInstance& instance) {
  PackingInstance inst = instance;
  inst.validate();
  const auto configs = enumerate_maximal_configs(inst);
  const int J = static_cast<int>(inst.workload.classes.size());
  const int n = static_cast<int>(configs.size());

  // Minimize bins per item subject to covering each type's rate. Waste then
  // equals B * bins - mean item volume: overcovered items can always be
  // dropped from their (maximal) configurations without changing bin count,
  // which is why covering over maximal configurations and exact assignment
  // over all configurations share the same optimum.
  LpProblem lp;
  lp.num_vars = n;
  lp.objective.assign(static_cast<size_t>(n), 1.0);
  for (int j = 0; j < J; ++j) {
    LpRow row;
    row.coeffs.assign(static_cast<size_t>(n), 0.0);
    for (int c = 0; c < n; ++c)
      row.coeffs[static_cast<size_t>(c)] = static_cast<double>(configs[static_cast<size_t>(c)].counts[static_cast<size_t>(j)]);
    row.rhs = inst.workload.classes[static_cast<size_t>(j)].prob;
    row.relation = '>';
    lp.rows.push_back(std::move(row));
  }

  const LpSolution sol = solve_dense_lp(lp);
  if (sol.status == LpStatus::IterationLimit)
    throw NumericalFailure("config LP: simplex iteration cap exceeded");
  if (sol.status != LpStatus::Optimal)
    throw NumericalFailure("config LP: solver reported infeasible/unbounded");

  double volume = 0.0;
  for (const auto& c : inst.workload.classes) volume += c.prob * c.size;

  ConfigLpSolution out;
  out.bins_per_item = sol.objective;
  out.config_rates = sol.x;
  const double waste = inst.capacity * sol.objective - volume;
  if (waste < -1e-6) throw NumericalFailure("config LP: negative waste");
  out.waste_rate = std::max(0.0, waste);
  return out;
}

double solve_config_lp(const PackingInstance& instance) {
  return solve_config_lp_full(instance).waste_rate;
}

}  // namespace binpack
