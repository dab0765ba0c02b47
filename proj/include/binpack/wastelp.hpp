#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binpack/model.hpp"
#include "binpack/simplex.hpp"

namespace binpack {

// Flow LP over variables v(j,h): the long-run rate at which type-j items are
// sent to bins of level h, for h = 0..B-1. Variables with s_j > B-h are fixed
// to zero; references to negative levels are treated as zero flows. The
// optimum is the per-item waste of the offline optimum.
struct WasteLp {
  int capacity = 0;
  int num_types = 0;
  std::vector<int> sizes;
  std::vector<double> probs;
  std::vector<char> fixed_zero;  // J*B mask, index j*B + h
  std::vector<int> column_of;    // J*B -> LP column, or -1 when fixed
  LpProblem lp;                  // over the active columns only
  int balance_rows = 0;          // levels 1..B-1
  int probability_rows = 0;      // one per type

  int num_variables() const { return num_types * capacity; }
  int var_index(int type, int level) const { return type * capacity + level; }
};

struct WasteLpSolution {
  double waste_rate = 0.0;
  std::vector<double> flows;  // J*B, index j*B + h; fixed variables are 0
  bool optimal = false;
};

enum class DistributionClass { LinearWaste, PerfectlyPackable };

const char* to_string(DistributionClass c);

WasteLp build_waste_lp(const PackingInstance& instance);
WasteLpSolution solve_lp(const WasteLp& lp);
WasteLpSolution solve_waste_lp(const PackingInstance& instance);

// LinearWaste iff the optimal waste rate exceeds 1e-7 (an order of magnitude
// above solver tolerance). The bounded-waste subcase of PerfectlyPackable is
// not distinguished.
DistributionClass classify(const PackingInstance& instance);

// One feasible bin content as counts per item type.
struct BinConfiguration {
  std::vector<int> counts;
  int level = 0;
  bool maximal = false;
};

// All type-count vectors fitting in a bin to which no further item can be
// added. Throws ExplosionGuard when the enumeration exceeds the node budget.
std::vector<BinConfiguration> enumerate_maximal_configs(const PackingInstance& instance,
                                                        uint64_t guard = 1'000'000);
std::vector<BinConfiguration> enumerate_maximal_configs(int capacity,
                                                        const std::vector<int>& sizes,
                                                        uint64_t guard = 1'000'000);

// Independent cross-check for the waste rate, formulated over whole-bin
// configurations: minimize bins per item subject to covering the per-type
// rates, with waste recovered as B * bins - mean item volume. Agrees with
// solve_waste_lp on every instance (both compute the optimal per-item waste).
struct ConfigLpSolution {
  double waste_rate = 0.0;
  double bins_per_item = 0.0;
  std::vector<double> config_rates;  // bins of each configuration per item
};

ConfigLpSolution solve_config_lp_full(const PackingInstance& instance);
double solve_config_lp(const PackingInstance& instance);

}  // namespace binpack
