#pragma once

#include <cstdint>
#include <vector>

#include "binpack/model.hpp"

namespace binpack {

struct ItemMultiset {
  std::vector<int> sizes;      // strictly increasing
  std::vector<int64_t> counts; // one per size

  int64_t total_items() const;
  int64_t volume() const;
  void validate(int capacity) const;
};

struct OfflineOptResult {
  int64_t min_bins = 0;
  int64_t waste = 0;  // capacity * min_bins - volume
};

// Exact offline optimum via dynamic programming over remaining-count vectors;
// transitions are the maximal bin configurations clipped to what remains.
// Throws ExplosionGuard when the state space exceeds the guard.
OfflineOptResult exact_offline_opt(const ItemMultiset& items, int capacity,
                                   uint64_t state_guard = 10'000'000);

enum class LagrangianKind { Quad, Exp };

// Ground-truth score: evaluates the full Lagrangian before and after the
// placement and returns the difference, including the -s term that the
// incremental policy scores drop.
double lagrangian_delta(const LevelProfile& profile, const Placement& placement,
                        int size, double eps, LagrangianKind kind);

// n times the optimal per-item waste.
double lp_lower_bound(const PackingInstance& instance, uint64_t n);

}  // namespace binpack
