#pragma once

// Shared helpers for the unit and acceptance suites: small independent
// oracles and generators. Everything here stays independent of the
// implementation paths it is used to check.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "binpack/model.hpp"
#include "binpack/oracle.hpp"
#include "binpack/policies.hpp"
#include "binpack/rng.hpp"

namespace binpack::test {

inline LevelProfile make_profile(int capacity, const std::vector<int64_t>& counts) {
  LevelProfile profile(capacity);
  for (size_t h = 0; h < counts.size(); ++h)
    profile.add(static_cast<int>(h) + 1, counts[h]);
  return profile;
}

// Exhaustive branch-and-bound over bin assignments; usable up to ~12 items.
inline int bnb_min_bins(std::vector<int> items, int capacity) {
  std::sort(items.rbegin(), items.rend());
  int best = static_cast<int>(items.size());
  if (best == 0) return 0;
  std::vector<int> loads;
  std::function<void(size_t)> rec = [&](size_t idx) {
    if (static_cast<int>(loads.size()) >= best) return;
    if (idx == items.size()) {
      best = static_cast<int>(loads.size());
      return;
    }
    std::set<int> tried;
    for (size_t b = 0; b < loads.size(); ++b) {
      if (loads[b] + items[idx] > capacity) continue;
      if (!tried.insert(loads[b]).second) continue;
      loads[b] += items[idx];
      rec(idx + 1);
      loads[b] -= items[idx];
    }
    loads.push_back(items[idx]);
    rec(idx + 1);
    loads.pop_back();
  };
  rec(0);
  return best;
}

// Candidate set of a primal-dual policy scored by the full-Lagrangian oracle.
inline std::vector<ScoredOption> oracle_options(const LevelProfile& profile, int size,
                                                double eps, LagrangianKind kind) {
  const int b = profile.capacity();
  std::vector<ScoredOption> options;
  if (kind == LagrangianKind::Quad) {
    for (int h = 0; h + size <= b; ++h) {
      const Placement p = (h >= 1 && profile.at(h) > 0) ? Placement::existing(h)
                                                        : Placement::fresh(h);
      options.push_back({p, lagrangian_delta(profile, p, size, eps, kind)});
    }
  } else {
    const Placement fresh = Placement::fresh(0);
    options.push_back({fresh, lagrangian_delta(profile, fresh, size, eps, kind)});
    for (int h = 1; h + size <= b; ++h) {
      if (profile.at(h) == 0) continue;
      const Placement p = Placement::existing(h);
      options.push_back({p, lagrangian_delta(profile, p, size, eps, kind)});
    }
  }
  return options;
}

inline PackingInstance make_instance(int capacity, std::vector<int> sizes,
                                     std::vector<double> probs) {
  PackingInstance instance;
  instance.capacity = capacity;
  for (size_t j = 0; j < sizes.size(); ++j)
    instance.workload.classes.push_back({sizes[j], probs[j], std::nullopt});
  instance.validate();
  return instance;
}

// Random valid instance with J <= max_types distinct sizes below capacity.
inline PackingInstance random_instance(Rng& rng, int max_capacity = 30, int max_types = 4) {
  const int capacity = 3 + static_cast<int>(rng.below(static_cast<uint64_t>(max_capacity - 2)));
  const int max_j =
      std::min<int>(max_types, capacity - 1);
  const int j = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_j)));
  std::set<int> sizes;
  while (static_cast<int>(sizes.size()) < j)
    sizes.insert(1 + static_cast<int>(rng.below(static_cast<uint64_t>(capacity - 1))));
  std::vector<int> size_list(sizes.begin(), sizes.end());
  std::vector<double> probs;
  double total = 0.0;
  for (int k = 0; k < j; ++k) {
    const double w = 0.05 + rng.uniform01();
    probs.push_back(w);
    total += w;
  }
  for (auto& p : probs) p /= total;
  return make_instance(capacity, size_list, probs);
}

}  // namespace binpack::test
