#include "binpack/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "binpack/errors.hpp"
#include "binpack/wastelp.hpp"

namespace binpack {

int64_t ItemMultiset::total_items() const {
  int64_t total = 0;
  for (int64_t c : counts) total += c;
  return total;
}

int64_t ItemMultiset::volume() const {
  int64_t total = 0;
  for (size_t j = 0; j < sizes.size(); ++j) total += counts[j] * sizes[j];
  return total;
}

void ItemMultiset::validate(int capacity) const {
  if (sizes.size() != counts.size())
    throw ValidationError("item multiset: sizes and counts differ in length");
  if (sizes.empty()) throw ValidationError("item multiset: no item types");
  for (size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] < 1 || sizes[j] > capacity)
      throw ValidationError("item multiset: size " + std::to_string(sizes[j]) +
                            " does not fit in a bin of " + std::to_string(capacity));
    if (j > 0 && sizes[j] <= sizes[j - 1])
      throw ValidationError("item multiset: sizes must be strictly increasing");
    if (counts[j] < 0) throw ValidationError("item multiset: negative count");
  }
}

OfflineOptResult exact_offline_opt(const ItemMultiset& items, int capacity,
                                   uint64_t state_guard) {
  items.validate(capacity);
  const size_t ntypes = items.sizes.size();

  uint64_t space = 1;
  for (int64_t c : items.counts) {
    const uint64_t radix = static_cast<uint64_t>(c) + 1;
    if (space > state_guard / radix)
      throw ExplosionGuard("offline OPT: state space exceeds " + std::to_string(state_guard));
    space *= radix;
  }

  const auto configs = enumerate_maximal_configs(capacity, items.sizes);

  std::vector<uint64_t> stride(ntypes, 1);
  for (size_t j = 1; j < ntypes; ++j)
    stride[j] = stride[j - 1] * (static_cast<uint64_t>(items.counts[j - 1]) + 1);

  // Bottom-up over the mixed-radix odometer; every transition strictly
  // reduces the remaining counts, so children are always already solved.
  std::vector<int32_t> bins(space, 0);
  std::vector<int64_t> remaining(ntypes, 0);
  for (uint64_t idx = 1; idx < space; ++idx) {
    size_t j = 0;
    while (true) {
      if (++remaining[j] <= items.counts[j]) break;
      remaining[j] = 0;
      ++j;
    }
    int32_t best = std::numeric_limits<int32_t>::max();
    for (const auto& cfg : configs) {
      uint64_t child = idx;
      bool any = false;
      for (size_t k = 0; k < ntypes; ++k) {
        const int64_t take = std::min<int64_t>(cfg.counts[k], remaining[k]);
        if (take > 0) {
          any = true;
          child -= static_cast<uint64_t>(take) * stride[k];
        }
      }
      if (!any) continue;
      best = std::min(best, static_cast<int32_t>(bins[child] + 1));
    }
    bins[idx] = best;
  }

  OfflineOptResult out;
  out.min_bins = bins[space - 1];
  out.waste = static_cast<int64_t>(capacity) * out.min_bins - items.volume();
  return out;
}

double lagrangian_delta(const LevelProfile& profile, const Placement& placement,
                        int size, double eps, LagrangianKind kind) {
  const int b = profile.capacity();
  if (size < 1 || size >= b) throw IllegalPlacement("lagrangian delta: item size out of range");
  const int h = placement.level;
  const int target = h + size;
  if (target > b) throw IllegalPlacement("lagrangian delta: placement exceeds capacity");
  const bool existing = placement.kind == Placement::Kind::ExistingAtLevel;
  if (existing) {
    if (h < 1 || h >= b || profile.at(h) == 0)
      throw IllegalPlacement("lagrangian delta: no bin at level " + std::to_string(h));
  } else if (h < 0) {
    throw IllegalPlacement("lagrangian delta: negative hole");
  }

  std::vector<int64_t> before(static_cast<size_t>(b), 0);
  for (int level = 1; level < b; ++level) before[static_cast<size_t>(level)] = profile.at(level);
  std::vector<int64_t> after = before;
  if (existing) after[static_cast<size_t>(h)] -= 1;
  if (target < b) after[static_cast<size_t>(target)] += 1;

  if (kind == LagrangianKind::Quad) {
    int64_t pot_before = 0, pot_after = 0;
    for (int level = 1; level < b; ++level) {
      pot_before += before[static_cast<size_t>(level)] * before[static_cast<size_t>(level)];
      pot_after += after[static_cast<size_t>(level)] * after[static_cast<size_t>(level)];
    }
    const double closed_term = target == b ? static_cast<double>(b) : 0.0;
    return closed_term - static_cast<double>(size) +
           (eps / 2.0) * static_cast<double>(pot_after - pot_before);
  }

  int64_t f_before = 0, f_after = 0;
  double v_before = 0.0, v_after = 0.0;
  for (int level = 1; level < b; ++level) {
    f_before += (b - level) * before[static_cast<size_t>(level)];
    f_after += (b - level) * after[static_cast<size_t>(level)];
    v_before += std::exp(-eps * static_cast<double>(before[static_cast<size_t>(level)]));
    v_after += std::exp(-eps * static_cast<double>(after[static_cast<size_t>(level)]));
  }
  return static_cast<double>(f_after - f_before) +
         (static_cast<double>(b) / eps) * (v_after - v_before);
}

double lp_lower_bound(const PackingInstance& instance, uint64_t n) {
  return static_cast<double>(n) * solve_waste_lp(instance).waste_rate;
}

}  // namespace binpack
