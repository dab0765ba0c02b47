#include "binpack/model.hpp"

#include <algorithm>
#include <cmath>
#include <cassert>

namespace binpack {

void Workload::validate_and_normalize() {
  if (classes.empty()) throw ValidationError("workload: needs at least one item class");
  double sum = 0.0;
  int prev_size = 0;
  for (size_t j = 0; j < classes.size(); ++j) {
    const auto& c = classes[j];
    if (c.size < 1) throw ValidationError("workload: item sizes must be >= 1");
    if (c.size <= prev_size)
      throw ValidationError("workload: item sizes must be strictly increasing");
    prev_size = c.size;
    if (!(c.prob > 0.0) || c.prob > 1.0)
      throw ValidationError("workload: probabilities must lie in (0,1]");
    if (c.mean_residence && !(*c.mean_residence > 0.0))
      throw ValidationError("workload: mean residence times must be positive");
    sum += c.prob;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("workload: probabilities sum to " + std::to_string(sum) +
                          ", expected 1 within 1e-9");
  for (auto& c : classes) c.prob /= sum;
}

int Workload::max_size() const {
  return classes.empty() ? 0 : classes.back().size;
}

bool Workload::has_residence_times() const {
  return std::all_of(classes.begin(), classes.end(),
                     [](const ItemClass& c) { return c.mean_residence.has_value(); });
}

double Workload::mean_residence_for(int size) const {
  for (const auto& c : classes) {
    if (c.size == size) {
      if (!c.mean_residence)
        throw ValidationError("workload: class of size " + std::to_string(size) +
                              " has no mean residence time");
      return *c.mean_residence;
    }
  }
  throw ValidationError("workload: no class of size " + std::to_string(size));
}

void PackingInstance::validate() {
  workload.validate_and_normalize();
  if (capacity < 2) throw ValidationError("instance: capacity must be >= 2");
  if (capacity >= (1 << 16)) throw ValidationError("instance: capacity must be < 2^16");
  if (workload.max_size() >= capacity)
    throw ValidationError("instance: the largest item size must be smaller than the capacity");
}

int64_t LevelProfile::open_bins() const {
  int64_t total = 0;
  for (int h = 1; h < capacity_; ++h) total += counts_[static_cast<size_t>(h)];
  return total;
}

int64_t LevelProfile::gap_waste() const {
  int64_t total = 0;
  for (int h = 1; h < capacity_; ++h)
    total += counts_[static_cast<size_t>(h)] * (capacity_ - h);
  return total;
}

std::string config_key(const Bin& bin) {
  std::vector<int> sizes;
  sizes.reserve(bin.items.size());
  for (const auto& item : bin.items) sizes.push_back(item.size);
  std::sort(sizes.rbegin(), sizes.rend());
  std::string key;
  if (bin.hole > 0) {
    key += 'h';
    key += std::to_string(bin.hole);
    key += '+';
  }
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0) key += '+';
    key += std::to_string(sizes[i]);
  }
  return key;
}

SystemState::SystemState(int capacity)
    : capacity_(capacity),
      by_level_(static_cast<size_t>(capacity) + 1),
      profile_(capacity) {
  if (capacity < 2) throw ValidationError("system state: capacity must be >= 2");
}

void SystemState::index_insert(Bin& bin) {
  auto& level = by_level_[static_cast<size_t>(bin.level)];
  bin.slot = static_cast<uint32_t>(level.size());
  level.push_back(bin.id);
  profile_.add(bin.level, +1);
}

void SystemState::index_remove(Bin& bin) {
  auto& level = by_level_[static_cast<size_t>(bin.level)];
  const uint32_t i = bin.slot;
  level[i] = level.back();
  level.pop_back();
  if (i < level.size()) bins_.at(level[i]).slot = i;
  profile_.add(bin.level, -1);
}

uint64_t SystemState::apply_placement(const Placement& placement, uint64_t item_id,
                                      int item_size, const BinSelector& pick) {
  if (item_size < 1 || item_size >= capacity_)
    throw IllegalPlacement("item size " + std::to_string(item_size) +
                           " outside [1, capacity-1]");
  if (placement.kind == Placement::Kind::ExistingAtLevel) {
    const int h = placement.level;
    if (h < 1 || h >= capacity_)
      throw IllegalPlacement("target level " + std::to_string(h) + " out of range");
    if (h + item_size > capacity_)
      throw IllegalPlacement("placing size " + std::to_string(item_size) +
                             " at level " + std::to_string(h) + " exceeds capacity");
    auto& level = by_level_[static_cast<size_t>(h)];
    if (level.empty())
      throw IllegalPlacement("no bin at level " + std::to_string(h));
    const size_t idx = pick ? pick(level.size()) : 0;
    if (idx >= level.size()) throw InvariantError("bin selector returned an out-of-range index");
    Bin& bin = bins_.at(level[idx]);
    index_remove(bin);
    bin.items.push_back({item_id, item_size});
    bin.level += item_size;
    index_insert(bin);
    total_item_volume_ += item_size;
    item_count_ += 1;
    return bin.id;
  }

  const int hole = placement.level;
  if (hole < 0 || hole + item_size > capacity_)
    throw IllegalPlacement("new bin with hole " + std::to_string(hole) +
                           " and item size " + std::to_string(item_size) +
                           " exceeds capacity");
  const uint64_t id = next_bin_id_++;
  auto [it, inserted] = bins_.emplace(id, Bin{id, hole, hole + item_size,
                                              {{item_id, item_size}}, 0});
  assert(inserted);
  (void)inserted;
  index_insert(it->second);
  hole_volume_ += hole;
  total_item_volume_ += item_size;
  item_count_ += 1;
  return id;
}

void SystemState::apply_departure(uint64_t bin_id, uint64_t item_id) {
  auto it = bins_.find(bin_id);
  if (it == bins_.end()) throw UnknownBin("no bin with id " + std::to_string(bin_id));
  Bin& bin = it->second;
  auto pos = std::find_if(bin.items.begin(), bin.items.end(),
                          [item_id](const BinItem& b) { return b.id == item_id; });
  if (pos == bin.items.end())
    throw UnknownItem("item " + std::to_string(item_id) + " not resident in bin " +
                      std::to_string(bin_id));
  const int size = pos->size;
  *pos = bin.items.back();
  bin.items.pop_back();
  index_remove(bin);
  bin.level -= size;
  total_item_volume_ -= size;
  item_count_ -= 1;
  if (bin.items.empty()) {
    hole_volume_ -= bin.hole;
    bins_.erase(it);
  } else {
    index_insert(bin);
  }
}

uint64_t SystemState::add_bin(int hole, const std::vector<BinItem>& items) {
  if (items.empty()) throw InfeasibleInitial("initial bins must hold at least one item");
  int level = hole;
  for (const auto& item : items) {
    if (item.size < 1) throw InfeasibleInitial("initial item sizes must be >= 1");
    level += item.size;
  }
  if (hole < 0 || level > capacity_)
    throw InfeasibleInitial("initial bin level " + std::to_string(level) +
                            " exceeds capacity " + std::to_string(capacity_));
  const uint64_t id = next_bin_id_++;
  auto [it, inserted] = bins_.emplace(id, Bin{id, hole, level, items, 0});
  assert(inserted);
  (void)inserted;
  index_insert(it->second);
  hole_volume_ += hole;
  total_item_volume_ += level - hole;
  item_count_ += static_cast<int64_t>(items.size());
  return id;
}

const Bin* SystemState::find_bin(uint64_t id) const {
  auto it = bins_.find(id);
  return it == bins_.end() ? nullptr : &it->second;
}

void SystemState::check_consistency() const {
  LevelProfile fresh(capacity_);
  int64_t volume = 0, items = 0, holes = 0;
  for (const auto& [id, bin] : bins_) {
    if (bin.items.empty()) throw InvariantError("empty bin survived");
    int level = bin.hole;
    for (const auto& item : bin.items) level += item.size;
    if (level != bin.level) throw InvariantError("bin level out of sync");
    if (bin.level > capacity_ || bin.level <= bin.hole)
      throw InvariantError("bin level out of range");
    fresh.add(bin.level, +1);
    volume += bin.level - bin.hole;
    items += static_cast<int64_t>(bin.items.size());
    holes += bin.hole;
    const auto& level_vec = by_level_[static_cast<size_t>(bin.level)];
    if (bin.slot >= level_vec.size() || level_vec[bin.slot] != id)
      throw InvariantError("level index out of sync");
  }
  for (int h = 1; h <= capacity_; ++h) {
    if (fresh.at(h) != profile_.at(h)) throw InvariantError("profile count mismatch");
    if (static_cast<int64_t>(by_level_[static_cast<size_t>(h)].size()) != fresh.at(h))
      throw InvariantError("level index size mismatch");
  }
  if (volume != total_item_volume_ || items != item_count_ || holes != hole_volume_)
    throw InvariantError("aggregate totals out of sync");
  const WasteReport report = compute_waste(*this);
  if (report.true_waste < 0 || report.true_waste != report.gap_waste + report.hole_volume)
    throw InvariantError("waste accounting mismatch");
}

WasteReport compute_waste(const SystemState& state) {
  WasteReport report;
  report.gap_waste = state.profile().gap_waste();
  report.true_waste =
      static_cast<int64_t>(state.capacity()) * state.bin_count() - state.total_item_volume();
  report.hole_volume = state.hole_volume();
  return report;
}

}  // namespace binpack
