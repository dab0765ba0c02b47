#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "binpack/errors.hpp"

namespace binpack {

struct ItemClass {
  int size = 0;
  double prob = 0.0;
  // Mean sojourn time; only required when the workload drives a simulation
  // with departures.
  std::optional<double> mean_residence;
};

// Discrete item-size distribution. Sizes are strictly increasing integers;
// probabilities are normalized on validation (inputs are accepted when their
// sum is within 1e-9 of 1 and rejected otherwise).
struct Workload {
  std::vector<ItemClass> classes;

  void validate_and_normalize();
  int max_size() const;
  bool has_residence_times() const;
  // Mean residence for a given size; throws ValidationError if the size has
  // no class or the class carries no residence time.
  double mean_residence_for(int size) const;
};

struct PackingInstance {
  int capacity = 0;
  Workload workload;

  void validate();  // validates the workload too
};

// Bin counts per level. Levels 1..B are tracked (B = closed bins); the waste
// summaries only read 1..B-1.
class LevelProfile {
 public:
  LevelProfile() = default;
  explicit LevelProfile(int capacity) : counts_(capacity + 1, 0), capacity_(capacity) {}

  int capacity() const { return capacity_; }
  int64_t at(int h) const { return counts_[static_cast<size_t>(h)]; }
  void add(int h, int64_t delta) { counts_[static_cast<size_t>(h)] += delta; }

  int64_t open_bins() const;
  int64_t gap_waste() const;  // sum over h=1..B-1 of N_h * (B - h)

 private:
  std::vector<int64_t> counts_;
  int capacity_ = 0;
};

// A placement decision: either join an existing bin of the given level, or
// open a fresh bin with a forbidden hole of the given size at the bottom
// (hole 0 means an ordinary empty bin).
struct Placement {
  enum class Kind { ExistingAtLevel, NewBinWithHole };

  Kind kind = Kind::NewBinWithHole;
  int level = 0;

  static Placement existing(int h) { return {Kind::ExistingAtLevel, h}; }
  static Placement fresh(int hole) { return {Kind::NewBinWithHole, hole}; }

  bool operator==(const Placement&) const = default;
};

struct BinItem {
  uint64_t id = 0;
  int size = 0;
};

struct Bin {
  uint64_t id = 0;
  int hole = 0;   // forbidden space at the bottom, reclaimed only when the bin empties
  int level = 0;  // hole + sum of item sizes
  std::vector<BinItem> items;
  uint32_t slot = 0;  // position inside the per-level index
};

struct WasteReport {
  int64_t gap_waste = 0;    // empty space in bins at levels 1..B-1
  int64_t true_waste = 0;   // B * nonempty bins - total item volume
  int64_t hole_volume = 0;  // includes holes inside level-B bins
};

// Canonical form of a bin's content, e.g. "7+7+3+3" or "h1+2+2" for a bin
// with a bottom hole of size 1. Invariant under item insertion order.
std::string config_key(const Bin& bin);

// Picks the index of the receiving bin among n same-level candidates.
using BinSelector = std::function<size_t(size_t)>;

class SystemState {
 public:
  explicit SystemState(int capacity);

  // Places one item according to the decision and returns the bin id.
  // Throws IllegalPlacement when no bin exists at the requested level or the
  // resulting level would exceed the capacity.
  uint64_t apply_placement(const Placement& placement, uint64_t item_id,
                           int item_size, const BinSelector& pick);

  // Removes one item; a bin left empty disappears entirely and its hole, if
  // any, is reclaimed.
  void apply_departure(uint64_t bin_id, uint64_t item_id);

  // Creates a bin with the given hole and resident items in one step; used
  // when materializing initial configurations.
  uint64_t add_bin(int hole, const std::vector<BinItem>& items);

  int capacity() const { return capacity_; }
  const LevelProfile& profile() const { return profile_; }
  int64_t bin_count() const { return static_cast<int64_t>(bins_.size()); }
  int64_t item_count() const { return item_count_; }
  int64_t total_item_volume() const { return total_item_volume_; }
  int64_t hole_volume() const { return hole_volume_; }
  const std::unordered_map<uint64_t, Bin>& bins() const { return bins_; }
  const Bin* find_bin(uint64_t id) const;

  // Recomputes every aggregate from scratch and throws InvariantError on any
  // mismatch. Test hook; not used on hot paths.
  void check_consistency() const;

 private:
  void index_insert(Bin& bin);
  void index_remove(Bin& bin);

  int capacity_ = 0;
  std::unordered_map<uint64_t, Bin> bins_;
  std::vector<std::vector<uint64_t>> by_level_;
  LevelProfile profile_;
  int64_t total_item_volume_ = 0;
  int64_t item_count_ = 0;
  int64_t hole_volume_ = 0;
  uint64_t next_bin_id_ = 1;
};

WasteReport compute_waste(const SystemState& state);

}  // namespace binpack
