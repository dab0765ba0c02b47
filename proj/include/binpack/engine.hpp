#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "binpack/model.hpp"
#include "binpack/policies.hpp"
#include "binpack/rng.hpp"

namespace binpack {

// Inverse-CDF exponential: -mean * ln(u) for u in (0,1].
double exponential_from_uniform(double mean, double u);
double sample_exponential(double mean, Rng& rng);
int64_t sample_poisson(double mean, Rng& rng);

struct TraceSample {
  double time = 0.0;        // simulated time; equals the item index in stream runs
  uint64_t item_index = 0;  // arrivals so far
  int64_t item_count = 0;   // items currently in the system
  int64_t bin_count = 0;
  int64_t gap_waste = 0;
  int64_t true_waste = 0;
  int64_t hole_volume = 0;
  std::vector<int64_t> level_counts;  // N_1 .. N_{B-1}
  std::vector<std::pair<std::string, int64_t>> top_configs;  // most populous first

  bool operator==(const TraceSample&) const = default;
};

TraceSample make_trace_sample(const SystemState& state, double time,
                              uint64_t item_index, int config_top_k);

// ---------------------------------------------------------------------------
// Arrival-only stream driver.

struct StreamRun {
  PackingInstance instance;
  PolicyKind policy;
  uint64_t n = 0;
  uint64_t seed = 0;
  uint64_t snapshot_every = 0;  // 0: only the final sample
  int config_top_k = 0;
};

struct StreamCallbacks {
  // Invoked after each placement with the 1-based arrival index.
  std::function<void(const SystemState&, uint64_t)> after_step;
};

struct StreamResult {
  std::vector<TraceSample> samples;
  SystemState final_state;
};

StreamResult run_stream(const StreamRun& run, const StreamCallbacks& callbacks = {});

// ---------------------------------------------------------------------------
// Continuous-time simulator with Poisson arrivals and exponential departures.

struct Phase {
  double until = 0.0;         // phase is active while time < until
  double arrival_rate = 0.0;  // Poisson rate
  Workload workload;          // every class needs a mean residence time
};

struct ExplicitBinGroup {
  int hole = 0;
  std::vector<int> item_sizes;
  int64_t count = 0;
};

struct InitialState {
  enum class Kind { Empty, ExplicitBins, PerfectPackingSample };

  Kind kind = Kind::Empty;
  std::vector<ExplicitBinGroup> groups;  // ExplicitBins
  double expected_items = 0.0;           // PerfectPackingSample

  static InitialState empty() { return {}; }
  static InitialState explicit_bins(std::vector<ExplicitBinGroup> groups);
  static InitialState perfect_packing(double expected_items);
};

struct Scenario {
  int capacity = 0;
  std::vector<Phase> phases;
  double horizon = 0.0;
  double sample_interval = 1.0;
  InitialState initial;
  uint64_t seed = 0;
  int config_top_k = 12;

  void validate() const;
  const Phase& phase_at(double time) const;
};

struct TimedCallbacks {
  // Invoked on every emitted sample; returning true stops the run.
  std::function<bool(const TraceSample&)> on_sample;
};

struct SimResult {
  std::vector<TraceSample> samples;
  SystemState final_state;
  uint64_t arrivals = 0;
  uint64_t departures = 0;
  bool stopped_early = false;
};

// Event-driven loop. For the primal-dual policies the step-size argument t is
// the number of items present in the system (at least 1).
SimResult run_timed(const Scenario& scenario, const PolicyKind& policy,
                    const TimedCallbacks& callbacks = {});

// Materializes the initial configuration. PerfectPackingSample draws
// per-configuration Poisson bin counts from the optimal whole-bin rates of
// the workload, so every materialized bin is completely full.
SystemState load_initial(const InitialState& initial, int capacity,
                         const Workload& workload, Rng& rng);

// Scenario JSON (keys: capacity, phases[{until, arrival_rate,
// classes[{size, prob, mean_residence}]}], horizon, sample_interval, initial,
// seed).
Scenario scenario_from_json_text(const std::string& text, const std::string& origin = "scenario");
Scenario scenario_from_json_file(const std::string& path);
std::string scenario_to_json_text(const Scenario& scenario);

// Copy with every phase rate scaled so the first phase runs at arrival_rate;
// explicit initial bin counts and expected item counts scale along.
Scenario scenario_scaled(const Scenario& base, double arrival_rate);

}  // namespace binpack
