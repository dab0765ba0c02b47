#include "binpack/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "binpack/errors.hpp"
#include "binpack/wastelp.hpp"

namespace binpack {

namespace {

// Substream tags; one master seed fans out into independent generators.
constexpr uint64_t kStreamArrivals = 1;
constexpr uint64_t kStreamTypes = 2;
constexpr uint64_t kStreamLifetimes = 3;
constexpr uint64_t kStreamBinPick = 4;
constexpr uint64_t kStreamInit = 5;

std::vector<double> cumulative_probs(const Workload& workload) {
  std::vector<double> cum;
  cum.reserve(workload.classes.size());
  double total = 0.0;
  for (const auto& c : workload.classes) {
    total += c.prob;
    cum.push_back(total);
  }
  cum.back() = 1.0;
  return cum;
}

size_t draw_type(const std::vector<double>& cum, Rng& rng) {
  const double u = rng.uniform01();
  for (size_t j = 0; j + 1 < cum.size(); ++j) {
    if (u < cum[j]) return j;
  }
  return cum.size() - 1;
}

}  // namespace

double exponential_from_uniform(double mean, double u) {
  if (!(mean > 0.0)) throw ValidationError("exponential draw: mean must be positive");
  if (!(u > 0.0) || u > 1.0) throw ValidationError("exponential draw: u must lie in (0,1]");
  return -mean * std::log(u);
}

double sample_exponential(double mean, Rng& rng) {
  return exponential_from_uniform(mean, rng.uniform01_pos());
}

int64_t sample_poisson(double mean, Rng& rng) {
  if (!(mean >= 0.0)) throw ValidationError("poisson draw: mean must be >= 0");
  int64_t total = 0;
  // Split large means into independent chunks; the sum stays Poisson.
  while (mean > 30.0) {
    mean -= 16.0;
    const double limit = std::exp(-16.0);
    double p = 1.0;
    int64_t k = 0;
    do {
      ++k;
      p *= rng.uniform01();
    } while (p > limit);
    total += k - 1;
  }
  const double limit = std::exp(-mean);
  double p = 1.0;
  int64_t k = 0;
  do {
    ++k;
    p *= rng.uniform01();
  } while (p > limit);
  return total + k - 1;
}

TraceSample make_trace_sample(const SystemState& state, double time,
                              uint64_t item_index, int config_top_k) {
  TraceSample s;
  s.time = time;
  s.item_index = item_index;
  s.item_count = state.item_count();
  s.bin_count = state.bin_count();
  const WasteReport waste = compute_waste(state);
  s.gap_waste = waste.gap_waste;
  s.true_waste = waste.true_waste;
  s.hole_volume = waste.hole_volume;
  s.level_counts.reserve(static_cast<size_t>(state.capacity()) - 1);
  for (int h = 1; h < state.capacity(); ++h) s.level_counts.push_back(state.profile().at(h));

  if (config_top_k > 0) {
    std::unordered_map<std::string, int64_t> counts;
    counts.reserve(state.bins().size());
    for (const auto& [id, bin] : state.bins()) counts[config_key(bin)] += 1;
    std::vector<std::pair<std::string, int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (ranked.size() > static_cast<size_t>(config_top_k))
      ranked.resize(static_cast<size_t>(config_top_k));
    s.top_configs = std::move(ranked);
  }
  return s;
}

StreamResult run_stream(const StreamRun& run, const StreamCallbacks& callbacks) {
  PackingInstance instance = run.instance;
  instance.validate();
  if (run.n < 1) throw ValidationError("stream run: n must be >= 1");

  Rng types = Rng::substream(run.seed, kStreamTypes);
  Rng binpick = Rng::substream(run.seed, kStreamBinPick);
  BinSelector pick = [&binpick](size_t n) { return static_cast<size_t>(binpick.below(n)); };

  const auto cum = cumulative_probs(instance.workload);
  SystemState state(instance.capacity);
  std::vector<TraceSample> samples;

  for (uint64_t t = 1; t <= run.n; ++t) {
    const size_t j = draw_type(cum, types);
    const int size = instance.workload.classes[j].size;
    const Placement placement =
        choose(run.policy, state.profile(), size, static_cast<double>(t));
    state.apply_placement(placement, t, size, pick);
    if (callbacks.after_step) callbacks.after_step(state, t);
    if (run.snapshot_every > 0 && t % run.snapshot_every == 0)
      samples.push_back(make_trace_sample(state, static_cast<double>(t), t, run.config_top_k));
  }
  if (samples.empty() || samples.back().item_index != run.n)
    samples.push_back(
        make_trace_sample(state, static_cast<double>(run.n), run.n, run.config_top_k));
  return {std::move(samples), std::move(state)};
}

InitialState InitialState::explicit_bins(std::vector<ExplicitBinGroup> groups) {
  InitialState s;
  s.kind = Kind::ExplicitBins;
  s.groups = std::move(groups);
  return s;
}

InitialState InitialState::perfect_packing(double expected_items) {
  InitialState s;
  s.kind = Kind::PerfectPackingSample;
  s.expected_items = expected_items;
  return s;
}

void Scenario::validate() const {
  if (capacity < 2) throw ValidationError("scenario: capacity must be >= 2");
  if (phases.empty()) throw EmptyPhaseList("scenario: needs at least one phase");
  if (!(horizon >= 0.0)) throw ValidationError("scenario: horizon must be >= 0");
  if (!(sample_interval > 0.0)) throw ValidationError("scenario: sample_interval must be > 0");
  double prev = 0.0;
  for (size_t i = 0; i < phases.size(); ++i) {
    const auto& phase = phases[i];
    const std::string where = "scenario.phases[" + std::to_string(i) + "]";
    if (!(phase.arrival_rate > 0.0))
      throw ValidationError(where + ".arrival_rate: must be > 0");
    if (i > 0 && !(phase.until > prev))
      throw ValidationError(where + ".until: phase boundaries must be strictly increasing");
    prev = phase.until;
    Workload workload = phase.workload;
    try {
      workload.validate_and_normalize();
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (workload.max_size() >= capacity)
      throw ValidationError(where + ": item sizes must be smaller than the capacity");
    if (!workload.has_residence_times())
      throw ValidationError(where + ": every class needs a mean_residence");
  }
  if (phases.back().until < horizon)
    throw ValidationError("scenario: last phase must extend to the horizon");
  if (initial.kind == InitialState::Kind::PerfectPackingSample &&
      !(initial.expected_items >= 0.0))
    throw ValidationError("scenario.initial.expected_items: must be >= 0");
}

const Phase& Scenario::phase_at(double time) const {
  for (const auto& phase : phases) {
    if (time < phase.until) return phase;
  }
  return phases.back();
}

SystemState load_initial(const InitialState& initial, int capacity,
                         const Workload& workload, Rng& rng) {
  SystemState state(capacity);
  switch (initial.kind) {
    case InitialState::Kind::Empty:
      break;
    case InitialState::Kind::ExplicitBins: {
      uint64_t next_item = 1;
      for (const auto& group : initial.groups) {
        if (group.count < 0) throw InfeasibleInitial("initial bin count must be >= 0");
        for (int64_t i = 0; i < group.count; ++i) {
          std::vector<BinItem> items;
          items.reserve(group.item_sizes.size());
          for (int size : group.item_sizes) items.push_back({next_item++, size});
          state.add_bin(group.hole, items);
        }
      }
      break;
    }
    case InitialState::Kind::PerfectPackingSample: {
      PackingInstance instance{capacity, workload};
      const ConfigLpSolution lp = solve_config_lp_full(instance);
      if (lp.waste_rate > 1e-9)
        throw InfeasibleInitial("no perfect tiling exists for this workload");
      const auto configs = enumerate_maximal_configs(instance);
      uint64_t next_item = 1;
      for (size_t c = 0; c < configs.size(); ++c) {
        const double rate = lp.config_rates[c];
        if (rate <= 1e-12) continue;
        if (configs[c].level != capacity)
          throw InfeasibleInitial("tiling uses a non-full configuration");
        const int64_t nbins = sample_poisson(initial.expected_items * rate, rng);
        for (int64_t i = 0; i < nbins; ++i) {
          std::vector<BinItem> items;
          for (size_t j = 0; j < configs[c].counts.size(); ++j) {
            for (int k = 0; k < configs[c].counts[j]; ++k)
              items.push_back({next_item++, workload.classes[j].size});
          }
          state.add_bin(0, items);
        }
      }
      break;
    }
  }
  return state;
}

SimResult run_timed(const Scenario& scenario, const PolicyKind& policy,
                    const TimedCallbacks& callbacks) {
  scenario.validate();

  Rng arrivals = Rng::substream(scenario.seed, kStreamArrivals);
  Rng types = Rng::substream(scenario.seed, kStreamTypes);
  Rng lifetimes = Rng::substream(scenario.seed, kStreamLifetimes);
  Rng binpick = Rng::substream(scenario.seed, kStreamBinPick);
  Rng init = Rng::substream(scenario.seed, kStreamInit);
  BinSelector pick = [&binpick](size_t n) { return static_cast<size_t>(binpick.below(n)); };

  struct Departure {
    double time;
    uint64_t seq;
    uint64_t bin_id;
    uint64_t item_id;
    bool operator>(const Departure& other) const {
      if (time != other.time) return time > other.time;
      return seq > other.seq;
    }
  };
  std::priority_queue<Departure, std::vector<Departure>, std::greater<>> departures;
  uint64_t seq = 0;

  SystemState state =
      load_initial(scenario.initial, scenario.capacity, scenario.phases.front().workload, init);

  // Residual lifetimes of pre-loaded items are full exponential draws, which
  // is exact by memorylessness. Bins are visited in id order.
  {
    std::vector<uint64_t> ids;
    ids.reserve(state.bins().size());
    for (const auto& [id, bin] : state.bins()) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    const Workload& wl = scenario.phases.front().workload;
    for (uint64_t id : ids) {
      const Bin* bin = state.find_bin(id);
      for (const auto& item : bin->items) {
        const double mean = wl.mean_residence_for(item.size);
        departures.push({sample_exponential(mean, lifetimes), seq++, id, item.id});
      }
    }
  }

  SimResult result{{}, SystemState(scenario.capacity), 0, 0, false};
  uint64_t next_item_id = static_cast<uint64_t>(state.item_count()) + 1;
  const double inf = std::numeric_limits<double>::infinity();

  size_t phase_idx = 0;
  auto cum = cumulative_probs(scenario.phases[phase_idx].workload);
  double next_arrival =
      sample_exponential(1.0 / scenario.phases[phase_idx].arrival_rate, arrivals);

  uint64_t sample_no = 0;
  double last_sample_time = -1.0;

  auto emit_sample = [&](double time) -> bool {
    TraceSample sample = make_trace_sample(state, time, result.arrivals, scenario.config_top_k);
    const bool stop = callbacks.on_sample && callbacks.on_sample(sample);
    result.samples.push_back(std::move(sample));
    last_sample_time = time;
    return stop;
  };

  while (true) {
    const double t_phase =
        phase_idx + 1 < scenario.phases.size() ? scenario.phases[phase_idx].until : inf;
    const double t_dep = departures.empty() ? inf : departures.top().time;
    const double t_next = std::min({t_phase, next_arrival, t_dep});

    // Samples fire before events carrying the same timestamp.
    while (true) {
      const double t_sample = static_cast<double>(sample_no) * scenario.sample_interval;
      if (t_sample > scenario.horizon || t_sample > t_next) break;
      ++sample_no;
      if (emit_sample(t_sample)) {
        result.stopped_early = true;
        result.final_state = std::move(state);
        return result;
      }
    }
    if (t_next > scenario.horizon) break;

    if (t_phase <= next_arrival && t_phase <= t_dep) {
      // Phase switch: the new rate applies from the boundary onward, so the
      // pending arrival is redrawn (memorylessness makes this exact).
      ++phase_idx;
      cum = cumulative_probs(scenario.phases[phase_idx].workload);
      next_arrival =
          t_phase + sample_exponential(1.0 / scenario.phases[phase_idx].arrival_rate, arrivals);
      continue;
    }

    if (next_arrival <= t_dep) {
      const double now = next_arrival;
      const Workload& wl = scenario.phases[phase_idx].workload;
      const size_t j = draw_type(cum, types);
      const int size = wl.classes[j].size;
      const double lifetime = sample_exponential(*wl.classes[j].mean_residence, lifetimes);
      // The arriving item is included in the in-system count driving epsilon,
      // mirroring the arrival-indexed schedules of the stream setting.
      const double t_for_policy = static_cast<double>(state.item_count() + 1);
      const Placement placement = choose(policy, state.profile(), size, t_for_policy);
      const uint64_t item_id = next_item_id++;
      const uint64_t bin_id = state.apply_placement(placement, item_id, size, pick);
      departures.push({now + lifetime, seq++, bin_id, item_id});
      result.arrivals += 1;
      next_arrival =
          now + sample_exponential(1.0 / scenario.phases[phase_idx].arrival_rate, arrivals);
    } else {
      const Departure dep = departures.top();
      departures.pop();
      state.apply_departure(dep.bin_id, dep.item_id);
      result.departures += 1;
    }
  }

  if (last_sample_time < scenario.horizon) emit_sample(scenario.horizon);
  result.final_state = std::move(state);
  return result;
}

namespace {

using nlohmann::json;

const json& require_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw ValidationError(where + ": missing field \"" + key + "\"");
  return j.at(key);
}

double require_number(const json& j, const char* key, const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number())
    throw ValidationError(where + "." + key + ": expected a number");
  return v.get<double>();
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Map the byte offset to a line/column position.
    size_t line = 1, column = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": JSON parse error: " + e.what());
  }
  if (!j.is_object()) throw ValidationError(origin + ": expected a JSON object");

  Scenario sc;
  sc.capacity = static_cast<int>(require_number(j, "capacity", origin));
  sc.horizon = require_number(j, "horizon", origin);
  sc.sample_interval = require_number(j, "sample_interval", origin);
  sc.seed = j.contains("seed") ? j.at("seed").get<uint64_t>() : 0;
  if (j.contains("config_top_k")) sc.config_top_k = j.at("config_top_k").get<int>();

  const json& phases = require_field(j, "phases", origin);
  if (!phases.is_array() || phases.empty())
    throw ValidationError(origin + ".phases: expected a non-empty array");
  for (size_t i = 0; i < phases.size(); ++i) {
    const std::string where = origin + ".phases[" + std::to_string(i) + "]";
    const json& pj = phases[i];
    Phase phase;
    phase.until = require_number(pj, "until", where);
    phase.arrival_rate = require_number(pj, "arrival_rate", where);
    const json& classes = require_field(pj, "classes", where);
    if (!classes.is_array() || classes.empty())
      throw ValidationError(where + ".classes: expected a non-empty array");
    for (size_t k = 0; k < classes.size(); ++k) {
      const std::string cwhere = where + ".classes[" + std::to_string(k) + "]";
      const json& cj = classes[k];
      ItemClass cls;
      cls.size = static_cast<int>(require_number(cj, "size", cwhere));
      cls.prob = require_number(cj, "prob", cwhere);
      if (cj.contains("mean_residence"))
        cls.mean_residence = cj.at("mean_residence").get<double>();
      phase.workload.classes.push_back(cls);
    }
    sc.phases.push_back(std::move(phase));
  }

  if (j.contains("initial")) {
    const json& ij = j.at("initial");
    const std::string where = origin + ".initial";
    const std::string kind = require_field(ij, "kind", where).get<std::string>();
    if (kind == "empty") {
      sc.initial = InitialState::empty();
    } else if (kind == "explicit_bins") {
      const json& bins = require_field(ij, "bins", where);
      if (!bins.is_array()) throw ValidationError(where + ".bins: expected an array");
      std::vector<ExplicitBinGroup> groups;
      for (size_t g = 0; g < bins.size(); ++g) {
        const std::string gwhere = where + ".bins[" + std::to_string(g) + "]";
        const json& bj = bins[g];
        ExplicitBinGroup group;
        group.hole = bj.contains("hole") ? bj.at("hole").get<int>() : 0;
        group.count = static_cast<int64_t>(require_number(bj, "count", gwhere));
        const json& items = require_field(bj, "items", gwhere);
        if (!items.is_array() || items.empty())
          throw ValidationError(gwhere + ".items: expected a non-empty array of sizes");
        for (const auto& s : items) group.item_sizes.push_back(s.get<int>());
        groups.push_back(std::move(group));
      }
      sc.initial = InitialState::explicit_bins(std::move(groups));
    } else if (kind == "perfect_packing_sample") {
      sc.initial = InitialState::perfect_packing(require_number(ij, "expected_items", where));
    } else {
      throw ValidationError(where + ".kind: unknown kind \"" + kind + "\"");
    }
  }

  sc.validate();
  return sc;
}

Scenario scenario_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario file " + path + ": cannot open");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json_text(buffer.str(), path);
}

std::string scenario_to_json_text(const Scenario& scenario) {
  json j;
  j["capacity"] = scenario.capacity;
  j["horizon"] = scenario.horizon;
  j["sample_interval"] = scenario.sample_interval;
  j["seed"] = scenario.seed;
  j["config_top_k"] = scenario.config_top_k;
  j["phases"] = json::array();
  for (const auto& phase : scenario.phases) {
    json pj;
    pj["until"] = phase.until;
    pj["arrival_rate"] = phase.arrival_rate;
    pj["classes"] = json::array();
    for (const auto& cls : phase.workload.classes) {
      json cj;
      cj["size"] = cls.size;
      cj["prob"] = cls.prob;
      if (cls.mean_residence) cj["mean_residence"] = *cls.mean_residence;
      pj["classes"].push_back(cj);
    }
    j["phases"].push_back(pj);
  }
  json ij;
  switch (scenario.initial.kind) {
    case InitialState::Kind::Empty:
      ij["kind"] = "empty";
      break;
    case InitialState::Kind::ExplicitBins: {
      ij["kind"] = "explicit_bins";
      ij["bins"] = json::array();
      for (const auto& group : scenario.initial.groups) {
        json bj;
        bj["hole"] = group.hole;
        bj["items"] = group.item_sizes;
        bj["count"] = group.count;
        ij["bins"].push_back(bj);
      }
      break;
    }
    case InitialState::Kind::PerfectPackingSample:
      ij["kind"] = "perfect_packing_sample";
      ij["expected_items"] = scenario.initial.expected_items;
      break;
  }
  j["initial"] = ij;
  return j.dump(2) + "\n";
}

Scenario scenario_scaled(const Scenario& base, double arrival_rate) {
  if (!(arrival_rate > 0.0))
    throw ValidationError("scenario scaling: arrival rate must be > 0");
  Scenario sc = base;
  const double factor = arrival_rate / base.phases.front().arrival_rate;
  for (auto& phase : sc.phases) phase.arrival_rate *= factor;
  if (sc.initial.kind == InitialState::Kind::ExplicitBins) {
    for (auto& group : sc.initial.groups)
      group.count = std::llround(static_cast<double>(group.count) * factor);
  } else if (sc.initial.kind == InitialState::Kind::PerfectPackingSample) {
    sc.initial.expected_items *= factor;
  }
  return sc;
}

}  // namespace binpack
