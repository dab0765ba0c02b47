// Command-line surface: distribution classification, stream packing runs,
// departure simulations, parameter sweeps, and the exact offline optimum.
//
// Exit codes: 0 ok, 2 usage/validation, 3 internal invariant failure,
// 4 resource guard.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "binpack/engine.hpp"
#include "binpack/errors.hpp"
#include "binpack/model.hpp"
#include "binpack/oracle.hpp"
#include "binpack/policies.hpp"
#include "binpack/traceio.hpp"
#include "binpack/version.hpp"
#include "binpack/wastelp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace binpack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitGuard = 4;

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    try {
      out.push_back(std::stoi(token));
    } catch (const std::exception&) {
      throw ValidationError(what + ": cannot parse \"" + token + "\" as an integer");
    }
  }
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    try {
      out.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ValidationError(what + ": cannot parse \"" + token + "\" as a number");
    }
  }
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

std::vector<uint64_t> parse_seed_list(const std::string& text) {
  std::vector<uint64_t> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    try {
      out.push_back(std::stoull(token));
    } catch (const std::exception&) {
      throw ValidationError("--seeds: cannot parse \"" + token + "\" as an integer");
    }
  }
  if (out.empty()) throw ValidationError("--seeds: empty list");
  return out;
}

PackingInstance make_instance(int capacity, const std::vector<int>& sizes,
                              const std::vector<double>& probs) {
  if (sizes.size() != probs.size())
    throw ValidationError("--sizes and --probs must have the same length");
  PackingInstance instance;
  instance.capacity = capacity;
  for (size_t j = 0; j < sizes.size(); ++j)
    instance.workload.classes.push_back({sizes[j], probs[j], std::nullopt});
  instance.validate();
  return instance;
}

PolicyKind make_policy(const std::string& name, const std::string& schedule, int capacity,
                       uint64_t n, bool departures) {
  EpsilonSchedule sched;
  const bool fixed = schedule == "fixed";
  if (!fixed && schedule != "anytime")
    throw ValidationError("--schedule must be \"fixed\" or \"anytime\"");
  if (name == "pd-quad") {
    sched = fixed ? EpsilonSchedule::quad_fixed(capacity, n)
                  : EpsilonSchedule::quad_anytime(capacity);
    if (departures) sched = sched.with_departures_aware();
    return PolicyKind::pd_quad(sched);
  }
  if (name == "pd-exp") {
    sched = fixed ? EpsilonSchedule::exp_fixed(capacity, n)
                  : EpsilonSchedule::exp_anytime(capacity);
    if (departures) sched = sched.with_departures_aware();
    return PolicyKind::pd_exp(sched);
  }
  if (name == "ss") return PolicyKind::sum_of_squares();
  if (name == "bf") return PolicyKind::best_fit();
  throw ValidationError("unknown policy \"" + name +
                        "\" (expected pd-quad, pd-exp, ss or bf)");
}

json manifest_base(const std::string& command) {
  json m;
  m["artifact"] = {{"name", kArtifactName}, {"version", kArtifactVersion}};
  m["command"] = command;
  return m;
}

void write_manifest(const fs::path& path, const json& manifest) {
  write_text_file(path.string(), manifest.dump(2) + "\n");
}

void ensure_parent_dir(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::string sanitize_number_token(double v) {
  std::string s = format_real(v);
  std::string out;
  for (char c : s) {
    if (c == '+') continue;
    out += (c == '.') ? 'p' : c;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ClassifyArgs {
  int capacity = 0;
  std::string sizes, probs;
};

int cmd_classify(const ClassifyArgs& args, bool as_json) {
  const auto sizes = parse_int_list(args.sizes, "--sizes");
  const auto probs = parse_double_list(args.probs, "--probs");
  const PackingInstance instance = make_instance(args.capacity, sizes, probs);
  const WasteLp lp = build_waste_lp(instance);
  const WasteLpSolution sol = solve_lp(lp);
  const DistributionClass cls = sol.waste_rate > 1e-7 ? DistributionClass::LinearWaste
                                                      : DistributionClass::PerfectlyPackable;
  if (as_json) {
    json out;
    out["capacity"] = instance.capacity;
    out["sizes"] = sizes;
    out["class"] = to_string(cls);
    out["waste_rate"] = sol.waste_rate;
    out["flows"] = json::array();
    for (int j = 0; j < lp.num_types; ++j) {
      for (int h = 0; h < lp.capacity; ++h) {
        const double v = sol.flows[static_cast<size_t>(lp.var_index(j, h))];
        if (v > 1e-12)
          out["flows"].push_back({{"size", lp.sizes[static_cast<size_t>(j)]},
                                  {"level", h},
                                  {"rate", v}});
      }
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "class=" << to_string(cls) << "\n";
    std::cout << "waste_rate=" << format_real(sol.waste_rate) << "\n";
    for (int j = 0; j < lp.num_types; ++j) {
      for (int h = 0; h < lp.capacity; ++h) {
        const double v = sol.flows[static_cast<size_t>(lp.var_index(j, h))];
        if (v > 1e-12)
          std::cout << "v(size=" << lp.sizes[static_cast<size_t>(j)] << ",h=" << h
                    << ")=" << format_real(v) << "\n";
      }
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PackArgs {
  int capacity = 0;
  std::string sizes, probs;
  std::string policy = "pd-exp";
  std::string schedule = "anytime";
  uint64_t n = 0;
  uint64_t snapshot = 0;
  std::string out;
};

int cmd_pack(const PackArgs& args, uint64_t seed) {
  const auto sizes = parse_int_list(args.sizes, "--sizes");
  const auto probs = parse_double_list(args.probs, "--probs");
  if (args.n < 1) throw ValidationError("--n must be >= 1");
  if (args.out.empty()) throw ValidationError("--out is required");

  StreamRun run;
  run.instance = make_instance(args.capacity, sizes, probs);
  run.policy = make_policy(args.policy, args.schedule, args.capacity, args.n, false);
  run.n = args.n;
  run.seed = seed;
  run.snapshot_every = args.snapshot > 0 ? args.snapshot : std::max<uint64_t>(1, args.n / 100);

  const StreamResult result = run_stream(run);

  const fs::path csv_path(args.out);
  ensure_parent_dir(csv_path);
  write_text_file(csv_path.string(), levels_csv_stream(result.samples, args.capacity));

  json manifest = manifest_base("pack");
  manifest["parameters"] = {{"capacity", args.capacity}, {"sizes", sizes},
                            {"probs", probs},           {"policy", args.policy},
                            {"schedule", args.schedule}, {"n", args.n},
                            {"snapshot_every", run.snapshot_every}};
  manifest["seed"] = seed;
  manifest["outputs"] = {csv_path.string()};
  fs::path manifest_path = csv_path;
  manifest_path.replace_extension(".manifest.json");
  write_manifest(manifest_path, manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string policy = "bf";
  std::string out;
  int top_configs = -1;
};

int cmd_simulate(const SimulateArgs& args, std::optional<uint64_t> seed_override) {
  if (args.out.empty()) throw ValidationError("--out prefix is required");
  Scenario scenario = scenario_from_json_file(args.scenario);
  if (seed_override) scenario.seed = *seed_override;
  if (args.top_configs >= 0) scenario.config_top_k = args.top_configs;
  const PolicyKind policy =
      make_policy(args.policy, "anytime", scenario.capacity, 0, true);

  const SimResult result = run_timed(scenario, policy);

  const fs::path levels_path(args.out + "_levels.csv");
  const fs::path configs_path(args.out + "_configs.csv");
  const fs::path manifest_path(args.out + "_manifest.json");
  ensure_parent_dir(levels_path);
  write_text_file(levels_path.string(), levels_csv_timed(result.samples, scenario.capacity));
  write_text_file(configs_path.string(), configs_csv(result.samples));

  json manifest = manifest_base("simulate");
  manifest["parameters"] = {{"scenario_file", args.scenario}, {"policy", args.policy}};
  manifest["scenario"] = json::parse(scenario_to_json_text(scenario));
  manifest["seed"] = scenario.seed;
  manifest["outputs"] = {levels_path.string(), configs_path.string()};
  manifest["counters"] = {{"arrivals", result.arrivals}, {"departures", result.departures}};
  write_manifest(manifest_path, manifest);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string scenario;
  std::string policies;
  std::string lambdas;
  std::string seeds;
  std::string out;
  unsigned jobs = 1;
};

struct SweepRunSpec {
  std::string policy;
  double lambda = 0.0;
  uint64_t seed = 0;
  std::string stem;
};

struct SweepOutcome {
  bool ok = false;
  std::string error;
  // summary statistics
  size_t samples = 0;
  double final_time = 0.0;
  int64_t final_true_waste = 0;
  double steady_true_waste = 0.0;
  double steady_gap_waste = 0.0;
  double steady_items = 0.0;
  double time_to_steady_band = -1.0;
};

SweepOutcome run_one_sweep(const Scenario& base, const SweepRunSpec& spec,
                           const fs::path& dir) {
  SweepOutcome out;
  Scenario scenario = scenario_scaled(base, spec.lambda);
  scenario.seed = spec.seed;
  const PolicyKind policy = make_policy(spec.policy, "anytime", scenario.capacity, 0, true);
  const SimResult result = run_timed(scenario, policy);

  write_text_file((dir / (spec.stem + "_levels.csv")).string(),
                  levels_csv_timed(result.samples, scenario.capacity));
  write_text_file((dir / (spec.stem + "_configs.csv")).string(),
                  configs_csv(result.samples));

  // Steady state estimated over the final 20% of the horizon.
  const double cutoff = 0.8 * scenario.horizon;
  double sum_true = 0, sum_gap = 0, sum_items = 0;
  size_t tail = 0;
  for (const auto& s : result.samples) {
    if (s.time >= cutoff) {
      sum_true += static_cast<double>(s.true_waste);
      sum_gap += static_cast<double>(s.gap_waste);
      sum_items += static_cast<double>(s.item_count);
      ++tail;
    }
  }
  out.samples = result.samples.size();
  out.final_time = result.samples.back().time;
  out.final_true_waste = result.samples.back().true_waste;
  if (tail > 0) {
    out.steady_true_waste = sum_true / static_cast<double>(tail);
    out.steady_gap_waste = sum_gap / static_cast<double>(tail);
    out.steady_items = sum_items / static_cast<double>(tail);
  }
  // First entry into the +/-20% band around the steady estimate.
  const double band = 0.2 * std::max(out.steady_true_waste, 1.0);
  for (const auto& s : result.samples) {
    if (std::abs(static_cast<double>(s.true_waste) - out.steady_true_waste) <= band) {
      out.time_to_steady_band = s.time;
      break;
    }
  }
  out.ok = true;
  return out;
}

int cmd_sweep(const SweepArgs& args) {
  if (args.out.empty()) throw ValidationError("--out directory is required");
  if (args.policies.empty()) throw ValidationError("--policies: empty list");
  std::vector<std::string> policies;
  {
    std::string token;
    std::istringstream in(args.policies);
    while (std::getline(in, token, ',')) {
      if (!token.empty()) policies.push_back(token);
    }
    if (policies.empty()) throw ValidationError("--policies: empty list");
  }
  const auto lambdas = parse_double_list(args.lambdas, "--lambdas");
  const auto seeds = parse_seed_list(args.seeds);

  const Scenario base = scenario_from_json_file(args.scenario);
  for (const auto& name : policies)
    make_policy(name, "anytime", base.capacity, 0, true);  // validate names up front
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw ValidationError("--lambdas: rates must be > 0");
  }

  const fs::path dir(args.out);
  fs::create_directories(dir);

  std::vector<SweepRunSpec> specs;
  for (const auto& policy : policies) {
    for (double lambda : lambdas) {
      for (uint64_t seed : seeds) {
        SweepRunSpec spec{policy, lambda, seed, ""};
        spec.stem = policy + "_lam" + sanitize_number_token(lambda) + "_seed" +
                    std::to_string(seed);
        specs.push_back(std::move(spec));
      }
    }
  }

  std::vector<SweepOutcome> outcomes(specs.size());
  std::atomic<size_t> cursor{0};
  const unsigned jobs = std::max(1u, args.jobs);
  auto worker = [&]() {
    while (true) {
      const size_t i = cursor.fetch_add(1);
      if (i >= specs.size()) return;
      try {
        outcomes[i] = run_one_sweep(base, specs[i], dir);
      } catch (const std::exception& e) {
        outcomes[i].ok = false;
        outcomes[i].error = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::string summary =
      "policy,lambda,seed,samples,final_time,final_true_waste,steady_true_waste,"
      "steady_gap_waste,steady_items,time_to_steady_band\n";
  json runs = json::array();
  size_t failures = 0;
  for (size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    const auto& o = outcomes[i];
    json r = {{"policy", spec.policy}, {"lambda", spec.lambda}, {"seed", spec.seed},
              {"stem", spec.stem},     {"status", o.ok ? "ok" : "error"}};
    if (!o.ok) {
      r["error"] = o.error;
      ++failures;
    } else {
      summary += spec.policy + ',' + format_real(spec.lambda) + ',' +
                 std::to_string(spec.seed) + ',' + std::to_string(o.samples) + ',' +
                 format_real(o.final_time) + ',' + std::to_string(o.final_true_waste) +
                 ',' + format_real(o.steady_true_waste) + ',' +
                 format_real(o.steady_gap_waste) + ',' + format_real(o.steady_items) +
                 ',' + format_real(o.time_to_steady_band) + '\n';
    }
    runs.push_back(std::move(r));
  }
  write_text_file((dir / "summary.csv").string(), summary);

  json manifest = manifest_base("sweep");
  manifest["parameters"] = {{"scenario_file", args.scenario}, {"policies", policies},
                            {"lambdas", lambdas},             {"seeds", seeds}};
  manifest["scenario"] = json::parse(scenario_to_json_text(base));
  manifest["runs"] = runs;
  manifest["outputs"] = {(dir / "summary.csv").string()};
  write_manifest(dir / "manifest.json", manifest);

  if (failures > 0) {
    std::cerr << failures << " of " << specs.size()
              << " runs failed; see manifest.json\n";
    return kExitInvariant;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct OptArgs {
  int capacity = 0;
  std::string counts;
};

int cmd_opt(const OptArgs& args, bool as_json) {
  ItemMultiset items;
  {
    std::string token;
    std::istringstream in(args.counts);
    std::vector<std::pair<int, int64_t>> pairs;
    while (std::getline(in, token, ',')) {
      const auto colon = token.find(':');
      if (colon == std::string::npos)
        throw ValidationError("--counts: expected size:count pairs, got \"" + token + "\"");
      try {
        pairs.emplace_back(std::stoi(token.substr(0, colon)),
                           std::stoll(token.substr(colon + 1)));
      } catch (const std::exception&) {
        throw ValidationError("--counts: cannot parse \"" + token + "\"");
      }
    }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [size, count] : pairs) {
      items.sizes.push_back(size);
      items.counts.push_back(count);
    }
  }
  const OfflineOptResult result = exact_offline_opt(items, args.capacity);
  if (as_json) {
    json out = {{"capacity", args.capacity},
                {"min_bins", result.min_bins},
                {"waste", result.waste}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "bins=" << result.min_bins << "\n";
    std::cout << "waste=" << result.waste << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online stochastic bin packing: primal-dual policies, waste LP "
               "classification, and an event-driven simulator with departures."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kArtifactName) + " " + kArtifactVersion);

  uint64_t seed = 1;
  bool seed_given = false;
  bool as_json = false;
  app.add_flag("--json", as_json, "emit JSON instead of text where supported");
  app.add_option("--seed", seed, "master seed")->each([&](const std::string&) {
    seed_given = true;
  });

  ClassifyArgs classify_args;
  auto* classify_cmd = app.add_subcommand("classify", "solve the waste LP and classify");
  classify_cmd->add_option("--capacity", classify_args.capacity, "bin capacity")->required();
  classify_cmd->add_option("--sizes", classify_args.sizes, "item sizes, e.g. 2,3")->required();
  classify_cmd->add_option("--probs", classify_args.probs, "probabilities, e.g. 0.8,0.2")
      ->required();

  PackArgs pack_args;
  auto* pack_cmd = app.add_subcommand("pack", "arrival-only packing run");
  pack_cmd->add_option("--capacity", pack_args.capacity)->required();
  pack_cmd->add_option("--sizes", pack_args.sizes)->required();
  pack_cmd->add_option("--probs", pack_args.probs)->required();
  pack_cmd->add_option("--policy", pack_args.policy, "pd-quad|pd-exp|ss|bf");
  pack_cmd->add_option("--schedule", pack_args.schedule, "fixed|anytime");
  pack_cmd->add_option("--n", pack_args.n, "number of items")->required();
  pack_cmd->add_option("--snapshot", pack_args.snapshot, "rows every k items (default n/100)");
  pack_cmd->add_option("--out", pack_args.out, "levels CSV path")->required();

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "event-driven run with departures");
  sim_cmd->add_option("--scenario", sim_args.scenario, "scenario JSON file")->required();
  sim_cmd->add_option("--policy", sim_args.policy, "pd-quad|pd-exp|ss|bf");
  sim_cmd->add_option("--out", sim_args.out, "output path prefix")->required();
  sim_cmd->add_option("--top-configs", sim_args.top_configs,
                      "configurations tracked per sample");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "policy x rate x seed cross-product");
  sweep_cmd->add_option("--scenario", sweep_args.scenario)->required();
  sweep_cmd->add_option("--policies", sweep_args.policies, "comma-separated policies")
      ->required();
  sweep_cmd->add_option("--lambdas", sweep_args.lambdas, "comma-separated arrival rates")
      ->required();
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "comma-separated seeds")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "output directory")->required();
  sweep_cmd->add_option("--jobs", sweep_args.jobs, "parallel runs (default 1)");

  OptArgs opt_args;
  auto* opt_cmd = app.add_subcommand("opt", "exact offline optimum for an item multiset");
  opt_cmd->add_option("--capacity", opt_args.capacity)->required();
  opt_cmd->add_option("--counts", opt_args.counts, "size:count pairs, e.g. 2:6,3:2")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(classify_cmd)) return cmd_classify(classify_args, as_json);
    if (app.got_subcommand(pack_cmd)) return cmd_pack(pack_args, seed);
    if (app.got_subcommand(sim_cmd))
      return cmd_simulate(sim_args, seed_given ? std::optional<uint64_t>(seed) : std::nullopt);
    if (app.got_subcommand(sweep_cmd)) return cmd_sweep(sweep_args);
    if (app.got_subcommand(opt_cmd)) return cmd_opt(opt_args, as_json);
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const ExplosionGuard& e) {
    std::cerr << "resource guard: " << e.what() << "\n";
    return kExitGuard;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitInvariant;
  }
}
