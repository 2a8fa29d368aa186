#include "cli.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "magicsim/errors.h"
#include "magicsim/json_io.h"
#include "magicsim/lowering.h"
#include "magicsim/manifest.h"
#include "magicsim/metrics.h"
#include "magicsim/profile.h"
#include "magicsim/qasm.h"
#include "magicsim/scheduler.h"
#include "magicsim/sweep.h"

namespace magicsim::cli {

namespace {

namespace fs = std::filesystem;

const std::set<std::string> kSimulationKeys = {
    "mechanism",      "mechanism_config", "mode",       "trials",
    "seed",           "rz_handling",      "priority_update", "max_cycles",
    "handoff_latency", "fixup_duration",   "durations",  "cost_units",
    "cost_per_logical_qubit", "decompositions"};

std::set<std::string> allowed_keys(const std::string& command) {
  if (command == "analyze") {
    return {"decompositions"};
  }
  std::set<std::string> keys = kSimulationKeys;
  if (command == "simulate") {
    keys.insert({"F", "trace"});
  } else if (command == "sweep") {
    keys.insert({"f_min", "f_max", "eps"});
  } else if (command == "sensitivity") {
    keys.insert({"per_list", "d_list", "f_list"});
  }
  return keys;
}

Json default_options(const std::string& command) {
  if (command == "analyze") {
    return Json{{"decompositions", nullptr}};
  }
  Json j{{"mechanism", "distillation"},
         {"mechanism_config", Json::object()},
         {"mode", "D"},
         {"trials", 100},
         {"seed", 0},
         {"rz_handling", "as-one-state"},
         {"priority_update", "full"},
         {"max_cycles", 100'000'000},
         {"handoff_latency", 1},
         {"fixup_duration", 1},
         {"durations", Json::object()},
         {"cost_units", "logical-tiles"},
         {"cost_per_logical_qubit", nullptr},
         {"decompositions", nullptr}};
  if (command == "simulate") {
    j["F"] = 1;
    j["trace"] = false;
  } else if (command == "sweep") {
    j["f_min"] = 1;
    j["f_max"] = 100;
    j["eps"] = 0.01;
  } else if (command == "sensitivity") {
    j["per_list"] = nullptr;
    j["d_list"] = nullptr;
    j["f_list"] = nullptr;
  }
  return j;
}

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + what + " '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json load_decompositions(const Json& value) {
  if (value.is_string()) {
    const std::string path = value.get<std::string>();
    return parse_json(read_file(path, "decomposition table"), path);
  }
  return value;
}

// Applies a config document (or replayed options) on top of `opts`.
void overlay(Json& opts, const Json& doc, const std::string& command, const std::string& what) {
  if (!doc.is_object()) {
    throw ConfigError(what + " must be a JSON object");
  }
  const auto allowed = allowed_keys(command);
  for (const auto& [key, value] : doc.items()) {
    if (key == "threads" || key == "resolved_mechanism_config") {
      continue;
    }
    if (!allowed.count(key)) {
      throw ConfigError("unknown key '" + key + "' in " + what + " for command '" + command + "'");
    }
    if (key == "mechanism_config") {
      if (!value.is_object()) {
        throw ConfigError("mechanism_config must be a JSON object");
      }
      for (const auto& [k, v] : value.items()) {
        opts["mechanism_config"][k] = v;
      }
    } else if (key == "decompositions") {
      opts[key] = load_decompositions(value);
    } else {
      opts[key] = value;
    }
  }
}

template <class T>
T get(const Json& opts, const std::string& key) {
  try {
    return opts.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("option '" + key + "' is missing or has the wrong type");
  }
}

int get_int(const Json& opts, const std::string& key) {
  if (!opts.at(key).is_number_integer()) {
    throw ConfigError("option '" + key + "' must be an integer");
  }
  return get<int>(opts, key);
}

template <class T>
std::vector<T> get_list(const Json& opts, const std::string& key) {
  const Json& v = opts.at(key);
  if (v.is_null()) {
    throw ConfigError("option '" + key + "' is required");
  }
  if (!v.is_array() || v.empty()) {
    throw ConfigError("option '" + key + "' must be a non-empty list");
  }
  return get<std::vector<T>>(opts, key);
}

struct Settings {
  SimConfig base;
  int trials = 1;
  std::uint64_t seed = 0;
  DecompositionTable table = DecompositionTable::builtin();
};

Settings resolve(const Json& opts) {
  Settings s;
  if (!opts.contains("mechanism")) {
    if (!opts.at("decompositions").is_null()) {
      s.table = DecompositionTable::builtin().merged_with(
          DecompositionTable::from_json(nlohmann::json::parse(opts.at("decompositions").dump())));
    }
    return s;
  }
  const Mechanism m = parse_mechanism(get<std::string>(opts, "mechanism"));
  s.base.mechanism = mechanism_from_json(m, opts.at("mechanism_config"));
  s.base.mode = parse_mode(get<std::string>(opts, "mode"));
  s.base.rz_expand = parse_rz_handling(get<std::string>(opts, "rz_handling"));
  s.base.priority_update = parse_priority_update(get<std::string>(opts, "priority_update"));
  s.base.max_cycles = get<Cycle>(opts, "max_cycles");
  s.base.handoff_latency = get_int(opts, "handoff_latency");
  s.base.fixup_duration = get_int(opts, "fixup_duration");
  s.base.durations = get<std::map<std::string, int>>(opts, "durations");
  s.base.cost_units = parse_cost_units(get<std::string>(opts, "cost_units"));
  if (!opts.at("cost_per_logical_qubit").is_null()) {
    s.base.cost_per_logical_qubit = get<double>(opts, "cost_per_logical_qubit");
  }
  if (opts.contains("F")) {
    s.base.F = get_int(opts, "F");
  }
  s.trials = get_int(opts, "trials");
  if (s.trials < 1) {
    throw ConfigError("trials must be >= 1");
  }
  if (!opts.at("seed").is_number_unsigned() && !opts.at("seed").is_number_integer()) {
    throw ConfigError("option 'seed' must be a non-negative integer");
  }
  s.seed = get<std::uint64_t>(opts, "seed");
  if (!opts.at("decompositions").is_null()) {
    s.table = DecompositionTable::builtin().merged_with(
        DecompositionTable::from_json(nlohmann::json::parse(opts.at("decompositions").dump())));
  }
  validate(s.base);
  return s;
}

// Rounded for people; files keep full precision.
std::string sig4(double x) {
  std::ostringstream out;
  out << std::setprecision(4) << x;
  return out.str();
}

struct Output {
  std::string name;
  std::string content;
};

void write_outputs(const std::string& out_dir, const std::vector<Output>& files, RunManifest manifest) {
  if (out_dir.empty()) {
    return;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw InputError("cannot create output directory '" + out_dir + "': " + ec.message());
  }
  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << content)) {
      throw InputError("cannot write '" + path.string() + "'");
    }
  };
  for (const Output& o : files) {
    write(o.name, o.content);
    manifest.outputs.push_back(o.name);
  }
  write("manifest.json", dump(to_json(manifest)));
}

struct Invocation {
  std::string command;
  std::string input;
  Json options;
  std::string out_dir;
  int threads = 1;
};

std::string canonical_input(const std::string& path) {
  std::error_code ec;
  const fs::path abs = fs::absolute(path, ec);
  return ec ? path : abs.lexically_normal().string();
}

RunManifest make_manifest(const Invocation& inv, const std::string& input_hash,
                          const Settings& s) {
  RunManifest m;
  m.command = inv.command;
  m.input_path = canonical_input(inv.input);
  m.input_sha256 = input_hash;
  m.base_seed = s.seed;
  m.options = inv.options;
  if (inv.options.contains("mechanism")) {
    m.options["mechanism_config"] = to_json(s.base.mechanism);
    m.options["resolved_mechanism_config"] =
        to_json(resolve_defaults(s.base.mechanism, s.base.cost_units));
  }
  return m;
}

int run_analyze(const Invocation& inv, const Settings& s, const std::string& hash, std::ostream& out) {
  const CircuitDag dag = load_qasm_file(inv.input, s.table);
  const StaticProfile profile = static_profile(dag);
  Json j = to_json(profile);
  j["qubits"] = dag.qubit_count();
  j["gates"] = dag.size();
  std::ostringstream layers;
  layers << "layer,nonclifford_count\n";
  for (std::size_t i = 0; i < profile.per_layer_demand.size(); ++i) {
    layers << i << ',' << profile.per_layer_demand[i] << '\n';
  }
  out << dump(j);
  write_outputs(inv.out_dir, {{"profile.json", dump(j)}, {"layers.csv", layers.str()}},
                make_manifest(inv, hash, s));
  return kExitOk;
}

Json metric_json(const TrialAggregate& a, double MetricSummary::*field) {
  return Json{{"C", a.cycles.*field},         {"V", a.volume.*field},
              {"peak_demand", a.peak_demand.*field}, {"fixups", a.fixups.*field},
              {"stalls", a.stalls.*field},    {"injections", a.injections.*field},
              {"aborts", a.aborts.*field}};
}

int run_simulate(const Invocation& inv, const Settings& s, const std::string& hash,
                 std::ostream& out) {
  const CircuitDag dag = load_qasm_file(inv.input, s.table);
  std::vector<SimResult> results(static_cast<std::size_t>(s.trials));
  parallel_for(results.size(), inv.threads, [&](std::size_t t) {
    SimConfig cfg = s.base;
    cfg.trial_seed = sweep_trial_seed(s.seed, cfg.F, static_cast<int>(t));
    try {
      results[t] = simulate(dag, cfg);
    } catch (const SimulationError& e) {
      throw SimulationError("trial " + std::to_string(t) + ": " + e.what());
    }
  });
  const TrialAggregate agg = aggregate_trials(results);
  const Cycle static_cycles = static_cycle_count(dag, s.base);

  Json j{{"mechanism", to_string(mechanism_of(s.base.mechanism))},
         {"mode", to_string(s.base.mode)},
         {"F", s.base.F},
         {"trials", s.trials},
         {"seed", s.seed},
         {"q_total", results.front().q_total},
         {"static_cycles", static_cycles},
         {"single_sample", agg.single_sample},
         {"mean", metric_json(agg, &MetricSummary::mean)},
         {"stddev", metric_json(agg, &MetricSummary::stddev)},
         {"min", metric_json(agg, &MetricSummary::min)},
         {"max", metric_json(agg, &MetricSummary::max)}};
  if (static_cycles > 0) {
    j["mean_overhead_ratio"] = agg.cycles.mean / static_cast<double>(static_cycles);
  }
  Json per_trial = Json::array();
  for (const SimResult& r : results) {
    per_trial.push_back(to_json(r, false));
  }
  j["trial_results"] = per_trial;

  out << to_string(mechanism_of(s.base.mechanism)) << " mode " << to_string(s.base.mode)
      << " F=" << s.base.F << " trials=" << s.trials << '\n'
      << "  mean C = " << sig4(agg.cycles.mean) << " (std " << sig4(agg.cycles.stddev) << ")\n"
      << "  mean V = " << sig4(agg.volume.mean) << " (std " << sig4(agg.volume.stddev) << ")\n"
      << "  mean peak demand = " << sig4(agg.peak_demand.mean)
      << ", mean fixups = " << sig4(agg.fixups.mean) << ", mean stalls = " << sig4(agg.stalls.mean)
      << '\n';
  if (static_cycles > 0) {
    out << "  overhead vs static (" << static_cycles << " cycles) = "
        << sig4(agg.cycles.mean / static_cast<double>(static_cycles)) << '\n';
  }

  std::vector<Output> files{{"result.json", dump(j)}};
  if (get<bool>(inv.options, "trace")) {
    files.push_back({"trace.csv", trace_csv(results.front())});
  }
  write_outputs(inv.out_dir, files, make_manifest(inv, hash, s));
  return kExitOk;
}

int run_sweep(const Invocation& inv, const Settings& s, const std::string& hash, std::ostream& out) {
  const CircuitDag dag = load_qasm_file(inv.input, s.table);
  SweepOptions opts;
  opts.base = s.base;
  opts.f_min = get_int(inv.options, "f_min");
  opts.f_max = get_int(inv.options, "f_max");
  opts.epsilon = get<double>(inv.options, "eps");
  opts.trials = s.trials;
  opts.base_seed = s.seed;
  opts.threads = inv.threads;
  const SweepResult r = sweep_factories(dag, opts);
  const Json summary = sweep_summary_json(r);
  out << to_string(r.mechanism) << " mode " << to_string(r.mode) << " F in [" << opts.f_min
      << ", " << opts.f_max << "], " << r.trials << " trials\n"
      << "  F* = " << r.F_star << ", F_plateau = " << r.F_plateau << ", F_det = " << r.F_det
      << ", savings = " << (r.F_det - r.F_star) << '\n'
      << "  F_naive(peak) = " << r.F_naive_peak << ", F_naive(avg) = " << r.F_naive_avg << '\n';
  write_outputs(inv.out_dir, {{"sweep.csv", sweep_csv(r)}, {"summary.json", dump(summary)}},
                make_manifest(inv, hash, s));
  return kExitOk;
}

int run_sensitivity(const Invocation& inv, const Settings& s, const std::string& hash,
                    std::ostream& out) {
  const CircuitDag dag = load_qasm_file(inv.input, s.table);
  SensitivityOptions opts;
  opts.base = s.base;
  opts.per_list = get_list<double>(inv.options, "per_list");
  opts.distance_list = get_list<int>(inv.options, "d_list");
  opts.f_list = get_list<int>(inv.options, "f_list");
  opts.trials = s.trials;
  opts.base_seed = s.seed;
  opts.threads = inv.threads;
  const auto cells = sensitivity_grid(dag, opts);
  for (const SensitivityCell& c : cells) {
    out << "  p=" << sig4(c.p) << " d=" << c.d << " F=" << c.F
        << " mean V = " << sig4(c.stats.volume.mean) << '\n';
  }
  write_outputs(inv.out_dir, {{"grid.csv", sensitivity_csv(cells)}}, make_manifest(inv, hash, s));
  return kExitOk;
}

int execute(const Invocation& inv, std::ostream& out) {
  const std::string hash = sha256_file(inv.input);
  const Settings s = resolve(inv.options);
  if (inv.command == "analyze") {
    return run_analyze(inv, s, hash, out);
  }
  if (inv.command == "simulate") {
    return run_simulate(inv, s, hash, out);
  }
  if (inv.command == "sweep") {
    return run_sweep(inv, s, hash, out);
  }
  return run_sensitivity(inv, s, hash, out);
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& flag) {
  std::vector<T> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream conv(item);
    T v{};
    if (item.empty() || !(conv >> v) || !conv.eof()) {
      throw InputError("bad value '" + item + "' in " + flag);
    }
    values.push_back(v);
  }
  if (values.empty() || (!text.empty() && text.back() == ',')) {
    throw InputError(flag + " needs a comma-separated, non-empty list");
  }
  return values;
}

Json param_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return Json(text);
  }
}

// Flag values as given on the command line; unset ones stay empty.
struct Flags {
  std::string circuit;
  std::string config;
  std::string out;
  int threads = 0;
  std::string mechanism, mode, rz_handling, priority_update, cost_units, decompositions;
  int F = 0, trials = 0, f_min = 0, f_max = 0, handoff = 0, fixup_duration = 0;
  std::uint64_t seed = 0;
  Cycle max_cycles = 0;
  double eps = 0.0;
  std::string per_list, d_list, f_list;
  std::vector<std::string> params;
  bool trace = false;
};

void add_simulation_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--mechanism", f.mechanism, "distillation | cultivation | rz");
  cmd->add_option("--mode", f.mode, "A | B | C | D");
  cmd->add_option("--trials", f.trials, "Trials per F value");
  cmd->add_option("--seed", f.seed, "Base seed");
  cmd->add_option("--rz-handling", f.rz_handling, "as-one-state | expand:n");
  cmd->add_option("--priority-update", f.priority_update, "static | full");
  cmd->add_option("--max-cycles", f.max_cycles, "Cycle limit per trial");
  cmd->add_option("--handoff", f.handoff, "Cycles from production to consumability");
  cmd->add_option("--fixup-duration", f.fixup_duration, "Cycles per Clifford fixup");
  cmd->add_option("--cost-units", f.cost_units, "logical-tiles | physical");
  cmd->add_option("--param", f.params, "Mechanism field override, key=value (repeatable)");
}

void add_common_flags(CLI::App* cmd, Flags& f, bool needs_input = true) {
  if (needs_input) {
    cmd->add_option("circuit", f.circuit, "OpenQASM 2.0 file")->required();
    cmd->add_option("--config", f.config, "JSON config file");
    cmd->add_option("--decompositions", f.decompositions, "JSON decomposition table");
  }
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--threads", f.threads, "Worker threads (results do not depend on it)");
}

// Flags the user actually passed, as option keys.
Json given_flags(CLI::App* cmd, const Flags& f) {
  Json j = Json::object();
  auto given = [&](const char* name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--mechanism")) j["mechanism"] = f.mechanism;
  if (given("--mode")) j["mode"] = f.mode;
  if (given("-F")) j["F"] = f.F;
  if (given("--trials")) j["trials"] = f.trials;
  if (given("--seed")) j["seed"] = f.seed;
  if (given("--rz-handling")) j["rz_handling"] = f.rz_handling;
  if (given("--priority-update")) j["priority_update"] = f.priority_update;
  if (given("--max-cycles")) j["max_cycles"] = f.max_cycles;
  if (given("--handoff")) j["handoff_latency"] = f.handoff;
  if (given("--fixup-duration")) j["fixup_duration"] = f.fixup_duration;
  if (given("--cost-units")) j["cost_units"] = f.cost_units;
  if (given("--decompositions")) j["decompositions"] = f.decompositions;
  if (given("--f-min")) j["f_min"] = f.f_min;
  if (given("--f-max")) j["f_max"] = f.f_max;
  if (given("--eps")) j["eps"] = f.eps;
  if (given("--per-list")) j["per_list"] = parse_list<double>(f.per_list, "--per-list");
  if (given("--d-list")) j["d_list"] = parse_list<int>(f.d_list, "--d-list");
  if (given("--f-list")) j["f_list"] = parse_list<int>(f.f_list, "--f-list");
  if (given("--trace")) j["trace"] = f.trace;
  if (given("--param")) {
    Json params = Json::object();
    for (const std::string& p : f.params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw InputError("--param expects key=value, got '" + p + "'");
      }
      params[p.substr(0, eq)] = param_value(p.substr(eq + 1));
    }
    j["mechanism_config"] = params;
  }
  return j;
}

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

Invocation from_command_line(CLI::App* cmd, const Flags& f) {
  Invocation inv;
  inv.command = cmd->get_name();
  inv.input = f.circuit;
  inv.out_dir = f.out;
  inv.threads = f.threads > 0 ? f.threads : default_threads();
  inv.options = default_options(inv.command);
  if (!f.config.empty()) {
    const Json doc = parse_json(read_file(f.config, "config file"), f.config);
    overlay(inv.options, doc, inv.command, "config file '" + f.config + "'");
    if (f.threads <= 0 && doc.contains("threads") && doc["threads"].is_number_integer()) {
      inv.threads = std::max(1, doc["threads"].get<int>());
    }
  }
  const Json flags = given_flags(cmd, f);
  overlay(inv.options, flags, inv.command, "command-line flags");
  if (flags.contains("rz_handling") && inv.options.value("mechanism", "") != "distillation" &&
      inv.options.value("mechanism", "") != "cultivation") {
    throw InputError("--rz-handling applies only to --mechanism distillation or cultivation");
  }
  return inv;
}

Invocation from_manifest(const std::string& path, const std::string& out_override, int threads) {
  const RunManifest m = manifest_from_json(parse_json(read_file(path, "manifest"), path));
  static const std::set<std::string> kCommands = {"analyze", "simulate", "sweep", "sensitivity"};
  if (!kCommands.count(m.command)) {
    throw ConfigError("manifest names unknown command '" + m.command + "'");
  }
  if (sha256_file(m.input_path) != m.input_sha256) {
    throw InputError("input '" + m.input_path + "' changed since the manifest was written");
  }
  Invocation inv;
  inv.command = m.command;
  inv.input = m.input_path;
  inv.out_dir = out_override.empty() ? fs::path(path).parent_path().string() : out_override;
  inv.threads = threads > 0 ? threads : default_threads();
  inv.options = default_options(m.command);
  overlay(inv.options, m.options, m.command, "manifest options");
  return inv;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic magic-state production and scheduling simulator", "magicsim"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* analyze = app.add_subcommand("analyze", "Static non-Clifford demand profile");
  add_common_flags(analyze, f);

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Run trials at one factory count");
  add_common_flags(simulate_cmd, f);
  add_simulation_flags(simulate_cmd, f);
  simulate_cmd->add_option("-F", f.F, "Number of production units");
  simulate_cmd->add_flag("--trace", f.trace, "Write the first trial's demand trace CSV");

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep the number of production units");
  add_common_flags(sweep, f);
  add_simulation_flags(sweep, f);
  sweep->add_option("--f-min", f.f_min, "Smallest F");
  sweep->add_option("--f-max", f.f_max, "Largest F");
  sweep->add_option("--eps", f.eps, "Plateau tolerance");

  CLI::App* sensitivity = app.add_subcommand("sensitivity", "Volume over a (p, d, F) grid");
  add_common_flags(sensitivity, f);
  add_simulation_flags(sensitivity, f);
  sensitivity->add_option("--per-list", f.per_list, "Physical error rates, comma-separated");
  sensitivity->add_option("--d-list", f.d_list, "Code distances, comma-separated");
  sensitivity->add_option("--f-list", f.f_list, "Factory counts, comma-separated");

  std::string manifest_path;
  CLI::App* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay->add_option("manifest", manifest_path, "manifest.json written by an earlier run")->required();
  add_common_flags(replay, f, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    Invocation inv;
    if (replay->parsed()) {
      inv = from_manifest(manifest_path, f.out, f.threads);
    } else {
      for (CLI::App* cmd : {analyze, simulate_cmd, sweep, sensitivity}) {
        if (cmd->parsed()) {
          inv = from_command_line(cmd, f);
        }
      }
    }
    return execute(inv, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const SimulationError& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitSimulationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSimulationError;
  }
}

}  // namespace magicsim::cli
