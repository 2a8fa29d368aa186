#include "magicsim/json_io.h"

#include <functional>
#include <map>

#include "magicsim/errors.h"

namespace magicsim {

namespace {

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <class T>
T read(const Json& v, const std::string& field) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field '" + field + "' has the wrong type");
  }
}

int read_int(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) {
    throw ConfigError("field '" + field + "' must be an integer");
  }
  return read<int>(v, field);
}

double read_double(const Json& v, const std::string& field) {
  if (!v.is_number()) {
    throw ConfigError("field '" + field + "' must be a number");
  }
  return v.get<double>();
}

bool read_bool(const Json& v, const std::string& field) {
  if (!v.is_boolean()) {
    throw ConfigError("field '" + field + "' must be true or false");
  }
  return v.get<bool>();
}

template <class T, class F>
void read_optional(const Json& v, const std::string& field, std::optional<T>& out, F reader) {
  if (v.is_null()) {
    out.reset();
  } else {
    out = reader(v, field);
  }
}

using FieldTable = std::map<std::string, std::function<void(const Json&)>>;

void apply_fields(const Json& j, const FieldTable& fields, const std::string& what) {
  if (!j.is_object()) {
    throw ConfigError(what + " config must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw ConfigError("unknown field '" + key + "' in " + what + " config");
    }
    it->second(value);
  }
}

void merge_into(DistillationConfig& c, const Json& j) {
  apply_fields(j,
               {
                   {"p_phys", [&](const Json& v) { c.p_phys = read_double(v, "p_phys"); }},
                   {"t_prod", [&](const Json& v) { c.t_prod = read_int(v, "t_prod"); }},
                   {"abort_rate", [&](const Json& v) { read_optional(v, "abort_rate", c.abort_rate, read_double); }},
                   {"stagger", [&](const Json& v) { c.stagger = read_bool(v, "stagger"); }},
                   {"cost_per_factory",
                    [&](const Json& v) { read_optional(v, "cost_per_factory", c.cost_per_factory, read_double); }},
               },
               "distillation");
}

void merge_into(CultivationConfig& c, const Json& j) {
  apply_fields(j,
               {
                   {"d1", [&](const Json& v) { c.d1 = read_int(v, "d1"); }},
                   {"d2", [&](const Json& v) { c.d2 = read_int(v, "d2"); }},
                   {"r1", [&](const Json& v) { c.r1 = read_int(v, "r1"); }},
                   {"r2", [&](const Json& v) { c.r2 = read_int(v, "r2"); }},
                   {"p_phys", [&](const Json& v) { c.p_phys = read_double(v, "p_phys"); }},
                   {"q1", [&](const Json& v) { read_optional(v, "q1", c.q1, read_double); }},
                   {"q2", [&](const Json& v) { read_optional(v, "q2", c.q2, read_double); }},
                   {"t_inject", [&](const Json& v) { c.t_inject = read_int(v, "t_inject"); }},
                   {"t_escape", [&](const Json& v) { read_optional(v, "t_escape", c.t_escape, read_int); }},
                   {"buffer_capacity",
                    [&](const Json& v) { read_optional(v, "buffer_capacity", c.buffer_capacity, read_int); }},
                   {"cost_per_unit",
                    [&](const Json& v) { read_optional(v, "cost_per_unit", c.cost_per_unit, read_double); }},
                   {"early_abort", [&](const Json& v) { c.early_abort = read_bool(v, "early_abort"); }},
               },
               "cultivation");
}

void merge_into(RzSynthConfig& c, const Json& j) {
  apply_fields(j,
               {
                   {"d", [&](const Json& v) { c.d = read_int(v, "d"); }},
                   {"p_phys", [&](const Json& v) { c.p_phys = read_double(v, "p_phys"); }},
                   {"q_round", [&](const Json& v) { read_optional(v, "q_round", c.q_round, read_double); }},
                   {"t_attempt", [&](const Json& v) { read_optional(v, "t_attempt", c.t_attempt, read_int); }},
                   {"unit_budget_policy",
                    [&](const Json& v) {
                      if (!v.is_string()) {
                        throw ConfigError("field 'unit_budget_policy' must be a string");
                      }
                      c.unit_budget_policy = v.get<std::string>();
                    }},
                   {"cost_per_unit",
                    [&](const Json& v) { read_optional(v, "cost_per_unit", c.cost_per_unit, read_double); }},
               },
               "rz");
}

}  // namespace

Json to_json(const MechanismConfig& cfg) {
  return std::visit(overloaded{
                        [](const DistillationConfig& c) {
                          return Json{{"p_phys", c.p_phys},
                                      {"t_prod", c.t_prod},
                                      {"abort_rate", optional_json(c.abort_rate)},
                                      {"stagger", c.stagger},
                                      {"cost_per_factory", optional_json(c.cost_per_factory)}};
                        },
                        [](const CultivationConfig& c) {
                          return Json{{"d1", c.d1},
                                      {"d2", c.d2},
                                      {"r1", c.r1},
                                      {"r2", c.r2},
                                      {"p_phys", c.p_phys},
                                      {"q1", optional_json(c.q1)},
                                      {"q2", optional_json(c.q2)},
                                      {"t_inject", c.t_inject},
                                      {"t_escape", optional_json(c.t_escape)},
                                      {"buffer_capacity", optional_json(c.buffer_capacity)},
                                      {"cost_per_unit", optional_json(c.cost_per_unit)},
                                      {"early_abort", c.early_abort}};
                        },
                        [](const RzSynthConfig& c) {
                          return Json{{"d", c.d},
                                      {"p_phys", c.p_phys},
                                      {"q_round", optional_json(c.q_round)},
                                      {"t_attempt", optional_json(c.t_attempt)},
                                      {"unit_budget_policy", c.unit_budget_policy},
                                      {"cost_per_unit", optional_json(c.cost_per_unit)}};
                        },
                    },
                    cfg);
}

MechanismConfig merge_mechanism_json(const MechanismConfig& base, const Json& j) {
  MechanismConfig out = base;
  std::visit([&](auto& c) { merge_into(c, j); }, out);
  validate(out);
  return out;
}

MechanismConfig mechanism_from_json(Mechanism m, const Json& j) {
  return merge_mechanism_json(default_config(m), j);
}

Json to_json(const SimConfig& cfg) {
  Json durations = Json::object();
  for (const auto& [k, v] : cfg.durations) {
    durations[k] = v;
  }
  return Json{{"mechanism", to_string(mechanism_of(cfg.mechanism))},
              {"mechanism_config", to_json(cfg.mechanism)},
              {"F", cfg.F},
              {"mode", to_string(cfg.mode)},
              {"rz_handling", rz_handling_name(cfg.rz_expand)},
              {"priority_update", to_string(cfg.priority_update)},
              {"trial_seed", cfg.trial_seed},
              {"max_cycles", cfg.max_cycles},
              {"handoff_latency", cfg.handoff_latency},
              {"fixup_duration", cfg.fixup_duration},
              {"durations", durations},
              {"cost_units", to_string(cfg.cost_units)},
              {"cost_per_logical_qubit", optional_json(cfg.cost_per_logical_qubit)}};
}

Json to_json(const SimResult& r, bool include_traces) {
  Json j{{"cycles", r.cycles},
         {"q_total", r.q_total},
         {"volume", r.volume},
         {"fixup_count", r.fixup_count},
         {"injection_count", r.injection_count},
         {"abort_count", r.abort_count},
         {"stall_count", r.stall_count},
         {"max_concurrent_rz_units", r.max_concurrent_rz_units},
         {"peak_demand", r.peak_demand},
         {"node_count", r.node_count},
         {"trial_seed", r.trial_seed}};
  if (include_traces) {
    j["demand_trace"] = r.demand_trace;
    j["stall_trace"] = r.stall_trace;
  }
  return j;
}

Json to_json(const StaticProfile& p) {
  return Json{{"t_count", p.t_count},
              {"rz_count", p.rz_count},
              {"depth_cycles", p.depth_cycles},
              {"gamma_peak", p.gamma_peak},
              {"gamma_avg", p.gamma_avg},
              {"critical_path_ncd", p.critical_path_ncd},
              {"burstiness", Json{{"peak_to_mean", p.peak_to_mean}, {"cv", p.demand_cv}}},
              {"per_layer_demand", p.per_layer_demand}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in " + what + ": " + e.what());
  }
}

}  // namespace magicsim
