#pragma once

// Scenario files:
//   {"rate": {"kind": "sinusoid", "abar": 2.0, "amp": 0.5, "period": 1.0, "phase": 0.0},
//    "b": 0.5, "T": 4.0}
// Rate kinds and their keys ("phase" is optional):
//   constant  {kind, abar}
//   sinusoid  {kind, abar, amp, period, phase}
//   piecewise {kind, abar, breakpoints, levels}
//   table     {kind, abar, knots, values}
// For a sinusoid abar is also the base level. Unknown keys are rejected.

#include <fstream>
#include <initializer_list>
#include <set>
#include <string>

#include <json.hpp>

#include "nbstein/errors.hpp"
#include "nbstein/parasite.hpp"

namespace nbstein {

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::string& where,
                         std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) throw DomainError(where + ": expected a JSON object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    allowed.insert(k);
    if (!obj.contains(k)) throw DomainError(where + ": missing key \"" + k + "\"");
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw DomainError(where + ": unknown key \"" + item.key() + "\"");
    }
  }
}

inline double json_number(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw DomainError(where + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

inline std::vector<double> json_numbers(const nlohmann::json& obj, const char* key,
                                        const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_array()) throw DomainError(where + ": \"" + key + "\" must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw DomainError(where + ": \"" + key + "\" must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace detail

inline ScenarioParams scenario_from_json(const nlohmann::json& j) {
  detail::require_keys(j, "scenario", {"rate", "b", "T"});
  const nlohmann::json& r = j.at("rate");
  if (!r.is_object() || !r.contains("kind") || !r.at("kind").is_string()) {
    throw DomainError("scenario.rate: needs a string \"kind\"");
  }
  const std::string kind = r.at("kind").get<std::string>();
  const std::string where = "scenario.rate(" + kind + ")";
  ScenarioParams sc;
  if (kind == "constant") {
    detail::require_keys(r, where, {"kind", "abar"});
    sc.abar = detail::json_number(r, "abar", where);
    sc.rate = ConstantRate{sc.abar};
  } else if (kind == "sinusoid") {
    detail::require_keys(r, where, {"kind", "abar", "amp", "period"}, {"phase"});
    sc.abar = detail::json_number(r, "abar", where);
    sc.rate = SinusoidRate{sc.abar, detail::json_number(r, "amp", where),
                           detail::json_number(r, "period", where),
                           r.contains("phase") ? detail::json_number(r, "phase", where) : 0.0};
  } else if (kind == "piecewise") {
    detail::require_keys(r, where, {"kind", "abar", "breakpoints", "levels"});
    sc.abar = detail::json_number(r, "abar", where);
    sc.rate = PiecewiseRate{detail::json_numbers(r, "breakpoints", where),
                            detail::json_numbers(r, "levels", where)};
  } else if (kind == "table") {
    detail::require_keys(r, where, {"kind", "abar", "knots", "values"});
    sc.abar = detail::json_number(r, "abar", where);
    sc.rate = TableRate{detail::json_numbers(r, "knots", where),
                        detail::json_numbers(r, "values", where)};
  } else {
    throw DomainError("scenario.rate: unknown kind \"" + kind + "\"");
  }
  sc.b = detail::json_number(j, "b", "scenario");
  sc.T = detail::json_number(j, "T", "scenario");
  sc.validate();
  return sc;
}

inline nlohmann::ordered_json scenario_to_json(const ScenarioParams& sc) {
  nlohmann::ordered_json rate;
  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, ConstantRate>) {
          rate["kind"] = "constant";
          rate["abar"] = sc.abar;
        } else if constexpr (std::is_same_v<R, SinusoidRate>) {
          rate["kind"] = "sinusoid";
          rate["abar"] = sc.abar;
          rate["amp"] = r.amplitude_fraction;
          rate["period"] = r.period;
          rate["phase"] = r.phase;
        } else if constexpr (std::is_same_v<R, PiecewiseRate>) {
          rate["kind"] = "piecewise";
          rate["abar"] = sc.abar;
          rate["breakpoints"] = r.breakpoints;
          rate["levels"] = r.levels;
        } else {
          rate["kind"] = "table";
          rate["abar"] = sc.abar;
          rate["knots"] = r.knots;
          rate["values"] = r.values;
        }
      },
      sc.rate);
  nlohmann::ordered_json out;
  out["rate"] = rate;
  out["b"] = sc.b;
  out["T"] = sc.T;
  return out;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(path + ": " + e.what());
  }
}

inline ScenarioParams load_scenario(const std::string& path) {
  return scenario_from_json(read_json_file(path));
}

/// A named list of scenarios: {"version": 1, "scenarios": [{"name": ..., "scenario": {...}}]}.
struct NamedScenario {
  std::string name;
  ScenarioParams scenario;
};

inline std::vector<NamedScenario> battery_from_json(const nlohmann::json& j) {
  detail::require_keys(j, "battery", {"version", "scenarios"});
  if (!j.at("scenarios").is_array()) throw DomainError("battery: scenarios must be an array");
  std::vector<NamedScenario> out;
  for (const auto& item : j.at("scenarios")) {
    detail::require_keys(item, "battery entry", {"name", "scenario"});
    out.push_back({item.at("name").get<std::string>(), scenario_from_json(item.at("scenario"))});
  }
  return out;
}

}  // namespace nbstein
