#include "fpk/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "fpk/errors.hpp"

namespace fpk {

namespace {

std::string escape_pointer_token(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '~') out += "~0";
    else if (ch == '/') out += "~1";
    else out += ch;
  }
  return out;
}

// Tracks where the parser is so that duplicate keys can be reported by pointer.
struct Frame {
  bool object = true;
  std::set<std::string> keys;
  std::string token;  // current key, or current array index
  long index = -1;
};

std::string pointer_of(const std::vector<Frame>& stack) {
  std::string p;
  for (const auto& f : stack)
    if (!f.token.empty()) p += "/" + f.token;
  return p;
}

void advance_array(std::vector<Frame>& stack) {
  if (!stack.empty() && !stack.back().object) {
    ++stack.back().index;
    stack.back().token = std::to_string(stack.back().index);
  }
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "/" + key, "required key is missing");
  return j.at(key);
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.contains(k)) throw ConfigError(where + "/" + escape_pointer_token(k), "unknown key");
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  return j.get<double>();
}

std::uint64_t unsigned_int(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ConfigError(where, "expected a non-negative integer");
}

std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "/" + std::to_string(i)));
  return out;
}

}  // namespace

Json parse_json(std::string_view src) {
  std::vector<Frame> stack;
  auto callback = [&stack](int, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        advance_array(stack);
        stack.push_back(Frame{true, {}, "", -1});
        break;
      case Json::parse_event_t::array_start:
        advance_array(stack);
        stack.push_back(Frame{false, {}, "", -1});
        break;
      case Json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        auto& top = stack.back();
        top.token = escape_pointer_token(key);
        if (!top.keys.insert(key).second) throw ConfigError(pointer_of(stack), "duplicate key");
        break;
      }
      case Json::parse_event_t::value:
        advance_array(stack);
        break;
      case Json::parse_event_t::object_end:
      case Json::parse_event_t::array_end:
        stack.pop_back();
        break;
    }
    return true;
  };
  try {
    return Json::parse(src.begin(), src.end(), callback);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

FieldConfig field_config_from_json(const Json& j) {
  reject_unknown(j, {"dim", "catalog", "params", "A", "G", "p"}, "");
  FieldConfig cfg;
  const Json& dim = require(j, "dim", "");
  const std::uint64_t d = unsigned_int(dim, "/dim");
  if (d < 2) throw ConfigError("/dim", "dimension must be at least 2 (d >= 2 is a standing assumption)");
  cfg.dim = static_cast<std::size_t>(d);
  if (j.contains("catalog")) cfg.catalog = text(j.at("catalog"), "/catalog");
  if (j.contains("params")) {
    const Json& p = j.at("params");
    if (!p.is_object()) throw ConfigError("/params", "expected an object");
    for (const auto& [k, v] : p.items()) cfg.params[k] = number(v, "/params/" + escape_pointer_token(k));
  }
  if (j.contains("A")) {
    const Json& a = j.at("A");
    if (!a.is_object()) throw ConfigError("/A", "expected an object of entry expressions");
    for (const auto& [k, v] : a.items()) {
      const std::string where = "/A/" + escape_pointer_token(k);
      cfg.a_entries[k] = v.is_number() ? v.dump() : text(v, where);
    }
  }
  if (j.contains("G")) {
    const Json& g = j.at("G");
    if (!g.is_array()) throw ConfigError("/G", "expected an array of drift expressions");
    for (std::size_t i = 0; i < g.size(); ++i)
      cfg.g_entries.push_back(g[i].is_number() ? g[i].dump() : text(g[i], "/G/" + std::to_string(i)));
  }
  if (j.contains("p")) {
    const double p = number(j.at("p"), "/p");
    if (!(p > static_cast<double>(cfg.dim)))
      throw ConfigError("/p", "integrability exponent must exceed the dimension");
    cfg.integrability_p = p;
  }
  return cfg;
}

Json field_to_json(const CoefficientField& field) {
  const FieldSource& src = field.source();
  Json j;
  j["dim"] = field.dim();
  if (!src.catalog.empty()) {
    j["catalog"] = src.catalog;
    j["params"] = Json::object();
    for (const auto& [k, v] : src.params) j["params"][k] = v;
  } else {
    j["A"] = Json::object();
    for (const auto& [k, v] : src.a_entries) j["A"][k] = v;
    j["G"] = src.g_entries;
  }
  if (src.integrability_p) j["p"] = *src.integrability_p;
  j["claimed"] = src.claimed;
  return j;
}

SimConfig sim_config_from_json(const Json& j) {
  reject_unknown(j, {"x0", "T", "dt", "n_paths", "seed", "snapshot_times", "R_explode"}, "");
  SimConfig cfg;
  cfg.x0 = numbers(require(j, "x0", ""), "/x0");
  if (j.contains("T")) cfg.horizon = number(j.at("T"), "/T");
  if (j.contains("dt")) cfg.dt = number(j.at("dt"), "/dt");
  if (j.contains("n_paths")) cfg.n_paths = static_cast<std::size_t>(unsigned_int(j.at("n_paths"), "/n_paths"));
  if (j.contains("seed")) cfg.seed = unsigned_int(j.at("seed"), "/seed");
  if (j.contains("snapshot_times")) cfg.snapshot_times = numbers(j.at("snapshot_times"), "/snapshot_times");
  if (j.contains("R_explode")) cfg.r_explode = number(j.at("R_explode"), "/R_explode");
  if (!(cfg.dt > 0.0)) throw ConfigError("/dt", "dt must be positive");
  if (!(cfg.horizon > 0.0)) throw ConfigError("/T", "T must be positive");
  if (cfg.dt > cfg.horizon) throw ConfigError("/dt", "dt must not exceed T");
  if (cfg.n_paths == 0) throw ConfigError("/n_paths", "need at least one path");
  if (!(cfg.r_explode > 0.0)) throw ConfigError("/R_explode", "cutoff radius must be positive");
  return cfg;
}

Json sim_config_to_json(const SimConfig& cfg) {
  Json j;
  j["x0"] = cfg.x0;
  j["T"] = cfg.horizon;
  j["dt"] = cfg.dt;
  j["n_paths"] = cfg.n_paths;
  j["seed"] = cfg.seed;
  j["snapshot_times"] = cfg.snapshot_times;
  j["R_explode"] = cfg.r_explode;
  return j;
}

Json resolved_sim_to_json(const ResolvedSim& run) {
  Json j = sim_config_to_json(run.config);
  j["dt_requested"] = run.config.dt;
  j["dt"] = run.dt;
  j["dt_adjusted"] = run.dt_adjusted;
  j["n_steps"] = run.n_steps;
  j["snapshot_steps"] = run.snapshot_steps;
  return j;
}

FieldBundle load_field(const Json& j) {
  Json stripped = j;
  // "claimed" appears in resolved output; accept it back so resolved configs round-trip.
  if (stripped.is_object()) stripped.erase("claimed");
  FieldConfig cfg = field_config_from_json(stripped);
  CoefficientField field = build_field(cfg);
  Json resolved = field_to_json(field);
  return FieldBundle{std::move(cfg), std::move(field), std::move(resolved)};
}

}  // namespace fpk
