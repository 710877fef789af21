#include "gridsced/case_io.hpp"

#include <fstream>
#include <sstream>

#include "gridsced/matpower.hpp"
#include "json.hpp"

namespace gridsced {

namespace {

using nlohmann::json;

double get_num(const json& j, const char* key, double fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<double>();
}

int get_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw DataError(std::string("case JSON missing required field '") + key + "'");
  return it->get<int>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<bool>();
}

}  // namespace

NetworkModel parse_case_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("case JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw DataError("case JSON root must be an object");

  NetworkModel model;
  model.base_mva = get_num(j, "base_mva", 100.0);

  for (const auto& jb : j.value("buses", json::array())) {
    Bus b;
    b.id = get_int(jb, "id");
    b.kind = bus_kind_from_string(jb.value("kind", "PQ"));
    b.p_load = get_num(jb, "p_load", 0.0);
    b.q_load = get_num(jb, "q_load", 0.0);
    b.shunt_g = get_num(jb, "shunt_g", 0.0);
    b.shunt_b = get_num(jb, "shunt_b", 0.0);
    b.v_setpoint = get_num(jb, "v_setpoint", 1.0);
    b.v_min = get_num(jb, "v_min", 0.9);
    b.v_max = get_num(jb, "v_max", 1.1);
    b.base_kv = get_num(jb, "base_kv", 0.0);
    model.buses.push_back(b);
  }

  for (const auto& jb : j.value("branches", json::array())) {
    Branch br;
    br.id = get_int(jb, "id");
    br.from_bus = get_int(jb, "from_bus");
    br.to_bus = get_int(jb, "to_bus");
    br.r = get_num(jb, "r", 0.0);
    br.x = get_num(jb, "x", 0.0);
    br.b_charging = get_num(jb, "b_charging", 0.0);
    br.tap_ratio = get_num(jb, "tap_ratio", 1.0);
    br.phase_shift = get_num(jb, "phase_shift", 0.0);
    br.rate_normal = get_num(jb, "rate_normal", 0.0);
    br.rate_emergency = get_num(jb, "rate_emergency", 0.0);
    br.in_service = get_bool(jb, "in_service", true);
    model.branches.push_back(br);
  }

  for (const auto& jg : j.value("generators", json::array())) {
    Generator g;
    g.id = get_int(jg, "id");
    g.bus = get_int(jg, "bus");
    g.p_min = get_num(jg, "p_min", 0.0);
    g.p_max = get_num(jg, "p_max", 0.0);
    g.q_min = get_num(jg, "q_min", 0.0);
    g.q_max = get_num(jg, "q_max", 0.0);
    g.p_initial = get_num(jg, "p_initial", 0.0);
    g.ramp_rate = get_num(jg, "ramp_rate", kInfinity);
    g.reserve_price = get_num(jg, "reserve_price", 0.0);
    g.online = get_bool(jg, "online", true);
    model.generators.push_back(g);
  }

  for (const auto& jc : j.value("cost_curves", json::array())) {
    CostCurve c;
    c.owner = get_int(jc, "generator");
    c.start_mw = get_num(jc, "start_mw", 0.0);
    c.start_cost = get_num(jc, "start_cost", 0.0);
    for (const auto& js : jc.value("segments", json::array())) {
      c.segments.push_back({js.at("end_mw").get<double>(), js.at("price").get<double>()});
    }
    model.cost_curves.push_back(c);
  }

  model.finalize();
  return model;
}

std::string write_case_json(const NetworkModel& model, int indent) {
  json j;
  j["base_mva"] = model.base_mva;

  json buses = json::array();
  for (const auto& b : model.buses) {
    buses.push_back({{"id", b.id},
                     {"kind", to_string(b.kind)},
                     {"p_load", b.p_load},
                     {"q_load", b.q_load},
                     {"shunt_g", b.shunt_g},
                     {"shunt_b", b.shunt_b},
                     {"v_setpoint", b.v_setpoint},
                     {"v_min", b.v_min},
                     {"v_max", b.v_max},
                     {"base_kv", b.base_kv}});
  }
  j["buses"] = std::move(buses);

  json branches = json::array();
  for (const auto& br : model.branches) {
    branches.push_back({{"id", br.id},
                        {"from_bus", br.from_bus},
                        {"to_bus", br.to_bus},
                        {"r", br.r},
                        {"x", br.x},
                        {"b_charging", br.b_charging},
                        {"tap_ratio", br.tap_ratio},
                        {"phase_shift", br.phase_shift},
                        {"rate_normal", br.rate_normal},
                        {"rate_emergency", br.rate_emergency},
                        {"in_service", br.in_service}});
  }
  j["branches"] = std::move(branches);

  json gens = json::array();
  for (const auto& g : model.generators) {
    json jg = {{"id", g.id},
               {"bus", g.bus},
               {"p_min", g.p_min},
               {"p_max", g.p_max},
               {"q_min", g.q_min},
               {"q_max", g.q_max},
               {"p_initial", g.p_initial},
               {"reserve_price", g.reserve_price},
               {"online", g.online}};
    if (std::isinf(g.ramp_rate)) {
      jg["ramp_rate"] = nullptr;
    } else {
      jg["ramp_rate"] = g.ramp_rate;
    }
    gens.push_back(std::move(jg));
  }
  j["generators"] = std::move(gens);

  json curves = json::array();
  for (const auto& c : model.cost_curves) {
    json segs = json::array();
    for (const auto& s : c.segments) segs.push_back({{"end_mw", s.end_mw}, {"price", s.price}});
    curves.push_back({{"generator", c.owner},
                      {"start_mw", c.start_mw},
                      {"start_cost", c.start_cost},
                      {"segments", std::move(segs)}});
  }
  j["cost_curves"] = std::move(curves);

  return j.dump(indent) + "\n";
}

NetworkModel load_case_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open case file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_case_json(buffer.str());
}

NetworkModel load_case(const std::string& path, std::vector<std::string>* warnings) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".json") return load_case_json_file(path);
  if (ext == ".m") return load_matpower_file(path, warnings);
  throw DataError("unrecognized case extension '" + ext + "' (expected .m or .json)");
}

}  // namespace gridsced
