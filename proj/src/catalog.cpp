#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "zen/milp.hpp"

namespace zen {

using nlohmann::json;

void TechnologySpec::validate() const {
  auto fail = [&](const std::string& what) { throw std::invalid_argument("technology '" + id + "': " + what); };
  if (id.empty()) throw std::invalid_argument("technology without id");
  if (!(x_min >= 0.0 && x_min <= x_max) || !std::isfinite(x_max)) fail("need 0 <= x_min <= x_max < inf");
  if (!(part_load_min >= 0.0 && part_load_min < 1.0)) fail("part_load_min must lie in [0, 1)");
  if (var_cost < 0.0 || fix_cost < 0.0 || maint_cost < 0.0) fail("costs must be non-negative");
  switch (kind) {
    case TechKind::Solar:
      if (!(eff_el > 0.0)) fail("solar needs eff_el > 0");
      break;
    case TechKind::HeatPump:
      if (!(eta_ii > 0.0) || !(cop_max >= 1.0)) fail("heat pump needs eta_ii > 0 and cop_max >= 1");
      if (t_supply_dhw < t_supply_sh) fail("DHW set point must not be below the SH set point");
      break;
    case TechKind::ElectricBoiler:
    case TechKind::Boiler:
      if (!(eff_heat > 0.0)) fail("needs eff_heat > 0");
      if (kind == TechKind::Boiler && fuel.empty()) fail("boiler needs a fuel");
      break;
    case TechKind::Chp:
      if (!(eff_el > 0.0) || eff_heat < 0.0) fail("CHP needs eff_el > 0 and eff_heat >= 0");
      if (fuel.empty()) fail("CHP needs a fuel");
      break;
    case TechKind::Storage:
      if (!(eta_storage > 0.0 && eta_storage <= 1.0) || !(rate > 0.0)) fail("storage needs eta in (0,1] and rate > 0");
      if (level == Level::Plant) fail("plant-level storages are not supported");
      break;
  }
  if (kind != TechKind::Solar && kind != TechKind::Storage && kind != TechKind::Chp && !serves_sh && !serves_dhw &&
      level == Level::Building)
    fail("heat technology serves neither SH nor DHW");
}

double EconomicParams::discount() const { return eps_tot > 0.0 ? eps_tot : discount_factor(r, years); }

void EconomicParams::validate() const {
  if (!(r > 0.0) || years < 1) throw std::invalid_argument("economics: need r > 0 and years >= 1");
  if (eps_tot < 0.0) throw std::invalid_argument("economics: eps_tot must be positive");
  if (!(alpha_zen >= 0.0 && alpha_zen <= 1.0)) throw std::invalid_argument("economics: alpha_zen must lie in [0, 1]");
}

void Catalog::validate() const {
  econ.validate();
  for (std::size_t i = 0; i < techs.size(); ++i) {
    techs[i].validate();
    for (std::size_t j = 0; j < i; ++j)
      if (techs[j].id == techs[i].id) throw std::invalid_argument("duplicate technology id '" + techs[i].id + "'");
  }
}

namespace {

TechnologySpec tech_from_json(const json& j) {
  TechnologySpec t;
  t.id = j.at("id").get<std::string>();
  t.kind = parse_tech_kind(j.at("kind").get<std::string>());
  const std::string level = j.value("level", "building");
  if (level == "building") t.level = Level::Building;
  else if (level == "plant") t.level = Level::Plant;
  else throw std::invalid_argument("technology '" + t.id + "': level must be building or plant");
  t.var_cost = j.value("var_cost", t.var_cost);
  t.fix_cost = j.value("fix_cost", t.fix_cost);
  t.maint_cost = j.value("maint_cost", t.maint_cost);
  t.x_min = j.value("x_min", t.x_min);
  t.x_max = j.at("x_max").get<double>();
  t.eff_el = j.value("eff_el", t.eff_el);
  t.eff_heat = j.value("eff_heat", t.eff_heat);
  t.serves_sh = j.value("serves_sh", t.serves_sh);
  t.serves_dhw = j.value("serves_dhw", t.serves_dhw);
  t.fuel = j.value("fuel", t.fuel);
  t.part_load_min = j.value("part_load_min", t.part_load_min);
  t.eta_ii = j.value("eta_ii", t.eta_ii);
  t.t_supply_sh = j.value("t_supply_sh", t.t_supply_sh);
  t.t_supply_dhw = j.value("t_supply_dhw", t.t_supply_dhw);
  t.t_rating = j.value("t_rating", t.t_rating);
  t.cop_max = j.value("cop_max", t.cop_max);
  t.stores = j.value("stores", t.stores);
  t.eta_storage = j.value("eta_storage", t.eta_storage);
  t.rate = j.value("rate", t.rate);
  return t;
}

json tech_to_json(const TechnologySpec& t) {
  json j;
  j["id"] = t.id;
  j["kind"] = std::string(to_string(t.kind));
  j["level"] = t.level == Level::Plant ? "plant" : "building";
  j["var_cost"] = t.var_cost;
  j["fix_cost"] = t.fix_cost;
  j["maint_cost"] = t.maint_cost;
  j["x_min"] = t.x_min;
  j["x_max"] = t.x_max;
  j["eff_el"] = t.eff_el;
  j["eff_heat"] = t.eff_heat;
  j["serves_sh"] = t.serves_sh;
  j["serves_dhw"] = t.serves_dhw;
  j["fuel"] = t.fuel;
  j["part_load_min"] = t.part_load_min;
  if (t.kind == TechKind::HeatPump) {
    j["eta_ii"] = t.eta_ii;
    j["t_supply_sh"] = t.t_supply_sh;
    j["t_supply_dhw"] = t.t_supply_dhw;
    j["t_rating"] = t.t_rating;
    j["cop_max"] = t.cop_max;
  }
  if (t.kind == TechKind::Storage) {
    j["stores"] = t.stores;
    j["eta_storage"] = t.eta_storage;
    j["rate"] = t.rate;
  }
  return j;
}

}  // namespace

Catalog parse_catalog(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("catalog: ") + e.what());
  }
  Catalog c;
  try {
    const auto& e = j.at("economics");
    c.econ.r = e.value("r", c.econ.r);
    c.econ.years = e.value("years", c.econ.years);
    c.econ.eps_tot = e.value("eps_tot", 0.0);
    c.econ.p_grid = e.value("p_grid", 0.0);
    c.econ.p_ret = e.value("p_ret", 0.0);
    c.econ.c_hg = e.value("c_hg", 0.0);
    c.econ.alpha_zen = e.value("alpha_zen", 1.0);
    if (e.contains("fuels"))
      for (const auto& [name, f] : e.at("fuels").items())
        c.econ.fuels[name] = Fuel{f.at("price").get<double>(), f.at("co2").get<double>()};
    for (const auto& t : j.at("technologies")) c.techs.push_back(tech_from_json(t));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("catalog: ") + e.what());
  }
  c.validate();
  return c;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open catalog " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str());
}

std::string catalog_to_json(const Catalog& c) {
  json j;
  auto& e = j["economics"];
  e["r"] = c.econ.r;
  e["years"] = c.econ.years;
  if (c.econ.eps_tot > 0.0) e["eps_tot"] = c.econ.eps_tot;
  e["p_grid"] = c.econ.p_grid;
  e["p_ret"] = c.econ.p_ret;
  e["c_hg"] = c.econ.c_hg;
  e["alpha_zen"] = c.econ.alpha_zen;
  e["fuels"] = json::object();
  for (const auto& [name, f] : c.econ.fuels) e["fuels"][name] = {{"price", f.price}, {"co2", f.co2}};
  j["technologies"] = json::array();
  for (const auto& t : c.techs) j["technologies"].push_back(tech_to_json(t));
  return j.dump(2) + "\n";
}

}  // namespace zen
