#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "zen/cluster.hpp"
#include "zen/model.hpp"
#include "zen/timeseries.hpp"

namespace zen {

enum class TechKind { Solar, HeatPump, ElectricBoiler, Boiler, Chp, Storage };
enum class Level { Building, Plant };
enum class Variant { M0, M1, Full };

std::string_view to_string(TechKind k);
std::string_view to_string(Variant v);
TechKind parse_tech_kind(std::string_view s);
Variant parse_variant(std::string_view s);

/// One investable technology. Building-level entries are instantiated once per
/// building; plant entries once and feed the heating grid.
///
/// Output conventions:
///   Solar          el = eff_el * x * irr / 1000 (upper bound, curtailment allowed)
///   HeatPump       heat from electricity via the COP tables
///   ElectricBoiler heat = eff_heat * electricity, heat <= x
///   Boiler         heat = eff_heat * fuel, heat <= x
///   Chp            el = eff_el * fuel, heat = eff_heat * fuel, el <= x
///   Storage        level <= x (kWh), charge and discharge <= rate * x
struct TechnologySpec {
  std::string id;
  TechKind kind = TechKind::Boiler;
  Level level = Level::Building;
  double var_cost = 0.0;    // per kW, discounted
  double fix_cost = 0.0;    // per unit invested, discounted
  double maint_cost = 0.0;  // per kW and year
  double x_min = 0.0;
  double x_max = 0.0;
  double eff_el = 0.0;
  double eff_heat = 0.0;
  bool serves_sh = true;
  bool serves_dhw = true;
  std::string fuel;
  double part_load_min = 0.0;
  // heat pumps
  double eta_ii = 0.5;
  double t_supply_sh = 35.0;
  double t_supply_dhw = 60.0;
  double t_rating = 7.0;
  double cop_max = 7.0;
  // storages
  std::string stores = "el";  // "el" (battery, two virtual batteries) or "sh"
  double eta_storage = 0.95;
  double rate = 0.5;          // max charge/discharge per hour, per kWh of capacity

  void validate() const;
};

struct Fuel {
  double price = 0.0;  // per kWh
  double co2 = 0.0;    // g per kWh
};

struct EconomicParams {
  double r = 0.04;
  int years = 30;
  double eps_tot = 0.0;  // 0 means derived from r and years
  std::map<std::string, Fuel> fuels;
  double p_grid = 0.0;
  double p_ret = 0.0;
  double c_hg = 0.0;
  double alpha_zen = 1.0;

  double discount() const;
  void validate() const;
};

struct Catalog {
  std::vector<TechnologySpec> techs;
  EconomicParams econ;

  void validate() const;
};

/// Sum over y = 1..D of (1 + r)^-y.
double discount_factor(double r, int years);

Catalog load_catalog(const std::filesystem::path& path);
Catalog parse_catalog(std::string_view json_text);
std::string catalog_to_json(const Catalog& c);

struct CopTables {
  std::vector<double> cop_sh, cop_dhw;
  double pmax_sh = 1.0;   // input power of a 1 kW (rated heat) unit
  double pmax_dhw = 1.0;
  std::size_t clamped = 0;  // hours with outdoor temperature at or above the supply set point
};

double heat_pump_cop(double eta_ii, double t_supply, double t_out, double cop_max, bool* clamped = nullptr);
CopTables precompute_cop(const std::vector<double>& temperature, const TechnologySpec& hp);

/// Copy with fixed costs, minimum capacities, part-load minima and the
/// heating-grid cost set to zero.
Catalog simplify(const Catalog& c);

/// Time structure the model is built over. Representative timesteps are
/// numbered tau = cluster * block + position; `horizon_map[t]` gives the
/// representative timestep standing for hour t.
struct TimeData {
  std::size_t block = 24;     // timesteps per cluster
  std::size_t clusters = 0;
  std::vector<double> weight;              // per tau, occurrences of its cluster
  std::vector<std::size_t> horizon_map;    // per hour of the horizon
  std::vector<std::size_t> xi;             // per object, cluster
  std::vector<std::string> buildings;
  std::vector<std::vector<double>> el, dhw, sh;  // [building][tau]
  std::vector<double> temperature, irr, spot, co2;

  std::size_t steps() const { return weight.size(); }
  std::size_t horizon() const { return horizon_map.size(); }
};

/// t_kappa for hour t under assignment xi: xi(t) for hours, and hour
/// t mod 24 of representative day xi(t / 24) for days.
std::size_t map_t_kappa(std::size_t t, const std::vector<std::size_t>& xi, Granularity g);

TimeData time_data(const ClusterModel& model);
/// One cluster spanning the whole horizon, weight 1 per hour.
TimeData full_time_data(const TimeSeriesBundle& bundle);

struct BuildOptions {
  Variant variant = Variant::M0;
  bool simplified = false;
};

/// Rejected combinations throw std::invalid_argument: M0 needs clusters of
/// more than one hour. Carriers with load but no producer throw
/// std::domain_error.
MilpModel build(const TimeData& td, const Catalog& catalog, const BuildOptions& options);
MilpModel build(const ClusterModel& clusters, const Catalog& catalog, const BuildOptions& options);
MilpModel build_full(const TimeSeriesBundle& bundle, const Catalog& catalog, bool simplified);

/// Names used by the builder, shared with the solution checker.
namespace names {
std::string var(std::string_view sym, std::string_view a);
std::string var(std::string_view sym, std::string_view a, std::size_t t);
std::string var(std::string_view sym, std::string_view a, std::string_view b);
std::string var(std::string_view sym, std::string_view a, std::string_view b, std::size_t t);
inline constexpr std::string_view kPlant = "plant";
}  // namespace names

}  // namespace zen
