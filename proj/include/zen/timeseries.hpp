#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "zen/csv.hpp"

namespace zen {

using Series = std::vector<double>;

/// Hourly electric, domestic-hot-water and space-heating demand of one building.
/// Units are whatever the input file uses (kWh per hour in the shipped data).
struct BuildingLoads {
  std::string id;
  Series el;
  Series dhw;
  Series sh;

  bool operator==(const BuildingLoads&) const = default;
};

/// Sun position per hour plus the panel orientation used for transposition.
/// Angles in degrees.
struct SolarGeometry {
  Series sun_elevation;
  Series sun_azimuth;
  double tilt = 35.0;
  double panel_azimuth = 0.0;
  double albedo = 0.3;

  void validate() const;
};

/// One horizon of hourly input data. `horizon` must be a multiple of 24.
struct TimeSeriesBundle {
  std::size_t horizon = 0;
  std::vector<BuildingLoads> buildings;
  Series temperature;  // degC
  Series dhi;          // W/m2
  Series dni;          // W/m2
  Series sun_elev;     // deg
  Series sun_azim;     // deg
  Series spot_price;   // EUR/kWh
  Series co2_el;       // gCO2/kWh
  std::optional<Series> irr_tilt;  // W/m2, set by transposition or read from file

  std::size_t days() const { return horizon / 24; }

  /// Throws DataError on any length, sign or divisibility violation.
  void validate() const;

  bool operator==(const TimeSeriesBundle&) const = default;
};

/// Header names for the CSV columns. Building columns are `<prefix><id>`.
struct ColumnMap {
  std::string hour = "hour";
  std::string temperature = "temperature";
  std::string dhi = "dhi";
  std::string dni = "dni";
  std::string spot_price = "spot_price";
  std::string co2_el = "co2_el";
  std::string sun_elev = "sun_elev";
  std::string sun_azim = "sun_azim";
  std::string irr_tilt = "irr_tilt";  // optional column
  std::string el_prefix = "el_";
  std::string dhw_prefix = "dhw_";
  std::string sh_prefix = "sh_";
};

TimeSeriesBundle load_bundle(const std::filesystem::path& path, const ColumnMap& schema = {});
void write_bundle(const TimeSeriesBundle& bundle, const std::filesystem::path& path,
                  const ColumnMap& schema = {});

/// Irradiance on a tilted plane from diffuse-horizontal and direct-normal
/// irradiance. The beam term is dropped whenever the sun is below 1 degree;
/// the result is clamped at zero.
Series tilt_irradiance(const Series& dhi, const Series& dni, const SolarGeometry& geo);

/// Single-hour version of tilt_irradiance.
double tilt_irradiance_at(double dhi, double dni, double elevation_deg, double azimuth_deg,
                          double tilt_deg, double panel_azimuth_deg, double albedo);

struct SunPosition {
  Series elevation;
  Series azimuth;  // 0 = south, positive towards west
};

/// Approximate sun position from declination and hour angle. The horizon is
/// treated as one compressed year: day d maps to day-of-year d*365/days.
/// Not an ephemeris; for synthetic data only.
SunPosition solar_position(std::size_t horizon, double latitude_deg);

/// Deterministic synthetic bundle with diurnal and seasonal structure.
/// The returned bundle has irr_tilt filled in (tilt 35, south facing, albedo 0.3).
TimeSeriesBundle synth_bundle(std::uint64_t seed, std::size_t horizon, std::size_t n_buildings);

}  // namespace zen
