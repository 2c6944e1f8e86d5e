#include "zen/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "zen/random.hpp"

namespace zen {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void check_length(const Series& s, std::size_t n, const std::string& name) {
  if (s.size() != n)
    throw DataError("series '" + name + "' has " + std::to_string(s.size()) + " entries, expected " +
                    std::to_string(n));
}

void check_nonnegative(const Series& s, const std::string& name) {
  for (std::size_t t = 0; t < s.size(); ++t)
    if (!(s[t] >= 0.0))
      throw DataError("series '" + name + "' is negative at hour " + std::to_string(t));
}

}  // namespace

void SolarGeometry::validate() const {
  if (!(tilt >= 0.0 && tilt <= 90.0)) throw std::invalid_argument("tilt must lie in [0, 90]");
  if (!(albedo >= 0.0 && albedo <= 1.0)) throw std::invalid_argument("albedo must lie in [0, 1]");
  if (sun_elevation.size() != sun_azimuth.size())
    throw std::invalid_argument("sun elevation and azimuth lengths differ");
  for (std::size_t t = 0; t < sun_elevation.size(); ++t) {
    if (!(sun_elevation[t] >= -90.0 && sun_elevation[t] <= 90.0))
      throw std::invalid_argument("sun elevation out of [-90, 90] at hour " + std::to_string(t));
    if (!(sun_azimuth[t] >= -180.0 && sun_azimuth[t] <= 180.0))
      throw std::invalid_argument("sun azimuth out of [-180, 180] at hour " + std::to_string(t));
  }
}

void TimeSeriesBundle::validate() const {
  if (horizon == 0 || horizon % 24 != 0) throw DataError("horizon not divisible by 24");
  check_length(temperature, horizon, "temperature");
  check_length(dhi, horizon, "dhi");
  check_length(dni, horizon, "dni");
  check_length(sun_elev, horizon, "sun_elev");
  check_length(sun_azim, horizon, "sun_azim");
  check_length(spot_price, horizon, "spot_price");
  check_length(co2_el, horizon, "co2_el");
  check_nonnegative(dhi, "dhi");
  check_nonnegative(dni, "dni");
  if (irr_tilt) {
    check_length(*irr_tilt, horizon, "irr_tilt");
    check_nonnegative(*irr_tilt, "irr_tilt");
  }
  if (buildings.empty()) throw DataError("bundle has no buildings");
  for (const auto& b : buildings) {
    check_length(b.el, horizon, "el_" + b.id);
    check_length(b.dhw, horizon, "dhw_" + b.id);
    check_length(b.sh, horizon, "sh_" + b.id);
    check_nonnegative(b.el, "el_" + b.id);
    check_nonnegative(b.dhw, "dhw_" + b.id);
    check_nonnegative(b.sh, "sh_" + b.id);
  }
}

TimeSeriesBundle load_bundle(const std::filesystem::path& path, const ColumnMap& schema) {
  const CsvTable table = read_csv(path);

  auto require = [&](const std::string& name) {
    const auto c = table.column(name);
    if (c == std::string::npos) throw DataError(path.string() + ": missing column '" + name + "'");
    return c;
  };

  const std::size_t c_hour = require(schema.hour);
  const std::size_t c_temp = require(schema.temperature);
  const std::size_t c_dhi = require(schema.dhi);
  const std::size_t c_dni = require(schema.dni);
  const std::size_t c_spot = require(schema.spot_price);
  const std::size_t c_co2 = require(schema.co2_el);
  const std::size_t c_elev = require(schema.sun_elev);
  const std::size_t c_azim = require(schema.sun_azim);
  const std::size_t c_tilt = table.column(schema.irr_tilt);

  struct BuildingCols {
    std::string id;
    std::size_t el, dhw, sh;
  };
  std::vector<BuildingCols> bcols;
  for (const auto& name : table.header) {
    if (name.rfind(schema.el_prefix, 0) != 0) continue;
    const std::string id = name.substr(schema.el_prefix.size());
    bcols.push_back({id, table.column(name), require(schema.dhw_prefix + id),
                     require(schema.sh_prefix + id)});
  }
  if (bcols.empty()) throw DataError(path.string() + ": no building columns ('" + schema.el_prefix + "<id>')");

  const std::size_t horizon = table.rows.size();
  if (horizon == 0 || horizon % 24 != 0)
    throw DataError(path.string() + ": horizon not divisible by 24 (" + std::to_string(horizon) + " rows)");

  TimeSeriesBundle b;
  b.horizon = horizon;
  for (Series* s : {&b.temperature, &b.dhi, &b.dni, &b.spot_price, &b.co2_el, &b.sun_elev, &b.sun_azim})
    s->reserve(horizon);
  if (c_tilt != std::string::npos) b.irr_tilt.emplace().reserve(horizon);
  for (const auto& bc : bcols) b.buildings.push_back({bc.id, {}, {}, {}});

  for (std::size_t r = 0; r < horizon; ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 1;
    if (row.size() != table.header.size())
      throw DataError("row " + std::to_string(line) + ": expected " + std::to_string(table.header.size()) +
                      " cells, found " + std::to_string(row.size()));
    auto num = [&](std::size_t c) { return parse_cell(row[c], line, table.header[c]); };
    auto nonneg = [&](std::size_t c) {
      const double v = num(c);
      if (v < 0.0)
        throw DataError("row " + std::to_string(line) + ", column '" + table.header[c] +
                        "': negative value " + row[c]);
      return v;
    };
    if (num(c_hour) != static_cast<double>(r))
      throw DataError("row " + std::to_string(line) + ", column '" + table.header[c_hour] +
                      "': expected hour " + std::to_string(r));
    b.temperature.push_back(num(c_temp));
    b.dhi.push_back(nonneg(c_dhi));
    b.dni.push_back(nonneg(c_dni));
    b.spot_price.push_back(num(c_spot));
    b.co2_el.push_back(num(c_co2));
    b.sun_elev.push_back(num(c_elev));
    b.sun_azim.push_back(num(c_azim));
    if (b.irr_tilt) b.irr_tilt->push_back(nonneg(c_tilt));
    for (std::size_t i = 0; i < bcols.size(); ++i) {
      b.buildings[i].el.push_back(nonneg(bcols[i].el));
      b.buildings[i].dhw.push_back(nonneg(bcols[i].dhw));
      b.buildings[i].sh.push_back(nonneg(bcols[i].sh));
    }
  }
  b.validate();
  return b;
}

void write_bundle(const TimeSeriesBundle& bundle, const std::filesystem::path& path,
                  const ColumnMap& schema) {
  bundle.validate();
  auto out = open_output(path);
  out << schema.hour << ',' << schema.temperature << ',' << schema.dhi << ',' << schema.dni << ','
      << schema.spot_price << ',' << schema.co2_el << ',' << schema.sun_elev << ',' << schema.sun_azim;
  if (bundle.irr_tilt) out << ',' << schema.irr_tilt;
  for (const auto& b : bundle.buildings)
    out << ',' << schema.el_prefix << b.id << ',' << schema.dhw_prefix << b.id << ',' << schema.sh_prefix << b.id;
  out << '\n';
  for (std::size_t t = 0; t < bundle.horizon; ++t) {
    out << t;
    for (const Series* s : {&bundle.temperature, &bundle.dhi, &bundle.dni, &bundle.spot_price, &bundle.co2_el,
                            &bundle.sun_elev, &bundle.sun_azim})
      out << ',' << format_double((*s)[t]);
    if (bundle.irr_tilt) out << ',' << format_double((*bundle.irr_tilt)[t]);
    for (const auto& b : bundle.buildings)
      out << ',' << format_double(b.el[t]) << ',' << format_double(b.dhw[t]) << ',' << format_double(b.sh[t]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double tilt_irradiance_at(double dhi, double dni, double elevation_deg, double azimuth_deg, double tilt_deg,
                          double panel_azimuth_deg, double albedo) {
  const double cos_tilt = std::cos(tilt_deg * kDeg);
  const double sin_tilt = std::sin(tilt_deg * kDeg);
  const double diffuse = dhi * (1.0 + cos_tilt) / 2.0;
  const double ground = albedo * (dni + dhi) * (1.0 - cos_tilt) / 2.0;

  // Below 1 degree of elevation no direct beam reaches the panel; this also
  // keeps the division by sin(elevation) away from zero.
  const double sin_elev = std::sin(elevation_deg * kDeg);
  double beam = 0.0;
  if (sin_elev > std::sin(1.0 * kDeg)) {
    const double cos_elev = std::cos(elevation_deg * kDeg);
    beam = dni *
           (cos_elev * sin_tilt * std::cos((panel_azimuth_deg - azimuth_deg) * kDeg) + sin_elev * cos_tilt) /
           sin_elev;
  }
  return std::max(0.0, diffuse + ground + beam);
}

Series tilt_irradiance(const Series& dhi, const Series& dni, const SolarGeometry& geo) {
  geo.validate();
  if (dhi.size() != dni.size() || dhi.size() != geo.sun_elevation.size())
    throw std::invalid_argument("tilt_irradiance: series lengths differ");
  Series out(dhi.size());
  for (std::size_t t = 0; t < dhi.size(); ++t)
    out[t] = tilt_irradiance_at(dhi[t], dni[t], geo.sun_elevation[t], geo.sun_azimuth[t], geo.tilt,
                                geo.panel_azimuth, geo.albedo);
  return out;
}

SunPosition solar_position(std::size_t horizon, double latitude_deg) {
  if (horizon == 0 || horizon % 24 != 0) throw DataError("horizon not divisible by 24");
  const std::size_t days = horizon / 24;
  const double lat = latitude_deg * kDeg;
  SunPosition pos;
  pos.elevation.resize(horizon);
  pos.azimuth.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const double day = static_cast<double>(t / 24);
    const double doy = (day + 0.5) * 365.0 / static_cast<double>(days);
    const double decl = 23.45 * kDeg * std::sin(2.0 * std::numbers::pi * (284.0 + doy) / 365.0);
    const double omega = 15.0 * kDeg * (static_cast<double>(t % 24) + 0.5 - 12.0);
    const double sin_el = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(omega);
    pos.elevation[t] = std::asin(std::clamp(sin_el, -1.0, 1.0)) / kDeg;
    pos.azimuth[t] =
        std::atan2(std::sin(omega), std::cos(omega) * std::sin(lat) - std::tan(decl) * std::cos(lat)) / kDeg;
  }
  return pos;
}

TimeSeriesBundle synth_bundle(std::uint64_t seed, std::size_t horizon, std::size_t n_buildings) {
  if (horizon == 0 || horizon % 24 != 0) throw DataError("horizon not divisible by 24");
  if (n_buildings == 0) throw std::invalid_argument("synth_bundle: need at least one building");

  Rng rng(seed);
  const std::size_t days = horizon / 24;
  const SunPosition sun = solar_position(horizon, 61.4);

  TimeSeriesBundle b;
  b.horizon = horizon;
  b.sun_elev = sun.elevation;
  b.sun_azim = sun.azimuth;
  for (Series* s : {&b.temperature, &b.dhi, &b.dni, &b.spot_price, &b.co2_el}) s->assign(horizon, 0.0);

  // Day-level weather and market state, AR(1) from day to day.
  std::vector<double> temp_anom(days), cloud(days), price_anom(days), season(days);
  double ta = 0.0, ca = 0.0, pa = 0.0;
  for (std::size_t d = 0; d < days; ++d) {
    const double doy = (static_cast<double>(d) + 0.5) * 365.0 / static_cast<double>(days);
    season[d] = std::cos(2.0 * std::numbers::pi * (doy - 15.0) / 365.0);  // +1 mid-winter
    ta = 0.6 * ta + 3.0 * rng.normal();
    ca = 0.5 * ca + 0.8 * rng.normal();
    pa = 0.6 * pa + 0.008 * rng.normal();
    temp_anom[d] = ta;
    cloud[d] = std::clamp(0.45 + 0.12 * season[d] + 0.3 * ca, 0.0, 0.95);
    price_anom[d] = pa;
  }

  for (std::size_t t = 0; t < horizon; ++t) {
    const std::size_t d = t / 24;
    const double h = static_cast<double>(t % 24);
    b.temperature[t] = 5.0 - 12.0 * season[d] + temp_anom[d] +
                       3.0 * std::cos(2.0 * std::numbers::pi * (h - 15.0) / 24.0) + 0.4 * rng.normal();

    const double el = b.sun_elev[t];
    if (el > 0.0) {
      const double sin_el = std::sin(el * kDeg);
      const double air_mass = 1.0 / (sin_el + 0.50572 * std::pow(el + 6.07995, -1.6364));
      const double c = std::clamp(cloud[d] + 0.08 * rng.normal(), 0.0, 1.0);
      b.dni[t] = 900.0 * std::exp(-0.35 * air_mass) * std::pow(1.0 - c, 1.5);
      b.dhi[t] = (40.0 + 260.0 * c * (1.0 - 0.4 * c)) * std::pow(sin_el, 0.8);
    }

    const double peak = (h >= 7 && h <= 10) || (h >= 17 && h <= 20) ? 1.0 : 0.0;
    b.spot_price[t] = std::max(0.005, 0.045 + 0.02 * season[d] + 0.015 * peak + price_anom[d] +
                                          0.003 * rng.normal());
    b.co2_el[t] = std::max(5.0, 40.0 + 2500.0 * b.spot_price[t] + 10.0 * rng.normal());
  }

  for (std::size_t i = 0; i < n_buildings; ++i) {
    BuildingLoads L;
    L.id = "b" + std::to_string(i + 1);
    L.el.assign(horizon, 0.0);
    L.dhw.assign(horizon, 0.0);
    L.sh.assign(horizon, 0.0);
    const bool office = i % 2 == 0;
    const double scale = 1.0 + 0.35 * static_cast<double>(i / 2);
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::size_t d = t / 24;
      const std::size_t h = t % 24;
      const bool weekend = d % 7 >= 5;
      double el = 0.0, dhw = 0.0;
      double setpoint = 19.0;
      if (office) {
        const bool open = !weekend && h >= 7 && h <= 17;
        el = 6.0 + (open ? 14.0 : 0.0);
        dhw = open ? 1.5 : 0.2;
        setpoint = open ? 20.0 : 16.0;
      } else {
        el = 4.0 + ((h >= 6 && h <= 8) ? 4.0 : 0.0) + ((h >= 17 && h <= 22) ? 6.0 : 0.0);
        dhw = 0.5 + ((h >= 6 && h <= 8) ? 4.0 : 0.0) + ((h >= 18 && h <= 21) ? 2.5 : 0.0);
      }
      L.el[t] = scale * std::max(0.0, el * (1.0 + 0.08 * rng.normal()));
      L.dhw[t] = scale * std::max(0.0, dhw * (1.0 + 0.15 * rng.normal()));
      L.sh[t] = scale * std::max(0.0, 1.6 * (setpoint - b.temperature[t]) * (1.0 + 0.05 * rng.normal()));
    }
    b.buildings.push_back(std::move(L));
  }

  SolarGeometry geo;
  geo.sun_elevation = b.sun_elev;
  geo.sun_azimuth = b.sun_azim;
  b.irr_tilt = tilt_irradiance(b.dhi, b.dni, geo);
  b.validate();
  return b;
}

}  // namespace zen
