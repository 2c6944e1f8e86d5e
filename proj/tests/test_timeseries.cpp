#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "zen/timeseries.hpp"

using namespace zen;
using zen::test::TempDir;

namespace {

SolarGeometry one_hour(double elev, double azim, double tilt, double panel_azim = 0.0, double albedo = 0.3) {
  SolarGeometry g;
  g.sun_elevation = {elev};
  g.sun_azimuth = {azim};
  g.tilt = tilt;
  g.panel_azimuth = panel_azim;
  g.albedo = albedo;
  return g;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

}  // namespace

TEST_CASE("zero tilt reduces to DHI + DNI") {
  const auto out = tilt_irradiance({100.0}, {500.0}, one_hour(30.0, 0.0, 0.0));
  CHECK(out[0] == doctest::Approx(600.0).epsilon(1e-12));
}

TEST_CASE("low sun drops the beam term") {
  const double tilt = 35.0;
  const double c = std::cos(tilt * std::numbers::pi / 180.0);
  const double expected = 100.0 * (1 + c) / 2 + 0.3 * 600.0 * (1 - c) / 2;
  const auto out = tilt_irradiance({100.0}, {500.0}, one_hour(0.5, 0.0, tilt));
  CHECK(out[0] == doctest::Approx(expected).epsilon(1e-12));
  // sin(elevation) = 0 takes the same branch instead of dividing by zero.
  const auto flat = tilt_irradiance({100.0}, {500.0}, one_hour(0.0, 120.0, tilt));
  CHECK(std::isfinite(flat[0]));
  CHECK(flat[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("tilted hour matches a hand evaluation") {
  // Evaluated separately: 120(1+cos35)/2 + 0.3*720(1-cos35)/2
  // + 600(cos40 sin35 cos10 + sin40 cos35)/sin40.
  const auto out = tilt_irradiance({120.0}, {600.0}, one_hour(40.0, 10.0, 35.0));
  CHECK(out[0] == doctest::Approx(1024.078092013182).epsilon(1e-12));
}

TEST_CASE("transposition is non-negative and reduces at zero tilt") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> elev(-10.0, 90.0), azim(-180.0, 180.0), tilt(0.0, 90.0), pan(-180.0, 180.0),
      rad(0.0, 1000.0), alb(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double e = elev(rng), a = azim(rng), dhi = rad(rng), dni = rad(rng);
    const double v = tilt_irradiance_at(dhi, dni, e, a, tilt(rng), pan(rng), alb(rng));
    CHECK(v >= 0.0);
    if (e > 1.5) {
      const double flat = tilt_irradiance_at(dhi, dni, e, a, 0.0, pan(rng), alb(rng));
      CHECK(flat == doctest::Approx(dhi + dni).epsilon(1e-10));
    }
  }
}

TEST_CASE("grazing geometry is clamped at zero") {
  // Panel facing north, sun low in the south: the beam term is strongly negative.
  const double v = tilt_irradiance_at(1.0, 900.0, 3.0, 0.0, 90.0, 180.0, 0.0);
  CHECK(v == 0.0);
}

TEST_CASE("geometry validation") {
  CHECK_THROWS_AS(tilt_irradiance({1.0}, {1.0}, one_hour(10.0, 0.0, 95.0)), std::invalid_argument);
  CHECK_THROWS_AS(tilt_irradiance({1.0}, {1.0}, one_hour(10.0, 0.0, 30.0, 0.0, 1.5)), std::invalid_argument);
  CHECK_THROWS_AS(tilt_irradiance({1.0}, {1.0}, one_hour(95.0, 0.0, 30.0)), std::invalid_argument);
  CHECK_THROWS_AS(tilt_irradiance({1.0, 2.0}, {1.0}, one_hour(10.0, 0.0, 30.0)), std::invalid_argument);
}

TEST_CASE("synthetic bundles are deterministic and seed sensitive") {
  const auto a = synth_bundle(1, 720, 2);
  const auto b = synth_bundle(1, 720, 2);
  const auto c = synth_bundle(2, 720, 2);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.horizon == 720);
  CHECK(a.buildings.size() == 2);
  REQUIRE(a.irr_tilt.has_value());
  CHECK_NOTHROW(a.validate());
  CHECK_THROWS_AS(synth_bundle(1, 700, 2), DataError);
}

TEST_CASE("synthetic irradiance is zero while the sun is down") {
  const auto b = synth_bundle(1, 720, 2);
  std::size_t night = 0;
  for (std::size_t t = 0; t < b.horizon; ++t) {
    if (b.sun_elev[t] > 0.0) continue;
    ++night;
    CHECK(b.dhi[t] == 0.0);
    CHECK(b.dni[t] == 0.0);
    CHECK((*b.irr_tilt)[t] == 0.0);
  }
  CHECK(night > 100);
}

TEST_CASE("synthetic price and CO2 factor are positively correlated") {
  const auto b = synth_bundle(1, 720, 2);
  double mp = 0, mc = 0;
  for (std::size_t t = 0; t < b.horizon; ++t) {
    mp += b.spot_price[t];
    mc += b.co2_el[t];
  }
  mp /= 720.0;
  mc /= 720.0;
  double cov = 0;
  for (std::size_t t = 0; t < b.horizon; ++t) cov += (b.spot_price[t] - mp) * (b.co2_el[t] - mc);
  CHECK(cov > 0.0);
}

TEST_CASE("bundle CSV round trip is exact") {
  TempDir dir;
  const auto a = synth_bundle(3, 48, 3);
  write_bundle(a, dir / "b.csv");
  const auto b = load_bundle(dir / "b.csv");
  CHECK(a == b);
  CHECK(b.buildings.size() == 3);
  CHECK(b.buildings[2].id == a.buildings[2].id);
}

TEST_CASE("load_bundle rejects bad files") {
  TempDir dir;
  const auto good = synth_bundle(3, 24, 1);
  write_bundle(good, dir / "good.csv");
  std::string text = zen::test::slurp(dir / "good.csv");

  SUBCASE("horizon not divisible by 24") {
    const auto last = text.rfind('\n', text.size() - 2);
    std::string extra = text + "24" + text.substr(text.find(',', last + 1));
    write_text(dir / "bad.csv", extra);
    try {
      load_bundle(dir / "bad.csv");
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("horizon not divisible by 24") != std::string::npos);
    }
  }
  SUBCASE("negative DHI names row and column") {
    // Row 3 (hour 2): dhi is the third column.
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    auto& row = lines[3];
    const auto c1 = row.find(',');
    const auto c2 = row.find(',', c1 + 1);
    const auto c3 = row.find(',', c2 + 1);
    row = row.substr(0, c2 + 1) + "-5" + row.substr(c3);
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    write_text(dir / "neg.csv", joined);
    try {
      load_bundle(dir / "neg.csv");
      FAIL("expected an error");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 3") != std::string::npos);
      CHECK(msg.find("'dhi'") != std::string::npos);
    }
  }
  SUBCASE("missing column") {
    ColumnMap schema;
    schema.temperature = "temp_c";
    CHECK_THROWS_AS(load_bundle(dir / "good.csv", schema), DataError);
  }
  SUBCASE("non-numeric cell") {
    const auto pos = text.find('\n') + 1;
    std::string broken = text;
    broken.replace(broken.find(',', pos) + 1, 0, "x");
    write_text(dir / "nan.csv", broken);
    try {
      load_bundle(dir / "nan.csv");
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
  }
}

TEST_CASE("bundle validation") {
  auto b = synth_bundle(1, 48, 1);
  b.buildings[0].sh[5] = -1.0;
  CHECK_THROWS_AS(b.validate(), DataError);
  b = synth_bundle(1, 48, 1);
  b.dni.pop_back();
  CHECK_THROWS_AS(b.validate(), DataError);
}
