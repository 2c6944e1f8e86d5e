#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "zen/milp.hpp"
#include "zen/solve.hpp"
#include "zen/verify.hpp"

using namespace zen;
using namespace zen::test;
using names::var;

namespace {

double coef(const MilpModel& m, const std::string& row, const std::string& col) {
  const int r = m.row(row);
  const int c = m.col(col);
  REQUIRE_MESSAGE(r >= 0, row);
  REQUIRE_MESSAGE(c >= 0, col);
  for (const auto& t : m.constraints()[static_cast<std::size_t>(r)].terms)
    if (t.col == c) return t.coef;
  return 0.0;
}

double obj(const MilpModel& m, const std::string& col) {
  const int c = m.col(col);
  REQUIRE_MESSAGE(c >= 0, col);
  return m.objective()[static_cast<std::size_t>(c)];
}

std::size_t count_prefix(const MilpModel& m, const std::string& prefix, bool rows) {
  std::size_t n = 0;
  if (rows) {
    for (const auto& r : m.constraints()) n += r.name.rfind(prefix, 0) == 0;
  } else {
    for (const auto& v : m.variables()) n += v.name.rfind(prefix, 0) == 0;
  }
  return n;
}

double value(const MilpModel& m, const SolveReport& r, const std::string& col) {
  const int c = m.col(col);
  REQUIRE_MESSAGE(c >= 0, col);
  return r.values[static_cast<std::size_t>(c)];
}

Catalog catalog_of(std::vector<TechnologySpec> techs) {
  Catalog c;
  c.econ = unit_econ();
  c.techs = std::move(techs);
  return c;
}

SolveReport solve(const MilpModel& m) {
  MilpOptions o;
  o.gap_tol = 1e-9;
  return solve_milp(m, o);
}

TechnologySpec heat_pump() {
  TechnologySpec t;
  t.id = "hp";
  t.kind = TechKind::HeatPump;
  t.x_max = 1000.0;
  t.var_cost = 1.0;
  t.eta_ii = 0.5;
  t.t_supply_sh = 35.0;
  t.t_supply_dhw = 60.0;
  t.t_rating = 7.0;
  t.cop_max = 10.0;
  return t;
}

}  // namespace

TEST_CASE("discount factor") {
  CHECK(discount_factor(1.0, 1) == 0.5);
  // Closed form (1 - (1+r)^-D) / r evaluated separately.
  CHECK(discount_factor(0.04, 30) == doctest::Approx(17.29203330066449).epsilon(1e-13));
  CHECK(discount_factor(1e6, 5) < 1.1e-6);
  CHECK_THROWS_AS(discount_factor(0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(discount_factor(0.04, 0), std::invalid_argument);
  EconomicParams e;
  e.eps_tot = 12.5;
  CHECK(e.discount() == 12.5);
}

TEST_CASE("heat pump COP") {
  CHECK(heat_pump_cop(0.5, 35.0, 5.0, 10.0) == doctest::Approx(0.5 * 308.15 / 30.0).epsilon(1e-14));
  CHECK(heat_pump_cop(0.5, 35.0, 5.0, 10.0) == doctest::Approx(5.136).epsilon(1e-4));
  double last = 0.0;
  for (double t = -60.0; t < 34.0; t += 1.0) {
    const double c = heat_pump_cop(0.5, 35.0, t, 7.0);
    CHECK(c >= last);
    CHECK(c >= 1.0);
    CHECK(c <= 7.0);
    CHECK(heat_pump_cop(0.5, 60.0, t, 7.0) <= c);
    last = c;
  }
  CHECK(heat_pump_cop(0.1, 35.0, -300.0, 7.0) == 1.0);
  bool clamped = false;
  CHECK(heat_pump_cop(0.5, 35.0, 35.0, 7.0, &clamped) == 7.0);
  CHECK(clamped);

  auto hp = heat_pump();
  const auto tab = precompute_cop({-10.0, 5.0, 40.0}, hp);
  CHECK(tab.cop_sh[1] == heat_pump_cop(0.5, 35.0, 5.0, 10.0));
  CHECK(tab.cop_dhw[0] < tab.cop_sh[0]);
  CHECK(tab.clamped == 1);
  CHECK(tab.pmax_sh == doctest::Approx(1.0 / (0.5 * 308.15 / 28.0)).epsilon(1e-14));
  CHECK(tab.pmax_sh > 0.0);
  CHECK(tab.pmax_sh <= 1.0);
}

TEST_CASE("map_t_kappa") {
  std::vector<std::size_t> ident(48);
  for (std::size_t i = 0; i < 48; ++i) ident[i] = i;
  for (std::size_t t = 0; t < 48; ++t) CHECK(map_t_kappa(t, ident, Granularity::Hour) == t);

  std::vector<std::size_t> xi(10, 0);
  xi[1] = 7;
  CHECK(map_t_kappa(25, xi, Granularity::Day) == 7 * 24 + 1);
  CHECK_THROWS_AS(map_t_kappa(240, xi, Granularity::Day), std::out_of_range);

  std::mt19937_64 rng(1);
  std::vector<std::size_t> r(30);
  for (auto& v : r) v = rng() % 9;
  for (std::size_t t = 0; t < 720; ++t) {
    const std::size_t day = t / 24, hour = t % 24;  // separate decomposition
    CHECK(map_t_kappa(t, r, Granularity::Day) == r[day] * 24 + hour);
  }
}

TEST_CASE("objective of a two-step boiler toy, term by term") {
  auto td = toy_time(1, 2, 3.0);
  td.spot = {0.1, 0.2};
  td.el[0] = {1.0, 2.0};
  td.sh[0] = {4.0, 6.0};
  auto b = boiler();
  b.var_cost = 100.0;
  b.maint_cost = 10.0;
  b.fix_cost = 50.0;
  b.serves_dhw = false;
  auto cat = catalog_of({b});
  cat.econ.eps_tot = 2.0;
  cat.econ.p_grid = 0.05;
  cat.econ.p_ret = 0.01;
  cat.econ.fuels["gas"].price = 0.05;
  const auto m = build(td, cat, {Variant::M0, false});

  CHECK(obj(m, "x[boiler,a]") == 105.0);
  CHECK(obj(m, "b[boiler,a]") == 50.0);
  CHECK(obj(m, "f[boiler,a,0]") == doctest::Approx(1.5 * 0.05));
  CHECK(obj(m, "imp[a,0]") == doctest::Approx(1.5 * (0.1 + 0.06)));
  CHECK(obj(m, "imp[a,1]") == doctest::Approx(1.5 * (0.2 + 0.06)));
  CHECK(obj(m, "exp[a,1]") == doctest::Approx(-1.5 * 0.2));
  CHECK(m.objective_constant() == 0.0);

  const auto r = solve(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  const double hand = 105.0 * 6.0 + 50.0 + 1.5 * (0.05 * 4.0 / 0.9 + 0.16 * 1.0 + 0.05 * 6.0 / 0.9 + 0.26 * 2.0);
  CHECK(r.objective == doctest::Approx(hand).epsilon(1e-9));
  CHECK(value(m, r, "q_sh[boiler,a,1]") == doctest::Approx(6.0));
  CHECK(verify_solution(m, r.values, td, cat, {Variant::M0, false}).ok());
}

TEST_CASE("zero prices and costs give a zero objective") {
  auto td = toy_time(1, 4);
  td.sh[0] = {1, 2, 3, 4};
  const auto m = build(td, catalog_of({eboiler()}), {Variant::M0, false});
  const auto r = solve(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(0.0));
}

TEST_CASE("operating terms scale with the cluster weight") {
  auto td = toy_time(1, 24, 30.0);
  td.spot.assign(24, 0.1);
  td.el[0].assign(24, 1.0);
  const auto m = build(td, catalog_of({}), {Variant::M0, false});
  const auto r = solve(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.objective == doctest::Approx(30.0 * 24 * 0.1));
}

TEST_CASE("zero emission balance coefficients") {
  auto td = toy_time(1, 3);
  td.weight = {2.0, 2.0, 5.0};
  td.co2 = {100.0, 50.0, 20.0};
  auto cat = catalog_of({boiler(), battery()});
  cat.econ.fuels["gas"].co2 = 200.0;
  cat.econ.alpha_zen = 0.5;
  const auto m = build(td, cat, {Variant::M0, false});
  for (std::size_t t = 0; t < 3; ++t) {
    const double w = td.weight[t], phi = td.co2[t];
    CHECK(coef(m, "zeb", var("imp", "a", t)) == doctest::Approx(w * phi));
    CHECK(coef(m, "zeb", var("exp", "a", t)) == doctest::Approx(-w * phi));
    CHECK(coef(m, "zeb", var("f", "boiler", "a", t)) == doctest::Approx(w * 200.0));
    CHECK(coef(m, "zeb", var("gimp", "bat", "a", t)) == doctest::Approx(w * phi));
    CHECK(coef(m, "zeb", var("gexp", "bat", "a", t)) == doctest::Approx(-w * phi * 0.9 * 0.5));
    CHECK(coef(m, "zeb", var("pexp", "bat", "a", t)) == doctest::Approx(-w * phi * 0.9));
  }
  const auto& row = m.constraints()[static_cast<std::size_t>(m.row("zeb"))];
  CHECK(row.sense == Sense::LessEqual);
  CHECK(row.rhs == 0.0);

  // One unit imported and one exported at equal intensity balance exactly.
  std::vector<double> x(m.num_vars(), 0.0);
  td.co2 = {100.0, 100.0, 100.0};
  td.weight = {1.0, 1.0, 1.0};
  const auto m2 = build(td, cat, {Variant::M0, false});
  x[static_cast<std::size_t>(m2.col("imp[a,0]"))] = 1.0;
  x[static_cast<std::size_t>(m2.col("exp[a,2]"))] = 1.0;
  CHECK(m2.activity(m2.constraints()[static_cast<std::size_t>(m2.row("zeb"))], x) == 0.0);
}

TEST_CASE("electric heater alone follows the heat load") {
  auto td = toy_time(1, 3);
  td.sh[0] = {2.0, 5.0, 1.0};
  const auto cat = catalog_of({eboiler()});
  const auto m = build(td, cat, {Variant::M0, false});
  const auto r = solve(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(value(m, r, var("q_sh", "eb", "a", t)) == doctest::Approx(td.sh[0][t]));
    CHECK(value(m, r, var("imp", "a", t)) == doctest::Approx(td.sh[0][t]));
  }
}

TEST_CASE("CHP balance rows") {
  auto td = toy_time(1, 2);
  TechnologySpec chp;
  chp.id = "chp";
  chp.kind = TechKind::Chp;
  chp.x_max = 50.0;
  chp.eff_el = 0.35;
  chp.eff_heat = 0.5;
  chp.fuel = "gas";
  const auto m = build(td, catalog_of({chp}), {Variant::M0, false});
  for (std::size_t t = 0; t < 2; ++t) {
    const auto e = var("e", "chp", "a", t), f = var("f", "chp", "a", t);
    CHECK(coef(m, var("bal_el", "a", t), e) == 1.0);
    CHECK(coef(m, var("bal_el", "a", t), var("imp", "a", t)) == 1.0);
    CHECK(coef(m, var("bal_el", "a", t), var("exp", "a", t)) == -1.0);
    CHECK(coef(m, var("fuel_el", "chp", "a", t), e) == 1.0);
    CHECK(coef(m, var("fuel_el", "chp", "a", t), f) == -0.35);
    CHECK(coef(m, var("fuel_heat", "chp", "a", t), var("q_sh", "chp", "a", t)) == 1.0);
    CHECK(coef(m, var("fuel_heat", "chp", "a", t), var("q_dhw", "chp", "a", t)) == 1.0);
    CHECK(coef(m, var("fuel_heat", "chp", "a", t), f) == -0.5);
    CHECK(coef(m, var("bal_sh", "a", t), var("q_sh", "chp", "a", t)) == 1.0);
    CHECK(coef(m, var("bal_dhw", "a", t), var("q_dhw", "chp", "a", t)) == 1.0);
    CHECK(coef(m, var("cap", "chp", "a", t), e) == 1.0);
    CHECK(coef(m, var("cap", "chp", "a", t), "x[chp,a]") == -1.0);
    CHECK(coef(m, var("exp_lim", "a", t), e) == -1.0);
  }
}

TEST_CASE("semi-continuous capacity") {
  auto b = boiler();
  b.x_min = 2.0;
  b.x_max = 10.0;
  b.var_cost = 1.0;
  const auto cat = catalog_of({b});
  for (double load : {1.0, 5.0}) {
    auto td = toy_time(1, 2);
    td.sh[0] = {load, load};
    const auto m = build(td, cat, {Variant::M0, false});
    const auto& x = m.var(m.col("x[boiler,a]"));
    CHECK(x.kind == VarKind::SemiContinuous);
    CHECK(x.sc_lower == 2.0);
    CHECK(x.paired_binary == m.col("b[boiler,a]"));
    const auto r = solve(m);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(value(m, r, "x[boiler,a]") == doctest::Approx(std::max(2.0, load)));
    CHECK(value(m, r, "b[boiler,a]") == doctest::Approx(1.0));
  }
  // With no load the capacity stays at zero.
  const auto m = build(toy_time(1, 2), cat, {Variant::M0, false});
  const auto r = solve(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(value(m, r, "x[boiler,a]") == 0.0);
}

TEST_CASE("closed heating grid forces plant capacities to zero") {
  auto plant = boiler("chips");
  plant.level = Level::Plant;
  auto local = boiler();
  local.var_cost = 100.0;
  auto td = toy_time(1, 2);
  td.sh[0] = {3.0, 3.0};
  const auto cat = catalog_of({local, plant});
  auto m = build(td, cat, {Variant::M0, false});
  CHECK(coef(m, "inv_hg[chips,plant]", "b_hg") == -plant.x_max);
  const auto open = solve(m);
  REQUIRE(open.status == SolveStatus::Optimal);
  CHECK(value(m, open, "x[chips,plant]") == doctest::Approx(3.0));
  m.var(m.col("b_hg")).upper = 0.0;
  const auto closed = solve(m);
  REQUIRE(closed.status == SolveStatus::Optimal);
  CHECK(value(m, closed, "x[chips,plant]") == 0.0);
  CHECK(value(m, closed, "x[boiler,a]") == doctest::Approx(3.0));
}

TEST_CASE("relaxed binaries keep the capacity link") {
  auto b = boiler();
  b.x_max = 10.0;
  auto td = toy_time(1, 2);
  const auto m = build(td, catalog_of({b}), {Variant::M0, false});
  const auto lp = relaxation(m);
  const int x = m.col("x[boiler,a]"), bin = m.col("b[boiler,a]");
  CHECK(lp.col_upper[static_cast<std::size_t>(bin)] == 1.0);
  CHECK(coef(m, "inv_max[boiler,a]", "x[boiler,a]") == 1.0);
  CHECK(coef(m, "inv_max[boiler,a]", "b[boiler,a]") == -10.0);
  CHECK(m.var(x).upper == 10.0);
}

TEST_CASE("heat pump rows") {
  const auto hp = heat_pump();
  auto td = toy_time(1, 2);
  td.temperature = {5.0, -5.0};
  td.sh[0] = {8.0, 3.0};
  td.dhw[0] = {2.0, 4.0};
  const auto cat = catalog_of({hp});
  const auto m = build(td, cat, {Variant::M0, false});
  const double cop_sh = heat_pump_cop(0.5, 35.0, 5.0, 10.0);
  const double cop_dhw = heat_pump_cop(0.5, 60.0, 5.0, 10.0);
  const double pmax_sh = 28.0 / (0.5 * 308.15);
  const double pmax_dhw = 53.0 / (0.5 * 333.15);
  CHECK(coef(m, "cop_sh[hp,a,0]", "q_sh[hp,a,0]") == doctest::Approx(-1.0 / cop_sh));
  CHECK(coef(m, "cop_dhw[hp,a,0]", "q_dhw[hp,a,0]") == doctest::Approx(-1.0 / cop_dhw));
  CHECK(coef(m, "hp_cap[hp,a,0]", "d_sh[hp,a,0]") == doctest::Approx(1.0 / pmax_sh));
  CHECK(coef(m, "hp_cap[hp,a,0]", "d_dhw[hp,a,0]") == doctest::Approx(1.0 / pmax_dhw));
  CHECK(coef(m, "bal_el[a,0]", "d_sh[hp,a,0]") == -1.0);

  // Minimum capacity: the rating constraint binds at the busier hour.
  const auto r = solve(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  double need = 0.0;
  for (std::size_t t = 0; t < 2; ++t) {
    const double csh = heat_pump_cop(0.5, 35.0, td.temperature[t], 10.0);
    const double cdhw = heat_pump_cop(0.5, 60.0, td.temperature[t], 10.0);
    need = std::max(need, td.sh[0][t] / csh / pmax_sh + td.dhw[0][t] / cdhw / pmax_dhw);
    CHECK(value(m, r, var("d_sh", "hp", "a", t)) == doctest::Approx(td.sh[0][t] / csh));
  }
  CHECK(value(m, r, "x[hp,a]") == doctest::Approx(need).epsilon(1e-9));
  CHECK(verify_solution(m, r.values, td, cat, {Variant::M0, false}).ok());

  // No duty: zero input and the full capacity as slack.
  std::vector<double> x(m.num_vars(), 0.0);
  x[static_cast<std::size_t>(m.col("x[hp,a]"))] = 7.0;
  const auto& row = m.constraints()[static_cast<std::size_t>(m.row("hp_cap[hp,a,0]"))];
  CHECK(m.activity(row, x) == -7.0);
}

TEST_CASE("part load interval") {
  auto b = boiler();
  b.x_max = 10.0;
  b.part_load_min = 0.3;
  b.serves_dhw = false;
  auto td = toy_time(1, 2);
  const auto cat = catalog_of({b});
  const auto m = build(td, cat, {Variant::M0, false});
  const auto& rows = m.constraints();
  auto ok = [&](double cap, double q, double u) {
    std::vector<double> x(m.num_vars(), 0.0);
    x[static_cast<std::size_t>(m.col("x[boiler,a]"))] = cap;
    x[static_cast<std::size_t>(m.col("q_sh[boiler,a,0]"))] = q;
    x[static_cast<std::size_t>(m.col("u[boiler,a,0]"))] = u;
    for (const char* name : {"pl_on[boiler,a,0]", "pl_min[boiler,a,0]", "cap[boiler,a,0]"}) {
      const auto& r = rows[static_cast<std::size_t>(m.row(name))];
      const double act = m.activity(r, x);
      if (r.sense == Sense::LessEqual && act > r.rhs + 1e-12) return false;
      if (r.sense == Sense::GreaterEqual && act < r.rhs - 1e-12) return false;
    }
    return true;
  };
  CHECK(ok(10, 3, 1));
  CHECK(ok(10, 10, 1));
  CHECK(ok(10, 6.5, 1));
  CHECK_FALSE(ok(10, 2.9, 1));
  CHECK_FALSE(ok(10, 10.1, 1));
  CHECK(ok(10, 0, 0));
  CHECK_FALSE(ok(10, 0.5, 0));

  // The simplified build writes no part-load rows at all.
  const auto s = build(td, cat, {Variant::M0, true});
  CHECK(count_prefix(s, "pl_", true) == 0);
  CHECK(count_prefix(s, "u[", false) == 0);
  CHECK(s.var(s.col("x[boiler,a]")).kind == VarKind::Continuous);
}

TEST_CASE("M0 storage block on a two-day toy") {
  auto td = toy_time(2, 24);
  const auto cat = catalog_of({heat_store(), eboiler()});
  const auto m = build(td, cat, {Variant::M0, false});
  // 25 levels per day, 24 recursion rows per day, one closure per day.
  CHECK(count_prefix(m, "v[tank,a,", false) == 50);
  CHECK(count_prefix(m, "st_lvl_v[", true) == 48);
  CHECK(count_prefix(m, "st_close_v[", true) == 2);
  CHECK(coef(m, "st_close_v[tank,a,1]", "v[tank,a,25]") == 1.0);
  CHECK(coef(m, "st_close_v[tank,a,1]", "v[tank,a,49]") == -1.0);
  // Level 26 is hour 1 of day 1, moved by timestep 24 (the first hour of cluster 1).
  CHECK(coef(m, "st_lvl_v[tank,a,26]", "v[tank,a,26]") == 1.0);
  CHECK(coef(m, "st_lvl_v[tank,a,26]", "v[tank,a,25]") == -1.0);
  CHECK(coef(m, "st_lvl_v[tank,a,26]", "ch[tank,a,24]") == -1.0);
  CHECK(coef(m, "st_lvl_v[tank,a,26]", "dch[tank,a,24]") == 1.0);
  CHECK(coef(m, "st_cap[tank,a,26]", "x[tank,a]") == -1.0);
  CHECK(coef(m, "st_ch[tank,a,3]", "x[tank,a]") == -1.0);
}

TEST_CASE("battery recursion with losses") {
  auto td = toy_time(1, 2);
  const auto cat = catalog_of({battery()});
  const auto m = build(td, cat, {Variant::M0, false});
  CHECK(coef(m, "st_lvl_vg[bat,a,1]", "gimp[bat,a,0]") == doctest::Approx(-0.9));
  CHECK(coef(m, "st_lvl_vg[bat,a,1]", "gdl[bat,a,0]") == 1.0);
  CHECK(coef(m, "st_lvl_vg[bat,a,1]", "gexp[bat,a,0]") == 1.0);
  CHECK(coef(m, "st_lvl_vp[bat,a,2]", "pch[bat,a,1]") == doctest::Approx(-0.9));
  // Charge 5 at 0.9, discharge 4.5: every recursion row and the closure hold.
  std::vector<double> x(m.num_vars(), 0.0);
  auto set = [&](const char* n, double v) { x[static_cast<std::size_t>(m.col(n))] = v; };
  set("gimp[bat,a,0]", 5.0);
  set("gdl[bat,a,1]", 4.5);
  set("vg[bat,a,1]", 4.5);
  for (const char* r : {"st_lvl_vg[bat,a,1]", "st_lvl_vg[bat,a,2]", "st_close_vg[bat,a,0]"})
    CHECK(m.activity(m.constraints()[static_cast<std::size_t>(m.row(r))], x) == doctest::Approx(0.0));
}

TEST_CASE("lossless idle storage keeps its level") {
  auto td = toy_time(1, 6);
  auto tank = heat_store();
  tank.var_cost = 1.0;
  const auto cat = catalog_of({tank, eboiler()});
  auto m = build(td, cat, {Variant::M0, false});
  m.var(m.col("v[tank,a,0]")).lower = 3.0;
  m.var(m.col("x[tank,a]")).lower = 3.0;
  for (std::size_t t = 0; t < 6; ++t) {
    m.var(m.col(var("ch", "tank", "a", t))).upper = 0.0;
    m.var(m.col(var("dch", "tank", "a", t))).upper = 0.0;
  }
  const auto r = solve(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  for (std::size_t k = 0; k <= 6; ++k) CHECK(value(m, r, var("v", "tank", "a", k)) == doctest::Approx(3.0));
}

TEST_CASE("M1 storage chain over a two-cluster toy") {
  // Four hours alternating between two single-hour clusters.
  auto td = toy_time(2, 1);
  td.xi = {0, 1, 0, 1};
  td.horizon_map = {0, 1, 0, 1};
  td.weight = {2.0, 2.0};
  td.sh[0] = {0.0, 1.0};
  const auto cat = catalog_of({heat_store(), eboiler()});
  auto m = build(td, cat, {Variant::M1, false});
  CHECK(count_prefix(m, "v[tank,a,", false) == 5);
  CHECK(count_prefix(m, "st_lvl_v[", true) == 4);
  CHECK(count_prefix(m, "st_close_v[", true) == 1);
  CHECK(coef(m, "st_lvl_v[tank,a,3]", "ch[tank,a,0]") == -1.0);

  // Cluster 0 must charge one unit each occurrence and cannot pass it on itself.
  m.var(m.col("ch[tank,a,0]")).lower = 1.0;
  m.var(m.col("dch[tank,a,0]")).upper = 0.0;
  m.var(m.col("dch[tank,a,1]")).upper = 0.0;
  CHECK(solve(m).status == SolveStatus::Infeasible);
  // Letting cluster 1 discharge restores feasibility.
  m.var(m.col("dch[tank,a,1]")).upper = kInf;
  const auto r = solve(m);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(value(m, r, "dch[tank,a,1]") >= 1.0 - 1e-9);
  CHECK(verify_solution(m, r.values, td, cat, {Variant::M1, false}).ok());
}

TEST_CASE("M1 dimensions with day and hour clusters") {
  const auto bundle = synth_bundle(1, 48, 1);
  const auto cat = catalog_of({heat_store(), eboiler()});
  FitOptions o;
  o.k = 2;
  const auto days = fit(bundle, o);
  const auto md = build(days, cat, {Variant::M1, false});
  CHECK(count_prefix(md, "st_lvl_v[", true) == 48);
  CHECK(count_prefix(md, "ch[", false) == 48);
  CHECK(count_prefix(md, "dch[", false) == 48);

  o.granularity = Granularity::Hour;
  o.k = 3;
  const auto hours = fit(bundle, o);
  const auto mh = build(hours, cat, {Variant::M1, false});
  // Per timestep: imp, exp, q_sh/q_dhw of the heater, ch, dch. Plus 49 levels,
  // b_hg and (x, b) for both technologies.
  const std::string id = bundle.buildings[0].id;
  CHECK(mh.num_vars() == 3 * 6 + 49 + 1 + 4);
  CHECK(count_prefix(mh, "v[tank," + id + ",", false) == 49);
  // Rows: balances 3, exp_lim 1, heater cap 1, storage rate 2 per timestep;
  // 48 recursion, 49 level caps, closure, inv_max twice, zeb.
  CHECK(mh.num_rows() == 3 * 7 + 48 + 49 + 1 + 2 + 1);
}

TEST_CASE("Full equals M0 with one horizon-long cluster") {
  const auto bundle = synth_bundle(4, 48, 2);
  auto cat = load_catalog("data/catalog.json");
  for (bool simplified : {true, false}) {
    const auto full = build_full(bundle, cat, simplified);
    const auto m0 = build(full_time_data(bundle), cat, {Variant::M0, simplified});
    CHECK(full.variant == "Full");
    CHECK(full.same_structure(m0));
  }
}

TEST_CASE("rejected combinations") {
  const auto bundle = synth_bundle(1, 48, 1);
  FitOptions o;
  o.granularity = Granularity::Hour;
  o.k = 4;
  const auto hours = fit(bundle, o);
  const auto cat = catalog_of({eboiler()});
  CHECK_THROWS_AS(build(hours, cat, {Variant::M0, false}), std::invalid_argument);
  auto td = toy_time(1, 2);
  td.sh[0] = {1.0, 0.0};
  CHECK_THROWS_AS(build(td, catalog_of({solar()}), {Variant::M0, false}), std::domain_error);
  auto b = boiler();
  b.fuel = "coal";
  CHECK_THROWS_AS(build(toy_time(1, 2), catalog_of({b}), {Variant::M0, false}), std::invalid_argument);
}

TEST_CASE("model construction is deterministic and fully used") {
  const auto bundle = synth_bundle(1, 720, 2);
  const auto cat = load_catalog("data/catalog.json");
  FitOptions o;
  o.k = 5;
  o.heuristic = true;
  const auto cm = fit(bundle, o);
  for (auto v : {Variant::M0, Variant::M1}) {
    const auto a = build(cm, cat, {v, false});
    const auto b = build(cm, cat, {v, false});
    CHECK(a == b);
    std::vector<char> used(a.num_vars(), 0);
    for (const auto& r : a.constraints())
      for (const auto& t : r.terms) used[static_cast<std::size_t>(t.col)] = 1;
    for (std::size_t j = 0; j < a.num_vars(); ++j) {
      const auto& v = a.variables()[j];
      if (a.objective()[j] != 0.0) CHECK_MESSAGE((used[j] || std::isfinite(v.upper)), v.name);
    }
  }
}

TEST_CASE("simplify is idempotent and the simplified optimum is a lower bound") {
  const auto cat = load_catalog("data/catalog.json");
  const auto s = simplify(cat);
  CHECK(catalog_to_json(simplify(s)) == catalog_to_json(s));
  for (const auto& t : s.techs) {
    CHECK(t.fix_cost == 0.0);
    CHECK(t.x_min == 0.0);
    CHECK(t.part_load_min == 0.0);
  }

  auto b = boiler();
  b.x_min = 4.0;
  b.fix_cost = 30.0;
  b.var_cost = 2.0;
  b.part_load_min = 0.5;
  b.x_max = 20.0;
  auto e = eboiler();
  e.var_cost = 5.0;
  auto td = toy_time(1, 4);
  td.sh[0] = {1.0, 6.0, 0.5, 3.0};
  td.spot.assign(4, 0.3);
  const auto c = catalog_of({b, e});
  const auto full = solve(build(td, c, {Variant::M0, false}));
  const auto simple = solve(build(td, c, {Variant::M0, true}));
  REQUIRE(full.status == SolveStatus::Optimal);
  REQUIRE(simple.status == SolveStatus::Optimal);
  CHECK(simple.objective <= full.objective);
}
